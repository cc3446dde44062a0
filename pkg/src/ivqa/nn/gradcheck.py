"""Central finite-difference verification of analytic gradients."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import torch

__all__ = ["GradCheckReport", "grad_check"]


@dataclass
class GradCheckReport:
    tolerance: float
    max_rel_errors: dict[str, float] = field(default_factory=dict)
    passed: bool = True
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "max_rel_errors": dict(self.max_rel_errors),
            "passed": self.passed,
            "notes": list(self.notes),
        }


def _rel_error(a: float, b: float) -> float:
    # relative where gradients are large, absolute where they are tiny
    return abs(a - b) / max(1.0, abs(a), abs(b))


def grad_check(fn: Callable[[], torch.Tensor], params: dict[str, torch.Tensor],
               tolerance: float = 1e-4, base_step: float = 1e-6) -> GradCheckReport:
    """Compare autograd gradients of a scalar-valued ``fn`` against central differences.

    ``params`` maps names to leaf tensors that ``fn`` reads; each element is
    perturbed by a step scaled to its magnitude. Inputs must be float64.
    """
    report = GradCheckReport(tolerance=tolerance)
    for name, param in params.items():
        if param.dtype != torch.float64:
            raise ValueError(f"grad_check requires float64 parameters; {name} is {param.dtype}")
        param.requires_grad_(True)
        if param.grad is not None:
            param.grad = None

    loss = fn()
    if not torch.isfinite(loss):
        report.passed = False
        report.notes.append(f"non-finite loss {loss.item()}")
        return report
    loss.backward()

    analytic = {}
    for name, param in params.items():
        grad = param.grad
        if grad is None:
            grad = torch.zeros_like(param)
        if not torch.isfinite(grad).all():
            report.passed = False
            report.notes.append(f"non-finite analytic gradient for {name}")
            return report
        analytic[name] = grad.detach().clone()

    with torch.no_grad():
        for name, param in params.items():
            flat = param.view(-1)
            grad_flat = analytic[name].view(-1)
            worst = 0.0
            for idx in range(flat.numel()):
                old = flat[idx].item()
                step = base_step * max(1.0, abs(old))
                flat[idx] = old + step
                upper = fn().item()
                flat[idx] = old - step
                lower = fn().item()
                flat[idx] = old
                fd = (upper - lower) / (2.0 * step)
                if math.isnan(fd):
                    report.passed = False
                    report.notes.append(f"non-finite finite difference for {name}[{idx}]")
                    return report
                worst = max(worst, _rel_error(grad_flat[idx].item(), fd))
            report.max_rel_errors[name] = worst
            if worst > tolerance:
                report.passed = False
                report.notes.append(f"{name}: max relative error {worst:.3e} > {tolerance:.0e}")
    return report
