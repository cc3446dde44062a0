"""Two-class cross-entropy, optimal set matching, and the training loss schedule."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch
from scipy.optimize import linear_sum_assignment

from .blocks import DTYPE

__all__ = [
    "binary_cross_entropy",
    "hungarian_match",
    "relation_loss",
    "LossWeights",
    "loss_schedule",
    "combined_loss",
]


def binary_cross_entropy(logits, label: int) -> torch.Tensor:
    """Negative log of the softmax probability of the labeled class.

    ``logits`` is a pair (class-0 score, class-1 score); tensors keep gradients.
    """
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label!r}")
    if not torch.is_tensor(logits):
        logits = torch.as_tensor(logits, dtype=DTYPE)
    if logits.shape != (2,):
        raise ValueError(f"logits must be a pair, got shape {tuple(logits.shape)}")
    return -torch.log_softmax(logits, dim=-1)[label]


def hungarian_match(cost) -> list[tuple[int, int]]:
    """Min-cost assignment over a [N x M] cost matrix, covering min(N, M) pairs."""
    cost = np.asarray(cost, dtype=np.float64)
    if cost.size == 0:
        return []
    if cost.ndim != 2:
        raise ValueError(f"cost matrix must be 2-D, got shape {cost.shape}")
    if not np.isfinite(cost).all():
        raise ValueError("cost matrix contains non-finite entries")
    rows, cols = linear_sum_assignment(cost)
    return sorted(zip(rows.tolist(), cols.tolist()))


def relation_loss(logits, labels: Sequence[int]) -> tuple[torch.Tensor, list[tuple[int, int]]]:
    """Sum of cross-entropies over optimally matched (prediction, label) pairs.

    Predictions and labels need not align one-to-one: the match covers
    min(N, M) pairs and unmatched elements contribute nothing. The matching is
    computed on detached costs and held fixed, so gradients flow only through
    the cross-entropy terms.
    """
    scores = logits.scores if hasattr(logits, "scores") else logits
    if not torch.is_tensor(scores):
        scores = torch.as_tensor(scores, dtype=DTYPE)
    n_pred = scores.shape[0]
    labels = list(labels)
    for label in labels:
        if label not in (0, 1):
            raise ValueError(f"labels must be 0 or 1, got {label!r}")
    if n_pred == 0 or not labels:
        return torch.zeros((), dtype=scores.dtype), []
    log_probs = torch.log_softmax(scores, dim=-1)  # [N, 2]
    label_cols = torch.tensor(labels, dtype=torch.long)
    cost = -log_probs[:, label_cols]  # [N, M]
    assignment = hungarian_match(cost.detach().numpy())
    loss = sum(cost[i, j] for i, j in assignment)
    return loss, assignment


@dataclass(frozen=True)
class LossWeights:
    generation_weight: float
    relation_weight: float
    epoch: int


def loss_schedule(epoch: int, generation_init: float = 1.0, relation_init: float = 2.0,
                  relation_decay: float = 0.05) -> LossWeights:
    """Constant generation weight; relation weight decays per epoch, floored at 0."""
    if epoch < 0:
        raise ValueError(f"epoch must be >= 0, got {epoch}")
    return LossWeights(
        generation_weight=generation_init,
        relation_weight=max(0.0, relation_init - relation_decay * epoch),
        epoch=epoch,
    )


def combined_loss(gen_loss, rel_loss, epoch: int, **schedule_kwargs):
    """Weighted total of the generation and relation losses at a given epoch."""
    weights = loss_schedule(epoch, **schedule_kwargs)
    return weights.generation_weight * gen_loss + weights.relation_weight * rel_loss
