"""Visual compression and clue-conditioned enhancement.

Frame features are compressed into a fixed set of learned query tokens by
instruction-conditioned cross-attention, projected into the text embedding
space, and enhanced by attending over the refined clue tokens.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from .clues import ClueBank
from .nn.blocks import DTYPE, AttentionBlock, TextEmbedder, init_linear_
from .nn.checkpoint import load_named_arrays, save_named_arrays

__all__ = [
    "FrameFeatures",
    "VisualState",
    "VisualCompressor",
    "VisualProjector",
    "compression_instruction",
    "enhance",
    "synthetic_frame_features",
    "SyntheticFrameSource",
    "FileFrameSource",
    "write_frame_features",
    "read_frame_features",
]


@dataclass
class FrameFeatures:
    """Per-frame feature tokens: [n_frames, tokens_per_frame, d_visual] plus timestamps."""

    data: torch.Tensor
    timestamps: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.data.dim() != 3:
            raise ValueError(f"frame features must be 3-D, got shape {tuple(self.data.shape)}")
        if len(self.timestamps) != self.data.shape[0]:
            raise ValueError(
                f"{len(self.timestamps)} timestamps for {self.data.shape[0]} frames"
            )
        if any(b < a for a, b in zip(self.timestamps, self.timestamps[1:])):
            raise ValueError("frame timestamps must be sorted")

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def d_visual(self) -> int:
        return self.data.shape[2]

    def flat(self) -> torch.Tensor:
        return self.data.reshape(-1, self.d_visual)


@dataclass
class VisualState:
    """Compressed visual queries and their projected / clue-enhanced forms."""

    compressed: torch.Tensor
    projected: torch.Tensor
    enhanced: torch.Tensor | None = None
    iteration: int = 0

    def __post_init__(self):
        if self.enhanced is not None and self.enhanced.shape != self.projected.shape:
            raise ValueError("enhanced state must match the projected shape")


def compression_instruction(question: str) -> str:
    return f"Extract the context clues related to the question: {question}"


class VisualCompressor(nn.Module):
    """Compress frame tokens into a fixed number of learned query tokens.

    The instruction text is embedded in the visual feature space and appended
    to the key/value set, conditioning the compression on the question.
    """

    def __init__(self, d_visual: int, n_queries: int = 32, head_count: int = 4,
                 buckets: int = 4096, generator: torch.Generator | None = None):
        super().__init__()
        if n_queries < 1:
            raise ValueError(f"n_queries must be >= 1, got {n_queries}")
        queries = (torch.rand((n_queries, d_visual), generator=generator, dtype=DTYPE) * 2 - 1)
        self.queries = nn.Parameter(queries / (d_visual ** 0.5))
        self.block = AttentionBlock(d_visual, head_count, generator=generator)
        self.instruction_embedder = TextEmbedder(d_visual, buckets, generator=generator)

    @property
    def n_queries(self) -> int:
        return self.queries.shape[0]

    def forward(self, frames: FrameFeatures, instruction: str) -> torch.Tensor:
        if frames.n_frames == 0:
            raise ValueError("no visual input: frames are empty")
        kv = torch.cat([frames.flat(), self.instruction_embedder.embed(instruction)])
        return self.block(self.queries, kv)


class VisualProjector(nn.Module):
    """Affine map from the visual feature space to the text embedding space."""

    def __init__(self, d_visual: int, d_model: int, generator: torch.Generator | None = None):
        super().__init__()
        self.linear = nn.Linear(d_visual, d_model, dtype=DTYPE)
        init_linear_(self.linear, generator)

    def forward(self, compressed: torch.Tensor) -> torch.Tensor:
        return self.linear(compressed)


def enhance(projected: torch.Tensor, refined: ClueBank, block: AttentionBlock) -> torch.Tensor:
    """Enhance visual tokens by attending over the refined clue tokens.

    With no clues there is nothing to attend over and the input is returned
    unchanged (refinement guarantees a non-empty bank whenever input had clues).
    """
    if refined.n_clues == 0:
        return projected
    kv = torch.cat([refined.actions.data, refined.intents.data])
    return block(projected, kv)


def _frame_seed(seed: int, video_id: str, timestamp: float) -> np.random.Generator:
    key = f"{seed}:{video_id}:{round(timestamp * 1000)}"
    return np.random.default_rng(np.frombuffer(
        __import__("hashlib").blake2s(key.encode("utf-8"), digest_size=8).digest(),
        dtype=np.uint64,
    ))


def synthetic_frame_features(video_id: str, timestamps: list[float], d_visual: int,
                             tokens_per_frame: int, seed: int) -> FrameFeatures:
    """Deterministic stand-in for encoder output; same inputs give identical features."""
    frames = []
    for t in timestamps:
        rng = _frame_seed(seed, video_id, t)
        frames.append(rng.standard_normal((tokens_per_frame, d_visual)))
    data = np.stack(frames) if frames else np.zeros((0, tokens_per_frame, d_visual))
    return FrameFeatures(torch.from_numpy(data).to(DTYPE), list(timestamps))


class SyntheticFrameSource:
    """Seed-controlled frame feature producer keyed by video id and timestamp."""

    def __init__(self, d_visual: int, tokens_per_frame: int, seed: int):
        self.d_visual = d_visual
        self.tokens_per_frame = tokens_per_frame
        self.seed = seed

    def __call__(self, video_id: str, timestamps: list[float]) -> FrameFeatures:
        return synthetic_frame_features(
            video_id, timestamps, self.d_visual, self.tokens_per_frame, self.seed
        )


def write_frame_features(path: str, features: FrameFeatures) -> None:
    save_named_arrays(path, {
        "features": features.data.numpy(),
        "timestamps": np.asarray(features.timestamps, dtype=np.float64),
    })


def read_frame_features(path: str) -> FrameFeatures:
    arrays, _ = load_named_arrays(path)
    data = torch.from_numpy(arrays["features"]).to(DTYPE)
    return FrameFeatures(data, arrays["timestamps"].tolist())


class FileFrameSource:
    """Reads precomputed per-video feature files: <dir>/<video_id>.npz.

    Stored features are resampled to the requested timestamps by nearest
    stored frame.
    """

    def __init__(self, directory: str):
        self.directory = directory

    def __call__(self, video_id: str, timestamps: list[float]) -> FrameFeatures:
        import os

        path = os.path.join(self.directory, f"{video_id}.npz")
        stored = read_frame_features(path)
        if stored.n_frames == 0:
            raise ValueError(f"no frames stored for video {video_id!r}")
        stored_times = np.asarray(stored.timestamps)
        picks = [int(np.argmin(np.abs(stored_times - t))) for t in timestamps]
        return FrameFeatures(stored.data[picks], list(timestamps))
