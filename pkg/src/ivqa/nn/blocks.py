"""Attention blocks and embedding utilities.

Everything runs at float64 on CPU: gradient checks need the precision and the
test suite asserts bitwise reproducibility. Blocks carry no positional
encoding and no feed-forward sublayer; output projections start at zero so a
freshly built block with residual enabled is the identity map.
"""
from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field

import torch
from torch import nn

DTYPE = torch.float64

__all__ = [
    "DTYPE",
    "EmbeddingSeq",
    "AttentionBlock",
    "TextEmbedder",
    "cat_seqs",
    "cross_attention",
    "self_attention",
    "mean_pool_segments",
]


@dataclass
class EmbeddingSeq:
    """A token-embedding matrix [n_tokens x d_model] with optional per-unit segments."""

    data: torch.Tensor
    boundaries: list[tuple[int, int]] | None = field(default=None)

    def __post_init__(self):
        if self.data.dim() != 2:
            raise ValueError(f"embedding data must be 2-D, got shape {tuple(self.data.shape)}")
        if self.boundaries is not None:
            cursor = 0
            for start, end in self.boundaries:
                if not (cursor <= start < end <= self.n_tokens):
                    raise ValueError(
                        f"boundary ({start}, {end}) invalid for {self.n_tokens} tokens"
                    )
                cursor = end

    @property
    def n_tokens(self) -> int:
        return self.data.shape[0]

    @property
    def d_model(self) -> int:
        return self.data.shape[1]

    def segment(self, index: int) -> torch.Tensor:
        if self.boundaries is None:
            raise ValueError("sequence has no segment boundaries")
        start, end = self.boundaries[index]
        return self.data[start:end]


def cat_seqs(seqs: list[EmbeddingSeq]) -> EmbeddingSeq:
    """Concatenate along the token axis, re-basing segment boundaries."""
    if not seqs:
        raise ValueError("cannot concatenate zero sequences")
    boundaries = []
    offset = 0
    any_bounds = any(s.boundaries is not None for s in seqs)
    for seq in seqs:
        if seq.boundaries is not None:
            boundaries.extend((offset + a, offset + b) for a, b in seq.boundaries)
        offset += seq.n_tokens
    data = torch.cat([s.data for s in seqs], dim=0)
    return EmbeddingSeq(data, boundaries if any_bounds else None)


def _seeded_uniform_(tensor: torch.Tensor, bound: float, generator: torch.Generator | None) -> None:
    with torch.no_grad():
        tensor.copy_((torch.rand(tensor.shape, generator=generator, dtype=DTYPE) * 2 - 1) * bound)


def init_linear_(linear: nn.Linear, generator: torch.Generator | None, zero: bool = False) -> None:
    if zero:
        with torch.no_grad():
            linear.weight.zero_()
            linear.bias.zero_()
    else:
        bound = 1.0 / math.sqrt(linear.in_features)
        _seeded_uniform_(linear.weight, bound, generator)
        _seeded_uniform_(linear.bias, bound, generator)


class AttentionBlock(nn.Module):
    """Multi-head scaled dot-product attention with a residual connection.

    ``forward(query, kv)`` is cross-attention; ``forward(query)`` is
    self-attention. Shapes are unbatched: [n_tokens, d_model].
    """

    def __init__(self, d_model: int, head_count: int = 4, residual: bool = True,
                 generator: torch.Generator | None = None):
        super().__init__()
        if d_model % head_count != 0:
            raise ValueError(f"d_model {d_model} not divisible by head_count {head_count}")
        self.d_model = d_model
        self.head_count = head_count
        self.residual = residual
        self.q_proj = nn.Linear(d_model, d_model, dtype=DTYPE)
        self.k_proj = nn.Linear(d_model, d_model, dtype=DTYPE)
        self.v_proj = nn.Linear(d_model, d_model, dtype=DTYPE)
        self.out_proj = nn.Linear(d_model, d_model, dtype=DTYPE)
        for proj in (self.q_proj, self.k_proj, self.v_proj):
            init_linear_(proj, generator)
        init_linear_(self.out_proj, generator, zero=True)

    def _split_heads(self, x: torch.Tensor) -> torch.Tensor:
        n, _ = x.shape
        return x.view(n, self.head_count, self.d_model // self.head_count).transpose(0, 1)

    def forward(self, query: torch.Tensor, kv: torch.Tensor | None = None,
                need_weights: bool = False):
        if kv is None:
            kv = query
        if query.dim() != 2 or kv.dim() != 2:
            raise ValueError("attention inputs must be [n_tokens, d_model]")
        if query.shape[1] != self.d_model or kv.shape[1] != self.d_model:
            raise ValueError(
                f"d_model mismatch: block={self.d_model}, "
                f"query={query.shape[1]}, kv={kv.shape[1]}"
            )
        if query.shape[0] == 0 or kv.shape[0] == 0:
            raise ValueError("attention inputs must contain at least one token")
        q = self._split_heads(self.q_proj(query))
        k = self._split_heads(self.k_proj(kv))
        v = self._split_heads(self.v_proj(kv))
        scale = 1.0 / math.sqrt(self.d_model // self.head_count)
        scores = torch.matmul(q, k.transpose(1, 2)) * scale
        weights = torch.softmax(scores, dim=-1)
        context = torch.matmul(weights, v)  # [heads, n_query, d_head]
        merged = context.transpose(0, 1).reshape(query.shape[0], self.d_model)
        out = self.out_proj(merged)
        if self.residual:
            out = out + query
        if need_weights:
            return out, weights
        return out


def cross_attention(block: AttentionBlock, query: EmbeddingSeq, kv: EmbeddingSeq) -> EmbeddingSeq:
    """Attend query tokens over kv tokens; output keeps the query's shape and segments."""
    return EmbeddingSeq(block(query.data, kv.data), query.boundaries)


def self_attention(block: AttentionBlock, seq: EmbeddingSeq) -> EmbeddingSeq:
    return EmbeddingSeq(block(seq.data), seq.boundaries)


def mean_pool_segments(seq: EmbeddingSeq) -> torch.Tensor:
    """Mean over each boundary segment: [n_segments, d_model]."""
    if not seq.boundaries:
        raise ValueError("mean_pool_segments requires segment boundaries")
    return torch.stack([seq.data[a:b].mean(dim=0) for a, b in seq.boundaries])


_TOKEN_RE = re.compile(r"[a-z0-9']+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def stable_token_id(token: str, buckets: int) -> int:
    """Hash a token into [1, buckets); bucket 0 is reserved for empty text.

    blake2s keeps ids identical across processes and platforms (unlike hash()).
    """
    digest = hashlib.blake2s(token.encode("utf-8"), digest_size=4).digest()
    return 1 + int.from_bytes(digest, "big") % (buckets - 1)


class TextEmbedder(nn.Module):
    """Word-embedding layer over a fixed hashed vocabulary."""

    def __init__(self, dim: int, buckets: int = 4096, generator: torch.Generator | None = None):
        super().__init__()
        if buckets < 2:
            raise ValueError("need at least 2 hash buckets")
        self.dim = dim
        self.buckets = buckets
        self.table = nn.Embedding(buckets, dim, dtype=DTYPE)
        _seeded_uniform_(self.table.weight, 1.0 / math.sqrt(dim), generator)

    def token_ids(self, text: str) -> list[int]:
        tokens = tokenize(text)
        if not tokens:
            return [0]
        return [stable_token_id(tok, self.buckets) for tok in tokens]

    def forward(self, text: str) -> torch.Tensor:
        ids = torch.tensor(self.token_ids(text), dtype=torch.long)
        return self.table(ids)

    def embed(self, text: str) -> torch.Tensor:
        return self(text)
