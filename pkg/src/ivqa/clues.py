"""Dual action-intent clue processing.

Clue candidates are embedded into paired token banks, verified against global
visual features via cross-attention, scored for relevance to the question by
an attention classifier, and filtered down to the clues whose relevance score
beats their irrelevance score.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import torch
from torch import nn

from .nn.blocks import (
    DTYPE,
    AttentionBlock,
    EmbeddingSeq,
    TextEmbedder,
    init_linear_,
    mean_pool_segments,
)

__all__ = [
    "ClueCandidate",
    "ClueBank",
    "RelationLogits",
    "embed_clues",
    "hallucination_verify",
    "RelationClassifier",
    "relation_classify",
    "refine_clues",
    "dump_bank",
]

# relevance scores live in column 0, irrelevance in column 1
RELEVANT_COL = 0
IRRELEVANT_COL = 1


@dataclass(frozen=True)
class ClueCandidate:
    """An observed context action paired with its shallow intention."""

    action: str
    intent: str

    def __post_init__(self):
        if not self.action or not self.action.strip():
            raise ValueError("clue action must be non-empty")
        if not self.intent or not self.intent.strip():
            raise ValueError("clue intent must be non-empty")


@dataclass
class ClueBank:
    """Embedded clue set: concatenated action and intent tokens with per-clue segments."""

    candidates: list[ClueCandidate]
    actions: EmbeddingSeq
    intents: EmbeddingSeq

    def __post_init__(self):
        n = len(self.candidates)
        if len(self.actions.boundaries or []) != n or len(self.intents.boundaries or []) != n:
            if n != 0:
                raise ValueError("clue bank boundaries must align with candidates")

    @property
    def n_clues(self) -> int:
        return len(self.candidates)


@dataclass
class RelationLogits:
    """Per-clue two-class scores; higher column-0 means the clue helps the question."""

    scores: torch.Tensor

    def __post_init__(self):
        if self.scores.dim() != 2 or self.scores.shape[1] != 2:
            raise ValueError(f"relation scores must be [n_clues, 2], got {tuple(self.scores.shape)}")

    @property
    def n_clues(self) -> int:
        return self.scores.shape[0]


def embed_clues(clues: Sequence[ClueCandidate], embedder: TextEmbedder) -> ClueBank:
    """Embed and concatenate clue texts along the token axis, recording segments."""
    action_parts, intent_parts = [], []
    action_bounds, intent_bounds = [], []
    a_off = i_off = 0
    for clue in clues:
        act = embedder.embed(clue.action)
        intent = embedder.embed(clue.intent)
        action_parts.append(act)
        intent_parts.append(intent)
        action_bounds.append((a_off, a_off + act.shape[0]))
        intent_bounds.append((i_off, i_off + intent.shape[0]))
        a_off += act.shape[0]
        i_off += intent.shape[0]
    dim = embedder.dim
    actions = torch.cat(action_parts) if action_parts else torch.zeros((0, dim), dtype=DTYPE)
    intents = torch.cat(intent_parts) if intent_parts else torch.zeros((0, dim), dtype=DTYPE)
    return ClueBank(
        candidates=list(clues),
        actions=EmbeddingSeq(actions, action_bounds),
        intents=EmbeddingSeq(intents, intent_bounds),
    )


def hallucination_verify(bank: ClueBank, visual_global: EmbeddingSeq | torch.Tensor,
                         block: AttentionBlock) -> EmbeddingSeq:
    """Query each action token against global visual features.

    Output rows align with the bank's action tokens and keep their per-clue
    segments, so downstream pooling stays clue-addressable.
    """
    visual = visual_global.data if isinstance(visual_global, EmbeddingSeq) else visual_global
    if bank.n_clues == 0:
        return EmbeddingSeq(bank.actions.data, [])
    return EmbeddingSeq(block(bank.actions.data, visual), list(bank.actions.boundaries))


class RelationClassifier(nn.Module):
    """Scores each clue's relevance to the question.

    Intent tokens (plus the question) attend over the visually verified action
    tokens (plus the question) and over themselves; the two attention outputs
    are concatenated feature-wise, mean-pooled per clue, and mapped to two
    logits by a linear head.
    """

    def __init__(self, d_model: int, head_count: int = 4,
                 generator: torch.Generator | None = None):
        super().__init__()
        self.cross_block = AttentionBlock(d_model, head_count, generator=generator)
        self.self_block = AttentionBlock(d_model, head_count, generator=generator)
        self.head = nn.Linear(2 * d_model, 2, dtype=DTYPE)
        init_linear_(self.head, generator)

    def forward(self, bank: ClueBank, verified: EmbeddingSeq,
                question_emb: torch.Tensor) -> RelationLogits:
        if bank.n_clues == 0:
            return RelationLogits(torch.zeros((0, 2), dtype=DTYPE))
        intents_q = torch.cat([bank.intents.data, question_emb])
        verified_q = torch.cat([verified.data, question_emb])
        cross_out = self.cross_block(intents_q, verified_q)
        self_out = self.self_block(intents_q)
        n_intent = bank.intents.n_tokens
        feats = torch.cat([cross_out[:n_intent], self_out[:n_intent]], dim=-1)
        pooled = mean_pool_segments(EmbeddingSeq(feats, list(bank.intents.boundaries)))
        return RelationLogits(self.head(pooled))


def relation_classify(bank: ClueBank, verified: EmbeddingSeq, question_emb: torch.Tensor,
                      classifier: RelationClassifier) -> RelationLogits:
    return classifier(bank, verified, question_emb)


def refine_clues(bank: ClueBank, logits: RelationLogits) -> ClueBank:
    """Keep clues whose relevance score is at least their irrelevance score.

    Ties keep the clue. If nothing qualifies, the single clue with the best
    relevance margin is kept, so a non-empty bank never refines to empty.
    """
    if logits.n_clues != bank.n_clues:
        raise ValueError(f"logits rows ({logits.n_clues}) != bank clues ({bank.n_clues})")
    if bank.n_clues == 0:
        return bank
    scores = logits.scores
    keep = [i for i in range(bank.n_clues)
            if scores[i, RELEVANT_COL] >= scores[i, IRRELEVANT_COL]]
    if not keep:
        margins = scores[:, RELEVANT_COL] - scores[:, IRRELEVANT_COL]
        keep = [int(torch.argmax(margins))]
    return _select(bank, keep)


def _select(bank: ClueBank, indices: list[int]) -> ClueBank:
    def slice_seq(seq: EmbeddingSeq) -> EmbeddingSeq:
        parts, bounds, offset = [], [], 0
        for i in indices:
            a, b = seq.boundaries[i]
            parts.append(seq.data[a:b])
            bounds.append((offset, offset + (b - a)))
            offset += b - a
        data = torch.cat(parts) if parts else seq.data[:0]
        return EmbeddingSeq(data, bounds)

    return ClueBank(
        candidates=[bank.candidates[i] for i in indices],
        actions=slice_seq(bank.actions),
        intents=slice_seq(bank.intents),
    )


def dump_bank(bank: ClueBank, logits: RelationLogits, refined: ClueBank) -> list[dict]:
    """Debug view: per-clue text, scores, and whether refinement kept it."""
    kept = set(id(c) for c in refined.candidates)
    rows = []
    for i, clue in enumerate(bank.candidates):
        rows.append({
            "index": i,
            "action": clue.action,
            "intent": clue.intent,
            "relevant_score": float(logits.scores[i, RELEVANT_COL]),
            "irrelevant_score": float(logits.scores[i, IRRELEVANT_COL]),
            "kept": id(clue) in kept,
        })
    return rows
