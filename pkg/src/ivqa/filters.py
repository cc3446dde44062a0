"""Automated exclusion filters for dataset cleaning.

The temporal-answer pattern list is versioned here; extend it deliberately,
existing datasets were built against it.
"""
from __future__ import annotations

import re

from .items import IVQAItem
from .spans import EvidenceSpan

__all__ = [
    "TEMPORAL_ANSWER_PATTERNS",
    "filter_temporal_answer",
    "filter_wh_insufficient",
    "check_clue_eligibility",
]

_UNIT = r"(?:s|secs?|seconds?|mins?|minutes?)"

TEMPORAL_ANSWER_PATTERNS = (
    # clock forms: 0:15, 00:15, 1:02:03
    re.compile(r"\b\d{1,2}:\d{2}(?::\d{2})?\b"),
    # "at 15 seconds", "from 12s", "to 20 min"
    re.compile(rf"\b(?:at|from|to)\s+\d+(?:\.\d+)?\s*{_UNIT}\b", re.IGNORECASE),
)

_WH_INSUFFICIENT = re.compile(r"^\s*(?:when|where)\b", re.IGNORECASE)


def filter_temporal_answer(item: IVQAItem) -> bool:
    """True when the gold answer names a specific timestamp (item should be excluded)."""
    answer = item.answer_text
    if not answer:
        return False
    return any(pattern.search(answer) for pattern in TEMPORAL_ANSWER_PATTERNS)


def filter_wh_insufficient(item: IVQAItem) -> bool:
    """True when the question opens with 'when' or 'where' (item should be excluded)."""
    return bool(_WH_INSUFFICIENT.match(item.question))


def check_clue_eligibility(context_span: EvidenceSpan, excluded: list[EvidenceSpan]) -> bool:
    """True when the context span touches no excluded span (shared endpoints allowed)."""
    return not any(context_span.overlaps(span) for span in excluded)
