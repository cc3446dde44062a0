"""Timeline arithmetic for evidence masking: span extension, complements, frame sampling."""
from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "SpanError",
    "EvidenceSpan",
    "extend_span",
    "merge_spans",
    "visible_timeline",
    "timeline_length",
    "sample_frames",
]


class SpanError(ValueError):
    """Raised for malformed spans or spans that escape their video timeline."""


@dataclass(frozen=True, order=True)
class EvidenceSpan:
    """Closed interval of video time in seconds."""

    start: float
    end: float

    def __post_init__(self):
        if not (0.0 <= self.start < self.end):
            raise SpanError(f"invalid span [{self.start}, {self.end}]: need 0 <= start < end")

    @property
    def length(self) -> float:
        return self.end - self.start

    def overlaps(self, other: "EvidenceSpan") -> bool:
        """Strict interior overlap; touching endpoints do not count."""
        return self.start < other.end and other.start < self.end

    def to_pair(self) -> list[float]:
        return [self.start, self.end]

    @classmethod
    def from_pair(cls, pair) -> "EvidenceSpan":
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise SpanError(f"span must be a [start, end] pair, got {pair!r}")
        return cls(float(pair[0]), float(pair[1]))


def _check_within(span: EvidenceSpan, duration: float) -> None:
    if span.end > duration:
        raise SpanError(f"span [{span.start}, {span.end}] exceeds video duration {duration}")


def extend_span(span: EvidenceSpan, duration: float, sigma: float) -> EvidenceSpan:
    """Widen an evidence span by duration/sigma on each side, clamped to [0, duration]."""
    if sigma <= 0:
        raise SpanError(f"sigma must be positive, got {sigma}")
    if duration <= 0:
        raise SpanError(f"duration must be positive, got {duration}")
    _check_within(span, duration)
    pad = duration / sigma
    return EvidenceSpan(max(0.0, span.start - pad), min(duration, span.end + pad))


def merge_spans(spans: list[EvidenceSpan]) -> list[EvidenceSpan]:
    """Union of spans as a sorted list of disjoint spans (touching spans merge)."""
    if not spans:
        return []
    ordered = sorted(spans)
    merged = [ordered[0]]
    for span in ordered[1:]:
        last = merged[-1]
        if span.start <= last.end:
            if span.end > last.end:
                merged[-1] = EvidenceSpan(last.start, span.end)
        else:
            merged.append(span)
    return merged


def visible_timeline(duration: float, excluded: list[EvidenceSpan]) -> list[tuple[float, float]]:
    """Complement of the excluded-span union within [0, duration].

    Returns sorted, disjoint, non-empty (start, end) intervals.
    """
    if duration <= 0:
        raise SpanError(f"duration must be positive, got {duration}")
    for span in excluded:
        _check_within(span, duration)
    visible = []
    cursor = 0.0
    for span in merge_spans(excluded):
        if span.start > cursor:
            visible.append((cursor, span.start))
        cursor = max(cursor, span.end)
    if cursor < duration:
        visible.append((cursor, duration))
    return visible


def timeline_length(intervals: list[tuple[float, float]]) -> float:
    return sum(end - start for start, end in intervals)


def sample_frames(visible: list[tuple[float, float]], k: int) -> list[float]:
    """Place k timestamps uniformly over the visible timeline.

    Concatenates the visible intervals into one coordinate of length L, samples
    the k bin midpoints (2i+1)*L/(2k), and maps each back to video time. Every
    returned timestamp is strictly inside a visible interval.
    """
    if k < 1:
        raise SpanError(f"frame count must be >= 1, got {k}")
    total = timeline_length(visible)
    if total <= 0:
        raise SpanError("fully masked video: no visible timeline to sample")
    timestamps = []
    for i in range(k):
        pos = (2 * i + 1) * total / (2 * k)
        cursor = 0.0
        for start, end in visible:
            length = end - start
            if pos < cursor + length or (start, end) == visible[-1]:
                offset = pos - cursor
                # guard exact landings on interval joints so samples stay interior
                offset = min(max(offset, length * 1e-12), length * (1 - 1e-12))
                timestamps.append(start + offset)
                break
            cursor += length
    return timestamps
