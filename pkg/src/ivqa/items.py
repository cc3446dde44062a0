"""Task items for implicit video QA: schema, validation, JSONL persistence, source adapters."""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field

from .spans import EvidenceSpan, SpanError

__all__ = [
    "ValidationError",
    "ClueAnnotation",
    "IVQAItem",
    "read_items",
    "write_items",
    "GroundedRecord",
    "read_grounded_records",
    "atomic_write_text",
]


class ValidationError(ValueError):
    """Raised when an item or record violates the dataset schema."""


@dataclass
class ClueAnnotation:
    """An action-intent context clue tied to a video span and a relevance label."""

    action: str
    intent: str
    source_span: EvidenceSpan
    relation_label: int
    noisy: bool = False

    def validate(self) -> None:
        if not self.action or not self.action.strip():
            raise ValidationError("clue action must be non-empty")
        if not self.intent or not self.intent.strip():
            raise ValidationError("clue intent must be non-empty")
        if self.relation_label not in (0, 1):
            raise ValidationError(f"relation_label must be 0 or 1, got {self.relation_label!r}")

    def to_dict(self) -> dict:
        out = {
            "action": self.action,
            "intent": self.intent,
            "source_span": self.source_span.to_pair(),
            "relation_label": self.relation_label,
        }
        if self.noisy:
            out["noisy"] = True
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ClueAnnotation":
        if not isinstance(data, dict):
            raise ValidationError(f"clue must be an object, got {type(data).__name__}")
        missing = {"action", "intent", "source_span", "relation_label"} - set(data)
        if missing:
            raise ValidationError(f"clue missing fields: {sorted(missing)}")
        clue = cls(
            action=str(data["action"]),
            intent=str(data["intent"]),
            source_span=EvidenceSpan.from_pair(data["source_span"]),
            relation_label=int(data["relation_label"]),
            noisy=bool(data.get("noisy", False)),
        )
        clue.validate()
        return clue


@dataclass
class IVQAItem:
    """One implicit-VQA task instance over a video with masked evidence spans."""

    video_id: str
    duration: float
    excluded_spans: list[EvidenceSpan]
    question: str
    options: list[str]
    answer_index: int | None
    clues: list[ClueAnnotation] = field(default_factory=list)
    open_ended_eligible: bool = False

    @property
    def answer_text(self) -> str | None:
        """Gold answer text, when recoverable from the option list."""
        if self.answer_index is not None and self.options:
            return self.options[self.answer_index]
        return None

    def validate(self) -> None:
        if not self.video_id:
            raise ValidationError("video_id must be non-empty")
        if self.duration <= 0:
            raise ValidationError(f"duration must be positive, got {self.duration}")
        if not self.question or not self.question.strip():
            raise ValidationError("question must be non-empty")
        if self.options and not (2 <= len(self.options) <= 5):
            raise ValidationError(f"options must have 2-5 entries (or none), got {len(self.options)}")
        if self.answer_index is not None:
            if not self.options:
                raise ValidationError("answer_index present but item has no options")
            if not (0 <= self.answer_index < len(self.options)):
                raise ValidationError(
                    f"answer_index {self.answer_index} out of range for {len(self.options)} options"
                )
        for span in self.excluded_spans:
            if span.end > self.duration:
                raise ValidationError(
                    f"excluded span [{span.start}, {span.end}] exceeds duration {self.duration}"
                )
        for clue in self.clues:
            clue.validate()
            if clue.source_span.end > self.duration:
                raise ValidationError(
                    f"clue span [{clue.source_span.start}, {clue.source_span.end}] "
                    f"exceeds duration {self.duration}"
                )
            for span in self.excluded_spans:
                if clue.source_span.overlaps(span):
                    raise ValidationError(
                        f"clue span [{clue.source_span.start}, {clue.source_span.end}] overlaps "
                        f"excluded span [{span.start}, {span.end}]"
                    )

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "duration": self.duration,
            "excluded_spans": [s.to_pair() for s in self.excluded_spans],
            "question": self.question,
            "options": list(self.options),
            "answer_index": self.answer_index,
            "clues": [c.to_dict() for c in self.clues],
            "open_ended_eligible": self.open_ended_eligible,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IVQAItem":
        if not isinstance(data, dict):
            raise ValidationError(f"item must be an object, got {type(data).__name__}")
        required = {"video_id", "duration", "excluded_spans", "question", "options",
                    "answer_index", "clues", "open_ended_eligible"}
        missing = required - set(data)
        if missing:
            raise ValidationError(f"item missing fields: {sorted(missing)}")
        unknown = set(data) - required
        if unknown:
            raise ValidationError(f"item has unknown fields: {sorted(unknown)}")
        try:
            spans = [EvidenceSpan.from_pair(p) for p in data["excluded_spans"]]
        except SpanError as err:
            raise ValidationError(str(err)) from err
        answer_index = data["answer_index"]
        item = cls(
            video_id=str(data["video_id"]),
            duration=float(data["duration"]),
            excluded_spans=spans,
            question=str(data["question"]),
            options=[str(o) for o in data["options"]],
            answer_index=None if answer_index is None else int(answer_index),
            clues=[ClueAnnotation.from_dict(c) for c in data["clues"]],
            open_ended_eligible=bool(data["open_ended_eligible"]),
        )
        item.validate()
        return item


def atomic_write_text(path: str, text: str) -> None:
    """Write text to path via a temp file and rename, so readers never see partial files."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_items(path: str, items: list[IVQAItem]) -> None:
    """Write items as line-delimited JSON, one item per line, full float precision."""
    lines = []
    for item in items:
        item.validate()
        lines.append(json.dumps(item.to_dict(), ensure_ascii=False))
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def read_items(path: str) -> list[IVQAItem]:
    """Read and schema-validate a line-delimited item file."""
    items = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                items.append(IVQAItem.from_dict(json.loads(line)))
            except json.JSONDecodeError as err:
                raise ValidationError(f"{path}:{lineno}: invalid JSON: {err}") from err
            except (ValidationError, SpanError) as err:
                raise ValidationError(f"{path}:{lineno}: {err}") from err
    return items


@dataclass
class GroundedRecord:
    """One grounded-VQA source annotation: a QA pair with its evidence spans.

    Unknown source fields are preserved in ``extra`` untouched.
    """

    video_id: str
    duration: float
    question: str
    answer: str
    options: list[str]
    answer_index: int | None
    spans: list[EvidenceSpan]
    extra: dict = field(default_factory=dict)


# maps our canonical field names to the key aliases seen in grounded-VQA layouts
DEFAULT_FIELD_ALIASES = {
    "video_id": ("video_id", "video", "vid", "video_name"),
    "duration": ("duration", "video_duration", "length"),
    "question": ("question", "q", "query"),
    "answer": ("answer", "a", "gold_answer"),
    "options": ("options", "choices", "answer_choices", "candidates"),
    "answer_index": ("answer_index", "answer_idx", "correct", "label"),
    "spans": ("spans", "segments", "evidence", "timestamps", "grounding"),
}


def _pick(data: dict, aliases: tuple[str, ...]):
    for key in aliases:
        if key in data:
            return key, data[key]
    return None, None


def read_grounded_records(path: str, field_aliases: dict | None = None) -> list[GroundedRecord]:
    """Read a grounded-VQA annotation file (JSONL) into normalized records."""
    aliases = dict(DEFAULT_FIELD_ALIASES)
    if field_aliases:
        aliases.update(field_aliases)
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as err:
                raise ValidationError(f"{path}:{lineno}: invalid JSON: {err}") from err
            try:
                records.append(_record_from_source(data, aliases))
            except (ValidationError, SpanError, KeyError, TypeError, ValueError) as err:
                raise ValidationError(f"{path}:{lineno}: {err}") from err
    return records


def _record_from_source(data: dict, aliases: dict) -> GroundedRecord:
    used_keys = set()
    picked = {}
    for name, keys in aliases.items():
        key, value = _pick(data, keys)
        if key is not None:
            used_keys.add(key)
        picked[name] = value
    for name in ("video_id", "duration", "question"):
        if picked[name] is None:
            raise ValidationError(f"source record missing required field '{name}'")
    raw_spans = picked["spans"] or []
    if raw_spans and isinstance(raw_spans[0], (int, float)):
        raw_spans = [raw_spans]  # single flat [start, end]
    spans = [EvidenceSpan.from_pair(p) for p in raw_spans]
    options = [str(o) for o in (picked["options"] or [])]
    answer_index = picked["answer_index"]
    answer = picked["answer"]
    if answer is None and answer_index is not None and options:
        answer = options[int(answer_index)]
    extra = {k: v for k, v in data.items() if k not in used_keys}
    return GroundedRecord(
        video_id=str(picked["video_id"]),
        duration=float(picked["duration"]),
        question=str(picked["question"]),
        answer="" if answer is None else str(answer),
        options=options,
        answer_index=None if answer_index is None else int(answer_index),
        spans=spans,
        extra=extra,
    )
