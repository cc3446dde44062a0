"""Dataset statistics: histograms over durations, masking ratios, questions, and clues."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .items import IVQAItem, ValidationError
from .spans import merge_spans

__all__ = ["DatasetStats", "compute_statistics", "render_histograms"]

DURATION_BIN_SECONDS = 30.0


@dataclass
class DatasetStats:
    item_count: int
    duration_histogram: dict[str, int]
    evidence_ratio_histogram: dict[str, int]
    question_first_word_histogram: dict[str, int]
    clues_per_item_histogram: dict[int, int]
    relation_positive_fraction: float

    def to_dict(self) -> dict:
        return {
            "item_count": self.item_count,
            "duration_histogram": dict(self.duration_histogram),
            "evidence_ratio_histogram": dict(self.evidence_ratio_histogram),
            "question_first_word_histogram": dict(self.question_first_word_histogram),
            "clues_per_item_histogram": {str(k): v for k, v in self.clues_per_item_histogram.items()},
            "relation_positive_fraction": self.relation_positive_fraction,
        }


def _duration_bucket(duration: float) -> str:
    lo = int(duration // DURATION_BIN_SECONDS) * int(DURATION_BIN_SECONDS)
    return f"{lo}-{lo + int(DURATION_BIN_SECONDS)}s"

def _ratio_bucket(ratio: float) -> str:
    ratio = min(max(ratio, 0.0), 1.0)
    return f"{min(int(ratio * 10), 10) / 10:.1f}"


def _first_word(question: str) -> str:
    words = question.strip().split()
    return words[0].strip("?,.!").title() if words else ""


def compute_statistics(items: list[IVQAItem]) -> DatasetStats:
    if not items:
        raise ValidationError("cannot compute statistics of an empty dataset")
    durations = Counter()
    ratios = Counter()
    first_words = Counter()
    clues_per_item = Counter()
    positive = 0
    total_clues = 0
    for item in items:
        durations[_duration_bucket(item.duration)] += 1
        excluded_total = sum(s.length for s in merge_spans(item.excluded_spans))
        ratios[_ratio_bucket(excluded_total / item.duration)] += 1
        first_words[_first_word(item.question)] += 1
        clues_per_item[len(item.clues)] += 1
        total_clues += len(item.clues)
        positive += sum(1 for c in item.clues if c.relation_label == 1)
    return DatasetStats(
        item_count=len(items),
        duration_histogram=dict(sorted(durations.items())),
        evidence_ratio_histogram=dict(sorted(ratios.items())),
        question_first_word_histogram=dict(first_words.most_common()),
        clues_per_item_histogram=dict(sorted(clues_per_item.items())),
        relation_positive_fraction=(positive / total_clues) if total_clues else 0.0,
    )


def render_histograms(stats: DatasetStats, out_dir: str) -> list[str]:
    """Render each histogram as a PNG bar chart. Requires matplotlib."""
    import os

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(out_dir, exist_ok=True)
    charts = {
        "duration_histogram": stats.duration_histogram,
        "evidence_ratio_histogram": stats.evidence_ratio_histogram,
        "question_first_word_histogram": stats.question_first_word_histogram,
        "clues_per_item_histogram": {str(k): v for k, v in stats.clues_per_item_histogram.items()},
    }
    written = []
    for name, histogram in charts.items():
        fig, ax = plt.subplots(figsize=(6, 3.5))
        keys = list(histogram)
        ax.bar(range(len(keys)), [histogram[k] for k in keys])
        ax.set_xticks(range(len(keys)))
        ax.set_xticklabels(keys, rotation=45, ha="right")
        ax.set_title(name.replace("_", " "))
        fig.tight_layout()
        path = os.path.join(out_dir, f"{name}.png")
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written
