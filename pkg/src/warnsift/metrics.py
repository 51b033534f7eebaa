"""Precision, recall, and F1 for warning classification.

Per-class scores are plain fractions in [0, 1]; callers format them as
percentages only at report time.  The overall score weights classes by
inverse frequency, so the rare sensitive class is not drowned out by
the insensitive majority:

    w_c = (1 / n_c) / sum_k (1 / n_k)

Degenerate denominators (no predictions, no true instances, P + R = 0)
score 0.0.  A class with neither true nor predicted instances has no
meaningful score and maps to ``None``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from warnsift.dataset import INSENSITIVE, SENSITIVE

DEFAULT_CLASSES = (SENSITIVE, INSENSITIVE)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int  # true instances of the class
    predicted: int  # instances predicted as the class
    correct: int  # true positives


@dataclass(frozen=True)
class EvalMetrics:
    per_class: dict
    overall_precision: float
    overall_recall: float
    overall_f1: float
    accuracy: float
    total: int


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def _f1(precision: float, recall: float) -> float:
    return _safe_div(2.0 * precision * recall, precision + recall)


def inverse_frequency_weights(counts: Sequence[int]) -> list[float]:
    """Normalized inverse-frequency weights; all counts must be positive."""
    if any(c <= 0 for c in counts):
        raise ValueError("class counts must be positive")
    inverse = [1.0 / c for c in counts]
    total = sum(inverse)
    return [x / total for x in inverse]


def overall_from_per_class(values_and_counts: Sequence[tuple[float, int]]) -> float:
    """Inverse-frequency weighted combination of per-class scores.

    Takes (score, class size) pairs; works for precision, recall, or F1
    alike since the weighting depends only on the class sizes.
    """
    counts = [n for _, n in values_and_counts]
    weights = inverse_frequency_weights(counts)
    return sum(w * v for w, (v, _) in zip(weights, values_and_counts))


def compute_metrics(
    true_labels: Sequence[str],
    predicted_labels: Sequence[str],
    classes: Sequence[str] = DEFAULT_CLASSES,
) -> EvalMetrics:
    if len(true_labels) != len(predicted_labels):
        raise ValueError("label sequences differ in length")
    per_class: dict = {}
    for cls in classes:
        support = sum(1 for t in true_labels if t == cls)
        predicted = sum(1 for p in predicted_labels if p == cls)
        if support == 0 and predicted == 0:
            per_class[cls] = None
            continue
        correct = sum(1 for t, p in zip(true_labels, predicted_labels) if t == p == cls)
        precision = _safe_div(correct, predicted)
        recall = _safe_div(correct, support)
        per_class[cls] = ClassMetrics(
            precision=precision,
            recall=recall,
            f1=_f1(precision, recall),
            support=support,
            predicted=predicted,
            correct=correct,
        )

    present = [
        (cls, per_class[cls])
        for cls in classes
        if per_class[cls] is not None and per_class[cls].support > 0
    ]
    if present:
        pairs = lambda attr: [(getattr(m, attr), m.support) for _, m in present]
        overall_p = overall_from_per_class(pairs("precision"))
        overall_r = overall_from_per_class(pairs("recall"))
        overall_f = overall_from_per_class(pairs("f1"))
    else:
        overall_p = overall_r = overall_f = 0.0

    total = len(true_labels)
    agreed = sum(1 for t, p in zip(true_labels, predicted_labels) if t == p)
    return EvalMetrics(
        per_class=per_class,
        overall_precision=overall_p,
        overall_recall=overall_r,
        overall_f1=overall_f,
        accuracy=_safe_div(agreed, total),
        total=total,
    )


def percent(fraction: float) -> str:
    """Two-decimal percentage string for report output."""
    return f"{100.0 * fraction:.2f}"


__all__ = [
    "ClassMetrics",
    "DEFAULT_CLASSES",
    "EvalMetrics",
    "compute_metrics",
    "inverse_frequency_weights",
    "overall_from_per_class",
    "percent",
]
