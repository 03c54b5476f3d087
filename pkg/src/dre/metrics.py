"""Accuracy, per-class precision/recall/F1, macro-F1, confusion matrix."""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["ClassMetrics", "Metrics", "compute_metrics"]


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class Metrics:
    accuracy: float
    macro_f1: float
    per_class: list[ClassMetrics]
    confusion: list[list[int]]  # confusion[true][pred]
    total: int

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "per_class": [
                {"precision": c.precision, "recall": c.recall, "f1": c.f1, "support": c.support}
                for c in self.per_class
            ],
            "confusion": self.confusion,
            "total": self.total,
        }


def compute_metrics(y_true, y_pred, n_classes: int) -> Metrics:
    """All counts kept as plain ints; ratios with zero denominators are 0.0."""
    y_true = list(y_true)
    y_pred = list(y_pred)
    if len(y_true) != len(y_pred):
        raise ValueError(f"length mismatch: {len(y_true)} labels vs {len(y_pred)} predictions")
    if not y_true:
        raise ValueError("compute_metrics: empty input")
    confusion = [[0] * n_classes for _ in range(n_classes)]
    for t, p in zip(y_true, y_pred):
        confusion[int(t)][int(p)] += 1
    total = len(y_true)
    correct = sum(confusion[c][c] for c in range(n_classes))
    per_class = []
    for c in range(n_classes):
        tp = confusion[c][c]
        pred_c = sum(confusion[t][c] for t in range(n_classes))
        true_c = sum(confusion[c])
        precision = tp / pred_c if pred_c else 0.0
        recall = tp / true_c if true_c else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class.append(ClassMetrics(precision, recall, f1, true_c))
    macro_f1 = sum(c.f1 for c in per_class) / n_classes
    return Metrics(correct / total, macro_f1, per_class, confusion, total)
