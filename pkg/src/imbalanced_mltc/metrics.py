"""Multi-label evaluation: hamming loss, subset accuracy, example-based
accuracy and micro-averaged precision/recall/F1, plus per-label accuracy
and accuracy-margin reports.

Hamming loss is normalized by ``N * Q`` (the fraction of mispredicted
instance-label pairs).  Zero-denominator conventions:

* example-based accuracy scores an instance with empty predicted and gold
  sets as 1;
* if there are no true positives, false positives or false negatives at
  all, micro precision, recall and F1 are all 1; otherwise an undefined
  ratio is 0, and F1 is 0 when precision + recall is 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvariantViolation


def _membership(sets: Sequence[Iterable[int]], q: int) -> np.ndarray:
    M = np.zeros((len(sets), q), dtype=bool)
    for i, s in enumerate(sets):
        s = list(s)
        if s:
            M[i, s] = True
    return M


def _check(preds, golds):
    if len(preds) != len(golds):
        raise ValueError(f"{len(preds)} predictions for {len(golds)} gold label sets")
    if len(golds) == 0:
        raise ValueError("metrics need at least one instance")


def hamming_loss(preds, golds, Q: int) -> float:
    _check(preds, golds)
    P, G = _membership(preds, Q), _membership(golds, Q)
    return int((P != G).sum()) / (len(golds) * Q)


def subset_accuracy(preds, golds) -> float:
    _check(preds, golds)
    return sum(frozenset(p) == frozenset(g) for p, g in zip(preds, golds)) / len(golds)


def example_based_accuracy(preds, golds) -> float:
    _check(preds, golds)
    total = 0.0
    for p, g in zip(preds, golds):
        p, g = frozenset(p), frozenset(g)
        union = len(p | g)
        total += 1.0 if union == 0 else len(p & g) / union
    return total / len(golds)


@dataclass(frozen=True)
class ConfusionTotals:
    tp: int
    fp: int
    fn: int


def confusion_totals(preds, golds, Q: int) -> ConfusionTotals:
    P, G = _membership(preds, Q), _membership(golds, Q)
    return ConfusionTotals(int((P & G).sum()), int((P & ~G).sum()), int((~P & G).sum()))


def micro_from_totals(t: ConfusionTotals) -> tuple[float, float, float]:
    if t.tp == t.fp == t.fn == 0:
        return 1.0, 1.0, 1.0
    precision = t.tp / (t.tp + t.fp) if t.tp + t.fp else 0.0
    recall = t.tp / (t.tp + t.fn) if t.tp + t.fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def micro_scores(preds, golds, Q: int) -> tuple[float, float, float, ConfusionTotals]:
    _check(preds, golds)
    totals = confusion_totals(preds, golds, Q)
    return (*micro_from_totals(totals), totals)


def per_label_accuracy(preds, golds, Q: int) -> list[float]:
    _check(preds, golds)
    P, G = _membership(preds, Q), _membership(golds, Q)
    return ((P == G).sum(axis=0) / len(golds)).tolist()


@dataclass(frozen=True)
class EvaluationReport:
    hamming_loss: float
    subset_accuracy: float
    example_accuracy: float
    micro_precision: float
    micro_recall: float
    micro_f1: float
    per_label_accuracy: tuple[float, ...]
    per_label_correct: tuple[int, ...]   # N * per_label_accuracy, exact
    totals: ConfusionTotals
    N: int
    Q: int

    @property
    def mismatched_pairs(self) -> int:
        return self.N * self.Q - sum(self.per_label_correct)

    def metric(self, name: str) -> float:
        return getattr(self, name)

    def check_identity(self) -> None:
        """mean(per-label accuracy) == 1 - hamming loss, on exact pair counts."""
        mismatches = round(self.hamming_loss * self.N * self.Q)
        if sum(self.per_label_correct) != self.N * self.Q - mismatches:
            raise InvariantViolation("per-label accuracies disagree with hamming loss")
        if abs(float(np.mean(self.per_label_accuracy)) - (1.0 - self.hamming_loss)) > 1e-12:
            raise InvariantViolation("mean per-label accuracy != 1 - hamming loss")


def evaluate(preds, golds, Q: int) -> EvaluationReport:
    _check(preds, golds)
    n = len(golds)
    P, G = _membership(preds, Q), _membership(golds, Q)
    correct = (P == G).sum(axis=0)
    totals = ConfusionTotals(int((P & G).sum()), int((P & ~G).sum()), int((~P & G).sum()))
    precision, recall, f1 = micro_from_totals(totals)
    report = EvaluationReport(
        hamming_loss=int((P != G).sum()) / (n * Q),
        subset_accuracy=float(np.all(P == G, axis=1).sum()) / n,
        example_accuracy=example_based_accuracy(preds, golds),
        micro_precision=precision,
        micro_recall=recall,
        micro_f1=f1,
        per_label_accuracy=tuple(float(c) / n for c in correct),
        per_label_correct=tuple(int(c) for c in correct),
        totals=totals,
        N=n,
        Q=Q,
    )
    report.check_identity()
    return report


@dataclass(frozen=True)
class MarginRow:
    label_id: int
    training_count: int
    baseline_accuracy: float
    approach_accuracy: float
    margin: float


@dataclass(frozen=True)
class MarginReport:
    rows: tuple[MarginRow, ...]

    @property
    def margins(self) -> list[float]:
        return [r.margin for r in self.rows]

    def mean_margin(self) -> float:
        return float(np.mean(self.margins))


def accuracy_margin(
    baseline: EvaluationReport, approach: EvaluationReport, training_counts: Sequence[int]
) -> MarginReport:
    """Per-label accuracy gain of ``approach`` over ``baseline``.

    Rows are ordered by ascending training frequency, then label id.
    """
    q = baseline.Q
    if approach.Q != q or len(training_counts) != q:
        raise ValueError("reports and training counts must cover the same labels")
    order = sorted(range(q), key=lambda l: (training_counts[l], l))
    rows = tuple(
        MarginRow(
            l,
            int(training_counts[l]),
            baseline.per_label_accuracy[l],
            approach.per_label_accuracy[l],
            approach.per_label_accuracy[l] - baseline.per_label_accuracy[l],
        )
        for l in order
    )
    report = MarginReport(rows)
    expected = float(np.mean(approach.per_label_accuracy)) - float(np.mean(baseline.per_label_accuracy))
    if abs(report.mean_margin() - expected) > 1e-12:
        raise InvariantViolation("mean margin differs from the difference of mean accuracies")
    return report


METRICS = ("hamming_loss", "subset_accuracy", "example_accuracy", "micro_f1")
LOWER_IS_BETTER = frozenset({"hamming_loss"})
