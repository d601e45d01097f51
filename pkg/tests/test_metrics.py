from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from imbalanced_mltc.errors import InvariantViolation
from imbalanced_mltc.metrics import (
    EvaluationReport,
    accuracy_margin,
    evaluate,
    example_based_accuracy,
    hamming_loss,
    micro_scores,
    per_label_accuracy,
    subset_accuracy,
)

import oracles

PREDS = [{0, 1}, {2}]
GOLDS = [{0}, {1, 2}]


def test_worked_example():
    assert hamming_loss(PREDS, GOLDS, 3) == pytest.approx(1 / 3, abs=0)
    assert subset_accuracy(PREDS, GOLDS) == 0.0
    assert example_based_accuracy(PREDS, GOLDS) == 0.5
    p, r, f1, totals = micro_scores(PREDS, GOLDS, 3)
    assert (totals.tp, totals.fp, totals.fn) == (2, 1, 1)
    assert p == r == f1 == 2 / 3


def test_perfect_prediction():
    report = evaluate([{0}, {1}], [{0}, {1}], 2)
    assert report.hamming_loss == 0.0
    assert report.subset_accuracy == report.example_accuracy == report.micro_f1 == 1.0


def test_empty_sets_everywhere():
    report = evaluate([set(), set()], [set(), set()], 2)
    assert report.example_accuracy == 1.0
    assert report.micro_precision == report.micro_recall == report.micro_f1 == 1.0


def test_empty_predictions_against_gold():
    p, r, f1, _ = micro_scores([set()], [{0}], 2)
    assert (p, r, f1) == (0.0, 0.0, 0.0)


def test_per_label_accuracy():
    assert per_label_accuracy(PREDS, GOLDS, 3) == [1.0, 0.0, 1.0]


def test_length_mismatch_and_empty_input():
    with pytest.raises(ValueError):
        evaluate([{0}], [{0}, {1}], 2)
    with pytest.raises(ValueError):
        evaluate([], [], 2)


labelsets = st.frozensets(st.integers(0, 3), max_size=4)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(labelsets, labelsets), min_size=1, max_size=8))
def test_against_fraction_oracle(pairs):
    preds = [p for p, _ in pairs]
    golds = [g for _, g in pairs]
    q = 4
    r = evaluate(preds, golds, q)
    assert r.hamming_loss == float(oracles.hamming(preds, golds, q))
    assert r.subset_accuracy == float(oracles.subset(preds, golds))
    assert abs(r.example_accuracy - float(oracles.example_accuracy(preds, golds))) <= 1e-12
    for got, want in zip((r.micro_precision, r.micro_recall, r.micro_f1), oracles.micro(preds, golds)):
        assert abs(got - float(want)) <= 1e-12
    mean = sum(oracles.label_accuracy(preds, golds, l) for l in range(q)) / q
    assert mean == 1 - oracles.hamming(preds, golds, q)
    assert Fraction(sum(r.per_label_correct), r.N * r.Q) == 1 - Fraction(r.mismatched_pairs, r.N * r.Q)


def test_identity_check_catches_corruption():
    good = evaluate(PREDS, GOLDS, 3)
    bad = EvaluationReport(**{**good.__dict__, "per_label_correct": (2, 2, 2), "per_label_accuracy": (1.0, 1.0, 1.0)})
    with pytest.raises(InvariantViolation):
        bad.check_identity()


def test_margin_identical_reports():
    r = evaluate(PREDS, GOLDS, 3)
    m = accuracy_margin(r, r, [3, 1, 2])
    assert m.margins == [0.0, 0.0, 0.0]


def test_margin_all_ones_against_all_zeros():
    golds = [{0, 1}, {1}]
    worst = evaluate([{2}, {0, 2}], golds, 3)
    best = evaluate(golds, golds, 3)
    assert accuracy_margin(worst, best, [1, 1, 1]).margins == [1.0, 1.0, 1.0]


def test_margin_sorted_by_training_count_then_id():
    r = evaluate(PREDS, GOLDS, 3)
    m = accuracy_margin(r, r, [1, 5, 2])
    assert [row.label_id for row in m.rows] == [0, 2, 1]
    m = accuracy_margin(r, r, [2, 2, 1])
    assert [row.label_id for row in m.rows] == [2, 0, 1]


def test_margin_mean_identity():
    base = evaluate([{0}, {1}, set()], [{0, 1}, {1}, {2}], 3)
    other = evaluate([{0, 1}, set(), {2}], [{0, 1}, {1}, {2}], 3)
    m = accuracy_margin(base, other, [4, 1, 9])
    diff = sum(other.per_label_accuracy) / 3 - sum(base.per_label_accuracy) / 3
    assert abs(m.mean_margin() - diff) <= 1e-12
    assert all(-1 <= x <= 1 for x in m.margins)


def test_margin_rejects_mismatched_label_counts():
    r = evaluate(PREDS, GOLDS, 3)
    with pytest.raises(ValueError):
        accuracy_margin(r, r, [1, 2])
