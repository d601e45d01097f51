"""Acceptance suite: ten end-to-end criteria, each reported as one line.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
The summary block at the end of the pytest run lists PASS/FAIL per criterion.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse as sp

import conftest
import oracles
from imbalanced_mltc.corpus import (
    LAPOR_TOTAL_INSTANCES,
    LabelSpace,
    MultiLabelDataset,
    generate_synthetic,
    label_distribution,
    lapor_profile,
)
from imbalanced_mltc.harness import (
    ALGORITHMS,
    CorpusSource,
    ExperimentConfig,
    load_model,
    run_experiment,
    save_model,
    write_reports,
)
from imbalanced_mltc.harness import experiment as experiment_module
from imbalanced_mltc.metrics import evaluate
from imbalanced_mltc.multilabel import (
    boost_alpha,
    boost_normalizer,
    train_adaboost_mh,
    train_bagging,
    train_br,
    train_lp,
)
from imbalanced_mltc.preprocess import PipelineConfig, information_gain_scores
from imbalanced_mltc.weak_learners import (
    KINDS,
    WeakSpec,
    WeightedBinaryDataset,
    derive_seed,
    train,
    train_smo,
)
from imbalanced_mltc.metrics import hamming_loss, subset_accuracy


def record(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _random_sets(rng, n, q):
    return [frozenset(int(l) for l in np.flatnonzero(rng.random(q) < rng.random())) for _ in range(n)]


def test_criterion_01_metric_oracle_suite():
    rng = np.random.default_rng(2024)
    cases, worst = 10_000, 0.0
    start = time.perf_counter()
    for _ in range(cases):
        n, q = int(rng.integers(1, 9)), int(rng.integers(1, 5))
        preds, golds = _random_sets(rng, n, q), _random_sets(rng, n, q)
        r = evaluate(preds, golds, q)
        want = (
            oracles.hamming(preds, golds, q),
            oracles.subset(preds, golds),
            oracles.example_accuracy(preds, golds),
            *oracles.micro(preds, golds),
        )
        got = (r.hamming_loss, r.subset_accuracy, r.example_accuracy, r.micro_precision, r.micro_recall, r.micro_f1)
        worst = max(worst, max(abs(g - float(w)) for g, w in zip(got, want)))
    elapsed = time.perf_counter() - start
    record(1, worst <= 1e-12 and elapsed < 10, f"{cases} random cases, max deviation {worst:.1e}, {elapsed:.2f}s")


def test_criterion_02_metric_hand_case():
    r = evaluate([{0, 1}, {2}], [{0}, {1, 2}], 3)
    ok = (
        r.hamming_loss == 1 / 3
        and r.subset_accuracy == 0.0
        and r.example_accuracy == 0.5
        and r.micro_precision == r.micro_recall == r.micro_f1 == 2 / 3
    )
    record(2, ok, f"hamming={r.hamming_loss:.6f} subset={r.subset_accuracy} example={r.example_accuracy} "
                  f"P=R=F1={r.micro_f1:.6f}")


def _separable_points(rng, n=20, d=3):
    normal = rng.normal(size=d)
    normal /= np.linalg.norm(normal)
    X = []
    while len(X) < n:
        x = rng.uniform(-1, 1, size=d)
        if abs(x @ normal) >= 0.1:
            X.append(x)
    X = np.array(X)
    y = np.where(X @ normal > 0, 1, -1)
    if len(set(y)) < 2:
        X[0], y[0] = -X[0], -y[0]
    return X, y


def test_criterion_03_smo_closed_form_and_kkt():
    start = time.perf_counter()
    two = WeightedBinaryDataset(sp.csr_matrix(np.array([[1.0, 0.0], [-1.0, 0.0]])), np.array([1, -1]), np.full(2, 0.5))
    m = train_smo(two, C=1000.0)
    closed = (
        np.allclose(m.alpha, [0.5, 0.5], atol=1e-6, rtol=0)
        and np.allclose(m.w, [1.0, 0.0], atol=1e-6, rtol=0)
        and abs(m.b) <= 1e-6
    )
    rng = np.random.default_rng(17)
    worst_kkt = worst_eq = 0.0
    box_ok = True
    C = 100.0
    for _ in range(100):
        X, y = _separable_points(rng)
        data = WeightedBinaryDataset.uniform(sp.csr_matrix(X), y)
        model = train_smo(data, C=C, tolerance=1e-3)
        box = C * data.weights * len(y)
        worst_kkt = max(worst_kkt, oracles.svm_kkt_violation(X, y, box, model.alpha, model.w, model.b))
        worst_eq = max(worst_eq, abs(float(model.alpha @ y)))
        box_ok &= bool(np.all(model.alpha >= -1e-8) and np.all(model.alpha <= box + 1e-8))
    elapsed = time.perf_counter() - start
    ok = closed and worst_kkt <= 1e-3 and worst_eq <= 1e-8 and box_ok and elapsed < 30
    record(3, ok, f"two-point alpha={np.round(m.alpha, 7).tolist()} w={np.round(m.w, 7).tolist()} b={m.b:.1e}; "
                  f"100 sets max KKT {worst_kkt:.1e}, max |sum ay| {worst_eq:.1e}, {elapsed:.2f}s")


def test_criterion_04_boosting_arithmetic():
    alpha, Z = boost_alpha(0.25), boost_normalizer(0.25)
    ok = abs(alpha - 0.5493) <= 1e-4 and abs(Z - 0.8660) <= 1e-4
    rng = np.random.default_rng(4)
    runs, worst_sum, bound_ok = 0, 0.0, True
    for trial in range(12):
        ds = conftest.random_dataset(rng, int(rng.integers(10, 40)), int(rng.integers(3, 10)), int(rng.integers(1, 5)))
        for kind in ("stump", "tree"):
            model = train_adaboost_mh(ds, WeakSpec(kind, seed=trial), 8, record_distributions=True)
            worst_sum = max(worst_sum, max(abs(D.sum() - 1.0) for D in model.distributions))
            loss = hamming_loss(list(model.predict(ds.X)), list(ds.labelsets), ds.Q)
            bound_ok &= loss <= model.training_bound()
            runs += 1
    ok = ok and worst_sum <= 1e-9 and bound_ok
    record(4, ok, f"alpha(0.25)={alpha:.4f} Z(0.25)={Z:.4f}; {runs} runs, max |sum D - 1| {worst_sum:.1e}, "
                  f"hamming <= prod Z on all")


def _contradiction_free(rng, n, d, q):
    ds = conftest.random_dataset(rng, n, d, q, density=0.4)
    seen, rows = {}, []
    X = ds.X.toarray()
    for i, row in enumerate(map(tuple, X)):
        if row not in seen:
            seen[row] = i
            rows.append(i)
    return ds.subset(rows)


def test_criterion_05_reduction_identities():
    rng = np.random.default_rng(5)
    br_ok = True
    for kind in KINDS:
        for trial in range(50):
            ds = conftest.random_dataset(rng, int(rng.integers(8, 30)), int(rng.integers(2, 8)), 1)
            weak = WeakSpec(kind, seed=trial)
            model = train_br(ds, weak)
            y = np.where(ds.Y[:, 0] == 1, 1, -1)
            bare = train(weak.with_seed(derive_seed(weak.seed, 0)), WeightedBinaryDataset.uniform(ds.X, y))
            probe = sp.csr_matrix((rng.random((20, ds.dimension)) < 0.4).astype(float))
            bare_pos = bare.decision_function(probe) >= 0
            br_pos = np.array([0 in s for s in model.predict(probe)])
            br_ok &= bool(np.array_equal(bare_pos, br_pos))

    bag_ok = True
    for base in ("br", "lp"):
        for trial in range(10):
            ds = conftest.random_dataset(rng, 30, 6, 3)
            weak = WeakSpec("tree", seed=trial)
            bag = train_bagging(ds, base, weak, 3, seed=trial, disable_bootstrap=True)
            single = (train_br if base == "br" else train_lp)(ds, weak)
            bag_ok &= list(bag.predict(ds.X)) == list(single.predict(ds.X))

    lp_ok, worst = True, 1.0
    for trial in range(20):
        ds = _contradiction_free(rng, int(rng.integers(10, 40)), int(rng.integers(3, 8)), int(rng.integers(1, 4)))
        model = train_lp(ds, WeakSpec("tree", {"pruning_cf": None, "max_depth": None}, seed=trial))
        acc = subset_accuracy(list(model.predict(ds.X)), list(ds.labelsets))
        worst = min(worst, acc)
        lp_ok &= acc == 1.0
    record(5, br_ok and bag_ok and lp_ok,
           f"BR(Q=1) == bare learner for {len(KINDS)} kinds x 50 datasets: {br_ok}; "
           f"bagging without bootstrap == base: {bag_ok}; unpruned LP training subset accuracy min {worst}")


def test_criterion_06_information_gain():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(200):
        n, d, q = int(rng.integers(1, 33)), int(rng.integers(1, 8)), int(rng.integers(1, 5))
        rows = [set(np.flatnonzero(rng.random(d) < 0.4).tolist()) for _ in range(n)]
        sets = [set(np.flatnonzero(rng.random(q) < 0.4).tolist()) for _ in range(n)]
        X = sp.lil_matrix((n, d))
        for i, row in enumerate(rows):
            for j in row:
                X[i, j] = 1
        ds = MultiLabelDataset(LabelSpace.anonymous(q), X.tocsr(), tuple(frozenset(s) for s in sets))
        scores = information_gain_scores(ds)
        for f in range(d):
            worst = max(worst, abs(scores[f] - oracles.information_gain(rows, sets, f, q)))

    # feature 0 always present, feature 1 never, feature 2 aligned with a 3:1 label
    X = sp.csr_matrix(np.array([[1, 0, 1], [1, 0, 0], [1, 0, 0], [1, 0, 0]], dtype=float))
    ds = MultiLabelDataset(LabelSpace.anonymous(1), X, (frozenset({0}), frozenset(), frozenset(), frozenset()))
    ig = information_gain_scores(ds)
    h = oracles.entropy_bits([1, 3])
    ok = worst <= 1e-12 and ig[0] == 0.0 and ig[1] == 0.0 and ig[2] == h
    record(6, ok, f"200 datasets max deviation {worst:.1e}; constant features 0.0; aligned feature {float(ig[2])!r} "
                  f"vs H={h!r}")


def test_criterion_07_imbalance_statistics():
    start = time.perf_counter()
    docs, space = generate_synthetic(lapor_profile(), LAPOR_TOTAL_INSTANCES, seed=0)
    stats = label_distribution((docs, space))
    elapsed = time.perf_counter() - start
    ok = (
        len(docs) == 5151
        and space.Q == 70
        and stats.max_count == 1304
        and stats.min_count == 1
        and abs(stats.mean - 103.3) <= 0.05
        and stats.labels_above_mean == 15
        and elapsed < 5
    )
    record(7, ok, f"N={len(docs)} Q={space.Q} {stats.summary()} ({stats.mean:.3f}), {elapsed:.2f}s")


DESK = ExperimentConfig(
    corpus=CorpusSource(profile="desk", seed=42),
    pipeline=PipelineConfig(feature_count=200),
    algorithms=ALGORITHMS,
    weak_kinds=("stump", "tree"),
    iterations=10,
    master_seed=42,
)


def test_criterion_08_desk_experiment(tmp_path):
    start = time.perf_counter()
    first = run_experiment(DESK)
    elapsed = time.perf_counter() - start
    second = run_experiment(DESK)
    a = write_reports(first, tmp_path / "a", "csv")
    b = write_reports(second, tmp_path / "b", "csv")
    identical = [p.name for p in a] == [p.name for p in b] and all(
        x.read_bytes() == y.read_bytes() for x, y in zip(a, b)
    )
    names = {p.name for p in a}
    complete = {f"table_{m}.csv" for m in first.tables} <= names and {"sweep.csv", "margins.csv"} <= names
    complete &= len(first.tables) == 4 and all(len(t.cells) == 10 for t in first.tables.values())

    counts = first.training_counts
    ordered, worst = True, 0.0
    for entry in first.margins:
        keys = [(counts[row.label_id], row.label_id) for row in entry.report.rows]
        ordered &= keys == sorted(keys)
        base = first.reports[(entry.baseline, entry.weak)]
        approach = first.reports[(entry.approach, entry.weak)]
        diff = sum(approach.per_label_accuracy) / approach.Q - sum(base.per_label_accuracy) / base.Q
        worst = max(worst, abs(entry.report.mean_margin() - diff))
    ratio = max(first.training_counts) / max(1, min(first.training_counts))
    ok = elapsed < 300 and identical and complete and ordered and worst <= 1e-12
    record(8, ok, f"desk run {elapsed:.1f}s, {len(a)} report files byte-identical: {identical}, "
                  f"{len(first.margins)} margin reports ordered: {ordered}, max mean-margin error {worst:.1e}, "
                  f"train imbalance {ratio:.0f}:1")


def test_criterion_09_identity_on_every_evaluation(monkeypatch):
    seen, bad = [], []

    def spy(preds, golds, q):
        report = evaluate(preds, golds, q)
        seen.append(report)
        lhs = Fraction(sum(report.per_label_correct), report.N * report.Q)
        rhs = 1 - Fraction(report.mismatched_pairs, report.N * report.Q)
        mean = math.fsum(report.per_label_accuracy) / report.Q
        if lhs != rhs or abs(mean - (1 - report.hamming_loss)) > 1e-12:
            bad.append(report)
        return report

    monkeypatch.setattr(experiment_module, "evaluate", spy)
    small = ExperimentConfig(
        corpus=CorpusSource(custom_profile=conftest.SMALL_PROFILE, instances=120, seed=3),
        pipeline=PipelineConfig(feature_count=40),
        train_count=90,
        algorithms=ALGORITHMS,
        weak_kinds=("stump", "tree", "naive_bayes"),
        iterations=5,
        master_seed=9,
    )
    run_experiment(small)
    record(9, bool(seen) and not bad, f"{len(seen)} harness evaluations, {len(bad)} identity failures")


def test_criterion_10_persistence(tmp_path, small_data):
    _, train_set, _ = small_data
    rng = np.random.default_rng(10)
    probe = sp.csr_matrix((rng.random((100, train_set.dimension)) < 0.15).astype(float))
    mismatched = []
    trainers = {
        "br": lambda w: train_br(train_set, w),
        "lp": lambda w: train_lp(train_set, w),
        "adaboost_mh": lambda w: train_adaboost_mh(train_set, w, 5),
        "bagging_br": lambda w: train_bagging(train_set, "br", w, 3, seed=1),
        "bagging_lp": lambda w: train_bagging(train_set, "lp", w, 3, seed=1),
    }
    for algo, fit in trainers.items():
        for kind in ("stump", "tree"):
            model = fit(WeakSpec(kind, seed=3))
            path = tmp_path / f"{algo}-{kind}.json"
            save_model(model, path)
            if list(load_model(path).predict(probe)) != list(model.predict(probe)):
                mismatched.append(f"{algo}/{kind}")
    record(10, not mismatched, f"{len(trainers) * 2} algorithm x weak pairs on 100 random inputs, "
                               f"mismatches: {mismatched or 'none'}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v", "-s"]))
