"""The experiment grid: every configured (algorithm, weak learner) pair
trained on one split and scored on the held-out documents.

Ensembles are scored at every prefix length 1..T by truncating the one
trained ensemble (the first ``t`` boosting rounds or bagging members),
which gives the same predictions as retraining with ``T = t``.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..corpus import (
    Document,
    LabelSpace,
    count_labels,
    generate_synthetic,
    load_documents,
    split_indices,
)
from ..errors import ArtifactError, ConfigurationError, DataError, InvariantViolation
from ..metrics import METRICS, EvaluationReport, MarginReport, accuracy_margin, evaluate
from ..multilabel import (
    PredictionSet,
    train_adaboost_mh,
    train_bagging,
    train_br,
    train_lp,
)
from ..preprocess import TextPipeline
from ..weak_learners import WeakSpec, derive_seed
from .config import ALGORITHMS, ExperimentConfig

ENSEMBLES = ("adaboost_mh", "bagging_br", "bagging_lp")
BASELINE_OF = {"adaboost_mh": "br", "bagging_br": "br", "bagging_lp": "lp"}

# Sub-seed tags, so that changing one consumer never shifts another.
_WEAK, _BOOTSTRAP, _CORPUS, _SPLIT = 1, 2, 3, 4


@contextlib.contextmanager
def stage(name: str):
    """Re-raise errors from one pipeline stage with the stage name attached."""
    try:
        yield
    except ArtifactError as exc:
        if getattr(exc, "stage", None):
            raise
        tagged = type(exc).__new__(type(exc))
        tagged.__dict__.update(exc.__dict__)
        tagged.args = (f"[{name}] {exc}",)
        tagged.stage = name
        raise tagged from exc
    except ValueError as exc:
        tagged = ConfigurationError(f"[{name}] {exc}")
        tagged.stage = name
        raise tagged from exc


@dataclass(frozen=True)
class ResultsTable:
    """One metric across weak kinds (rows) and the five algorithm columns."""

    metric: str
    rows: tuple[str, ...]
    cells: dict            # (weak, algorithm) -> float; absent means N/A

    def value(self, weak: str, algorithm: str) -> float | None:
        return self.cells.get((weak, algorithm))


@dataclass(frozen=True)
class SweepSeries:
    """Metric values at iteration counts 1..len for each ensemble run.

    ``series[(algorithm, weak)]`` is a list of :class:`EvaluationReport`;
    boosting that stopped early has fewer than ``iterations`` entries.
    ``baselines[(algorithm, weak)]`` holds the flat reference lines.
    """

    iterations: int
    series: dict
    baselines: dict
    stopped_early: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class MarginEntry:
    approach: str
    baseline: str
    weak: str
    report: MarginReport


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    space: LabelSpace
    training_counts: tuple[int, ...]
    train_size: int
    test_size: int
    tables: dict           # metric -> ResultsTable
    sweeps: SweepSeries
    margins: tuple[MarginEntry, ...]
    reports: dict          # (algorithm, weak) -> EvaluationReport


def load_corpus(config: ExperimentConfig) -> tuple[list[Document], LabelSpace]:
    source = config.corpus
    if source.path is not None:
        return load_documents(source.path)
    profile, n = source.resolved_profile()
    seed = source.seed if source.seed is not None else derive_seed(config.master_seed, _CORPUS)
    return generate_synthetic(profile, n, seed)


def weak_spec(config: ExperimentConfig, algorithm: str, kind: str) -> WeakSpec:
    seed = derive_seed(config.master_seed, _WEAK, ALGORITHMS.index(algorithm), _kind_index(kind))
    return WeakSpec(kind, dict(config.weak_params.get(kind, {})), seed)


def _kind_index(kind: str) -> int:
    from ..weak_learners import KINDS

    return KINDS.index(kind)


def _evaluate(pred: PredictionSet | Sequence, golds, q: int) -> EvaluationReport:
    return evaluate(list(pred), golds, q)


def _membership_sets(member: np.ndarray) -> list[frozenset]:
    return [frozenset(int(l) for l in np.flatnonzero(row)) for row in member]


def _train_and_score(config, algorithm, kind, train, test):
    """Final report plus, for ensembles, the report at every prefix length."""
    golds = list(test.labelsets)
    q = train.Q
    weak = weak_spec(config, algorithm, kind)
    T = config.iterations
    if algorithm == "br":
        return _evaluate(train_br(train, weak).predict(test.X), golds, q), None, False
    if algorithm == "lp":
        return _evaluate(train_lp(train, weak).predict(test.X), golds, q), None, False
    if algorithm == "adaboost_mh":
        model = train_adaboost_mh(train, weak, T)
        staged = [_evaluate(_membership_sets(F > 0), golds, q) for F in model.staged_scores(test.X)]
        final = _evaluate(model.predict(test.X), golds, q)
        return final, staged, model.T < T
    base = algorithm.split("_")[1]
    seed = derive_seed(config.master_seed, _BOOTSTRAP, ALGORITHMS.index(algorithm), _kind_index(kind))
    model = train_bagging(train, base, weak, T, seed)
    staged = [
        _evaluate(_membership_sets(v >= model.vote_threshold), golds, q) for v in model.staged_votes(test.X)
    ]
    final = _evaluate(model.predict(test.X), golds, q)
    return final, staged, False


def _same(a: EvaluationReport, b: EvaluationReport) -> bool:
    return all(getattr(a, m) == getattr(b, m) for m in METRICS) and a.per_label_correct == b.per_label_correct


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the configured grid; nothing is returned if any stage fails."""
    with stage("corpus"):
        documents, space = load_corpus(config)
        if config.train_count is None:
            train_count = max(1, int(round(0.8 * len(documents))))
        else:
            train_count = config.train_count
        split_seed = config.split_seed if config.split_seed is not None else derive_seed(config.master_seed, _SPLIT)
        train_idx, test_idx = split_indices(len(documents), train_count, split_seed)
        if len(test_idx) == 0:
            raise DataError("the split leaves no test documents")

    with stage("preprocess"):
        pipeline = TextPipeline.from_config(config.pipeline)
        train = pipeline.fit([documents[i] for i in train_idx], space)
        test = pipeline.transform([documents[i] for i in test_idx], space)
        training_counts = tuple(int(c) for c in count_labels(train.labelsets, space.Q))

    needed = list(config.algorithms)
    for algo in config.algorithms:
        base = BASELINE_OF.get(algo)
        if base and base not in needed:
            needed.append(base)

    reports: dict = {}
    staged: dict = {}
    stopped: list = []
    for kind in config.weak_kinds:
        for algo in sorted(needed, key=ALGORITHMS.index):
            with stage(f"train/{algo}/{kind}"):
                final, prefix, early = _train_and_score(config, algo, kind, train, test)
            reports[(algo, kind)] = final
            if prefix is not None:
                staged[(algo, kind)] = prefix
                if early:
                    stopped.append((algo, kind))

    with stage("report"):
        for key, prefix in staged.items():
            if not prefix or len(prefix) > config.iterations or not _same(prefix[-1], reports[key]):
                raise InvariantViolation(f"sweep for {key} disagrees with its final evaluation")

        tables = {
            metric: ResultsTable(
                metric,
                config.weak_kinds,
                {
                    (kind, algo): reports[(algo, kind)].metric(metric)
                    for kind in config.weak_kinds
                    for algo in config.algorithms
                },
            )
            for metric in METRICS
        }
        baselines = {
            (algo, kind): reports[(algo, kind)]
            for kind in config.weak_kinds
            for algo in ("br", "lp")
            if (algo, kind) in reports
        }
        sweeps = SweepSeries(config.iterations, staged, baselines, tuple(stopped))

        margins = []
        for kind in config.weak_kinds:
            for algo in config.algorithms:
                if algo in ENSEMBLES:
                    base = BASELINE_OF[algo]
                    margins.append(
                        MarginEntry(
                            algo,
                            base,
                            kind,
                            accuracy_margin(reports[(base, kind)], reports[(algo, kind)], training_counts),
                        )
                    )

    return ExperimentResult(
        config=config,
        space=space,
        training_counts=training_counts,
        train_size=train.N,
        test_size=test.N,
        tables=tables,
        sweeps=sweeps,
        margins=tuple(margins),
        reports={k: v for k, v in reports.items() if k[0] in config.algorithms},
    )
