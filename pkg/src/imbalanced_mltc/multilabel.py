"""Problem transformations and ensembles for multi-label data.

* Binary Relevance: one binary model per label.
* Label Powerset: every distinct training label set is one class.
* AdaBoost.MH: discrete boosting over (instance, label) pairs, realized as
  one binary weak learner per round on label-augmented rows.
* Bagging: BR or LP members trained on bootstrap samples, combined by
  per-label vote fraction.

All ``predict`` methods accept a dataset, a CSR matrix or a single
:class:`~imbalanced_mltc.corpus.SparseBinaryVector` and return a
:class:`PredictionSet`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import LabelSpace, MultiLabelDataset, as_csr
from .weak_learners import (
    MULTICLASS_KINDS,
    BinaryModel,
    ConstantModel,
    WeakSpec,
    WeightedBinaryDataset,
    binary_from_dict,
    derive_seed,
    multiclass_from_dict,
    signs,
    train,
    train_multiclass,
)

EPS_CLAMP = 1e-10


@dataclass(frozen=True, eq=False)
class PredictionSet:
    """Predicted label set per instance plus an ``N x Q`` score matrix."""

    labelsets: tuple[frozenset, ...]
    scores: np.ndarray

    def __len__(self):
        return len(self.labelsets)

    def __getitem__(self, i):
        return self.labelsets[i]

    def __iter__(self):
        return iter(self.labelsets)

    @classmethod
    def from_membership(cls, member: np.ndarray, scores: np.ndarray) -> "PredictionSet":
        sets = tuple(frozenset(int(l) for l in np.flatnonzero(row)) for row in member)
        return cls(sets, np.asarray(scores, dtype=np.float64))


# ---------------------------------------------------------------------------
# Binary Relevance


@dataclass(frozen=True, eq=False)
class BRModel:
    space: LabelSpace
    per_label_models: tuple[BinaryModel, ...]
    dimension: int
    name: str = "br"

    def decision_scores(self, X) -> np.ndarray:
        X = as_csr(X, self.dimension)
        if not self.per_label_models:
            return np.zeros((X.shape[0], 0))
        return np.column_stack([m.decision_function(X) for m in self.per_label_models])

    def predict(self, X) -> PredictionSet:
        scores = self.decision_scores(X)
        return PredictionSet.from_membership(scores >= 0, scores)

    def to_dict(self) -> dict:
        return {
            "type": "br",
            "dimension": self.dimension,
            "models": [m.to_dict() for m in self.per_label_models],
        }

    @classmethod
    def from_dict(cls, d, space) -> "BRModel":
        return cls(space, tuple(binary_from_dict(m) for m in d["models"]), int(d["dimension"]))


def train_br(train_set: MultiLabelDataset, weak: WeakSpec) -> BRModel:
    """One binary model per label on uniform weights; label ``l`` uses seed ``hash(seed, l)``."""
    if train_set.N < 1:
        raise ValueError("training set is empty")
    X, Y = train_set.X, train_set.Y
    models = []
    for l in range(train_set.Q):
        data = WeightedBinaryDataset.uniform(X, np.where(Y[:, l], 1, -1))
        models.append(train(weak.with_seed(derive_seed(weak.seed, l)), data))
    return BRModel(train_set.space, tuple(models), train_set.dimension)


def predict_br(model: BRModel, x) -> PredictionSet:
    return model.predict(x)


# ---------------------------------------------------------------------------
# Label Powerset


@dataclass(frozen=True, eq=False)
class OneVsRest:
    """Binary model per class; class scores are the binary confidences."""

    models: tuple[BinaryModel, ...]
    dimension: int

    def class_scores(self, X) -> np.ndarray:
        X = as_csr(X, self.dimension)
        return np.column_stack([m.decision_function(X) for m in self.models])

    def to_dict(self) -> dict:
        return {"kind": "one_vs_rest", "dimension": self.dimension, "models": [m.to_dict() for m in self.models]}

    @classmethod
    def from_dict(cls, d) -> "OneVsRest":
        return cls(tuple(binary_from_dict(m) for m in d["models"]), int(d["dimension"]))


@dataclass(frozen=True, eq=False)
class LPModel:
    space: LabelSpace
    codebook: tuple[frozenset, ...]
    class_priors: np.ndarray
    predictor: object | None      # None when there is a single class
    dimension: int
    name: str = "lp"

    @property
    def n_classes(self) -> int:
        return len(self.codebook)

    def class_scores(self, X) -> np.ndarray:
        X = as_csr(X, self.dimension)
        if self.predictor is None:
            return np.ones((X.shape[0], 1))
        return self.predictor.class_scores(X)

    def predict_classes(self, X) -> np.ndarray:
        """Winning class per row: top score, then higher prior, then lower id."""
        scores = self.class_scores(X)
        rank = np.empty(self.n_classes, dtype=np.int64)
        rank[np.lexsort((np.arange(self.n_classes), -self.class_priors))] = np.arange(self.n_classes)
        top = scores.max(axis=1, keepdims=True)
        tied = scores == top
        return np.where(tied, rank[None, :], self.n_classes).argmin(axis=1)

    def predict(self, X) -> PredictionSet:
        classes = self.predict_classes(X)
        member = np.zeros((len(classes), self.space.Q), dtype=bool)
        for row, c in enumerate(classes):
            member[row, list(self.codebook[c])] = True
        return PredictionSet.from_membership(member, member.astype(np.float64))

    def to_dict(self) -> dict:
        return {
            "type": "lp",
            "dimension": self.dimension,
            "codebook": [sorted(s) for s in self.codebook],
            "class_priors": self.class_priors.tolist(),
            "predictor": None if self.predictor is None else self.predictor.to_dict(),
        }

    @classmethod
    def from_dict(cls, d, space) -> "LPModel":
        p = d["predictor"]
        if p is None:
            predictor = None
        elif p["kind"] == "one_vs_rest":
            predictor = OneVsRest.from_dict(p)
        else:
            predictor = multiclass_from_dict(p)
        return cls(
            space,
            tuple(frozenset(s) for s in d["codebook"]),
            np.asarray(d["class_priors"], dtype=np.float64),
            predictor,
            int(d["dimension"]),
        )


def lp_codebook(labelsets: Sequence[frozenset]) -> tuple[tuple[frozenset, ...], np.ndarray, np.ndarray]:
    """Distinct label sets ordered by their sorted member tuples, with priors and per-row classes."""
    distinct = sorted(set(labelsets), key=lambda s: tuple(sorted(s)))
    index = {s: c for c, s in enumerate(distinct)}
    classes = np.array([index[s] for s in labelsets], dtype=np.int64)
    priors = np.bincount(classes, minlength=len(distinct)) / len(labelsets)
    return tuple(distinct), priors, classes


def train_lp(train_set: MultiLabelDataset, weak: WeakSpec) -> LPModel:
    """Multiclass over observed label sets.

    Tree, forest and naive Bayes are trained natively multiclass; stump
    and SMO form a one-vs-rest battery with seeds ``hash(seed, class)``.
    """
    if train_set.N < 1:
        raise ValueError("training set is empty")
    codebook, priors, classes = lp_codebook(train_set.labelsets)
    X = train_set.X
    if len(codebook) == 1:
        predictor = None
    elif weak.kind in MULTICLASS_KINDS:
        predictor = train_multiclass(weak, X, classes, len(codebook))
    else:
        models = []
        for c in range(len(codebook)):
            data = WeightedBinaryDataset.uniform(X, np.where(classes == c, 1, -1))
            models.append(train(weak.with_seed(derive_seed(weak.seed, c)), data))
        predictor = OneVsRest(tuple(models), train_set.dimension)
    return LPModel(train_set.space, codebook, priors, predictor, train_set.dimension)


def predict_lp(model: LPModel, x) -> PredictionSet:
    return model.predict(x)


# ---------------------------------------------------------------------------
# AdaBoost.MH


def augment(X, q: int) -> sp.csr_matrix:
    """Row ``i * q + l`` is ``x_i`` followed by the one-hot code of label ``l``."""
    X = as_csr(X)
    n = X.shape[0]
    repeated = X[np.repeat(np.arange(n), q)]
    onehot = sp.csr_matrix(
        (np.ones(n * q), np.tile(np.arange(q), n), np.arange(n * q + 1)), shape=(n * q, q)
    )
    return sp.hstack([repeated, onehot], format="csr")


def boost_alpha(epsilon: float) -> float:
    eps = min(max(epsilon, EPS_CLAMP), 0.5 - EPS_CLAMP)
    return 0.5 * math.log((1.0 - eps) / eps)


def boost_normalizer(epsilon: float) -> float:
    eps = min(max(epsilon, EPS_CLAMP), 0.5 - EPS_CLAMP)
    return 2.0 * math.sqrt(eps * (1.0 - eps))


@dataclass(frozen=True, eq=False)
class BoostRound:
    t: int
    weak: BinaryModel
    epsilon: float      # clamped weighted pair error
    alpha: float
    Z: float

    def to_dict(self) -> dict:
        return {"t": self.t, "epsilon": self.epsilon, "alpha": self.alpha, "Z": self.Z, "weak": self.weak.to_dict()}

    @classmethod
    def from_dict(cls, d) -> "BoostRound":
        return cls(int(d["t"]), binary_from_dict(d["weak"]), float(d["epsilon"]), float(d["alpha"]), float(d["Z"]))


@dataclass(frozen=True, eq=False)
class AdaBoostMHModel:
    space: LabelSpace
    rounds: tuple[BoostRound, ...]
    dimension: int
    stopped_early: bool = False
    # Pair distributions D_1..D_{T+1}; only kept when training asked for them.
    distributions: tuple[np.ndarray, ...] | None = field(default=None, repr=False)
    name: str = "adaboost_mh"

    @property
    def augmented_dimension(self) -> int:
        return self.dimension + self.space.Q

    @property
    def T(self) -> int:
        return len(self.rounds)

    def training_bound(self) -> float:
        return float(np.prod([r.Z for r in self.rounds]))

    def round_votes(self, X) -> list[np.ndarray]:
        """``alpha_t * h_t`` per round, each shaped ``N x Q``."""
        X = as_csr(X, self.dimension)
        q = self.space.Q
        Xa = augment(X, q)
        return [r.alpha * signs(r.weak.decision_function(Xa)).reshape(-1, q) for r in self.rounds]

    def staged_scores(self, X) -> list[np.ndarray]:
        """Cumulative ``F(x, l)`` after each round."""
        out, F = [], None
        for v in self.round_votes(X):
            F = v.astype(np.float64) if F is None else F + v
            out.append(F.copy())
        return out

    def scores(self, X) -> np.ndarray:
        votes = self.round_votes(X)
        F = np.zeros((as_csr(X).shape[0], self.space.Q))
        for v in votes:
            F = F + v
        return F

    def predict(self, X) -> PredictionSet:
        F = self.scores(X)
        return PredictionSet.from_membership(F > 0, F)

    def truncated(self, T: int) -> "AdaBoostMHModel":
        return AdaBoostMHModel(self.space, self.rounds[:T], self.dimension, self.stopped_early)

    def to_dict(self) -> dict:
        return {
            "type": "adaboost_mh",
            "dimension": self.dimension,
            "stopped_early": self.stopped_early,
            "rounds": [r.to_dict() for r in self.rounds],
        }

    @classmethod
    def from_dict(cls, d, space) -> "AdaBoostMHModel":
        return cls(space, tuple(BoostRound.from_dict(r) for r in d["rounds"]), int(d["dimension"]), bool(d["stopped_early"]))


def train_adaboost_mh(
    train_set: MultiLabelDataset, weak: WeakSpec, T: int, record_distributions: bool = False
) -> AdaBoostMHModel:
    """Boost ``T`` rounds over the ``N * Q`` (instance, label) pairs.

    A round whose raw weighted error is at least 0.5 is discarded and
    training stops; a round with zero error is kept and training stops.
    If the very first round is discarded, the model falls back to one round
    of the constant majority-sign pair predictor.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    n, q = train_set.N, train_set.Q
    Xa = augment(train_set.X, q)
    targets = np.where(train_set.Y.ravel(), 1, -1).astype(np.int8)
    D = np.full(n * q, 1.0 / (n * q))
    history = [D.copy()] if record_distributions else None
    rounds: list[BoostRound] = []
    stopped = False
    for t in range(T):
        data = WeightedBinaryDataset(Xa, targets, D)
        model = train(weak.with_seed(derive_seed(weak.seed, t)), data)
        pred = signs(model.decision_function(Xa))
        miss = pred != targets
        raw = float(D[miss].sum())
        if raw >= 0.5:
            stopped = True
            break
        eps = min(max(raw, EPS_CLAMP), 0.5 - EPS_CLAMP)
        alpha = boost_alpha(raw)
        rounds.append(BoostRound(t, model, eps, alpha, boost_normalizer(raw)))
        D = D * np.exp(-alpha * targets * pred)
        D /= D.sum()
        if history is not None:
            history.append(D.copy())
        if raw == 0.0:
            stopped = t + 1 < T
            break

    if not rounds:
        pos = D[targets == 1].sum()
        sign = 1 if pos >= 1.0 - pos else -1
        raw = float(D[targets != sign].sum())
        const = ConstantModel(sign, Xa.shape[1])
        rounds.append(BoostRound(0, const, min(max(raw, EPS_CLAMP), 0.5 - EPS_CLAMP),
                                 boost_alpha(raw), boost_normalizer(raw)))
    return AdaBoostMHModel(
        train_set.space,
        tuple(rounds),
        train_set.dimension,
        stopped,
        None if history is None else tuple(history),
    )


def predict_adaboost_mh(model: AdaBoostMHModel, x) -> PredictionSet:
    return model.predict(x)


# ---------------------------------------------------------------------------
# Bagging


@dataclass(frozen=True, eq=False)
class BaggingModel:
    space: LabelSpace
    members: tuple
    base_kind: str               # "br" or "lp"
    dimension: int
    vote_threshold: float = 0.5

    @property
    def name(self) -> str:
        return f"bagging_{self.base_kind}"

    @property
    def m(self) -> int:
        return len(self.members)

    def member_memberships(self, X) -> list[np.ndarray]:
        X = as_csr(X, self.dimension)
        out = []
        for member in self.members:
            pred = member.predict(X)
            mem = np.zeros((X.shape[0], self.space.Q), dtype=bool)
            for row, s in enumerate(pred.labelsets):
                mem[row, list(s)] = True
            out.append(mem)
        return out

    def staged_votes(self, X) -> list[np.ndarray]:
        """Vote fractions using the first ``k`` members, for k = 1..m."""
        out, total = [], None
        for k, mem in enumerate(self.member_memberships(X), start=1):
            total = mem.astype(np.int64) if total is None else total + mem
            out.append(total / k)
        return out

    def predict(self, X) -> PredictionSet:
        votes = self.staged_votes(X)[-1]
        return PredictionSet.from_membership(votes >= self.vote_threshold, votes)

    def truncated(self, m: int) -> "BaggingModel":
        return BaggingModel(self.space, self.members[:m], self.base_kind, self.dimension, self.vote_threshold)

    def to_dict(self) -> dict:
        return {
            "type": "bagging",
            "base_kind": self.base_kind,
            "dimension": self.dimension,
            "vote_threshold": self.vote_threshold,
            "members": [m.to_dict() for m in self.members],
        }

    @classmethod
    def from_dict(cls, d, space) -> "BaggingModel":
        member_cls = BRModel if d["base_kind"] == "br" else LPModel
        return cls(
            space,
            tuple(member_cls.from_dict(m, space) for m in d["members"]),
            d["base_kind"],
            int(d["dimension"]),
            float(d["vote_threshold"]),
        )


def bootstrap_rows(n: int, seed: int, member: int) -> np.ndarray:
    rng = np.random.default_rng(derive_seed(seed, member))
    return np.sort(rng.integers(0, n, size=n))


def train_bagging(
    train_set: MultiLabelDataset,
    base_kind: str,
    weak: WeakSpec,
    m: int,
    seed: int,
    vote_threshold: float = 0.5,
    disable_bootstrap: bool = False,
) -> BaggingModel:
    """``m`` members, each a BR or LP model on a size-``N`` bootstrap.

    Bootstrap ``k`` is drawn with seed ``hash(seed, k)``; every member uses
    the same weak-learner spec, so with ``disable_bootstrap`` all members
    equal the plain base model.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if base_kind not in ("br", "lp"):
        raise ValueError(f"base_kind must be 'br' or 'lp', got {base_kind!r}")
    if not 0 < vote_threshold <= 1:
        raise ValueError("vote_threshold must lie in (0, 1]")
    fit = train_br if base_kind == "br" else train_lp
    members = []
    for k in range(m):
        sample = train_set if disable_bootstrap else train_set.subset(bootstrap_rows(train_set.N, seed, k))
        members.append(fit(sample, weak))
    return BaggingModel(train_set.space, tuple(members), base_kind, train_set.dimension, vote_threshold)


def predict_bagging(model: BaggingModel, x) -> PredictionSet:
    return model.predict(x)


MODEL_TYPES = {"br": BRModel, "lp": LPModel, "adaboost_mh": AdaBoostMHModel, "bagging": BaggingModel}


def model_from_dict(d, space: LabelSpace):
    return MODEL_TYPES[d["type"]].from_dict(d, space)
