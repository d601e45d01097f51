"""Shared contract for the weak learners.

Every learner trains on a :class:`WeightedBinaryDataset` (targets in
{-1, +1}, weights summing to one) and returns an immutable model exposing
``decision_function``.  The sign of the score is the prediction, with a
score of exactly zero resolving to +1 everywhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
import scipy.sparse as sp

from ..corpus import SparseBinaryVector, as_csr
from ..errors import ConfigurationError, ValidationError

KINDS = ("stump", "tree", "forest", "naive_bayes", "smo")
KIND_ALIASES = {"nb": "naive_bayes", "j48": "tree", "rf": "forest", "svm": "smo"}

DEFAULTS: dict[str, dict[str, Any]] = {
    "stump": {},
    "tree": {"max_depth": None, "min_leaf_weight": 1e-6, "pruning_cf": 0.25},
    "forest": {"n_trees": 10, "max_features": None},
    "naive_bayes": {"laplace_alpha": 1.0},
    "smo": {"C": 1.0, "tolerance": 1e-3, "max_passes": 200},
}


def derive_seed(*parts: int) -> int:
    """Stable child seed from a parent seed and unit indices."""
    return int(np.random.SeedSequence([int(p) & 0xFFFFFFFF for p in parts]).generate_state(1)[0])


def canonical_kind(kind: str) -> str:
    kind = KIND_ALIASES.get(kind, kind)
    if kind not in KINDS:
        raise ConfigurationError(f"unknown weak learner {kind!r}; expected one of {KINDS}")
    return kind


@dataclass(frozen=True)
class WeakSpec:
    """Which weak learner to train, with its hyperparameters and seed.

    Unset hyperparameters take the defaults in :data:`DEFAULTS`.  ``tree``
    accepts ``pruning_cf=None`` to disable pruning; ``forest`` leaves
    ``max_features`` unset to use ``floor(sqrt(dimension))``.
    """

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        kind = canonical_kind(self.kind)
        object.__setattr__(self, "kind", kind)
        unknown = set(self.params) - set(DEFAULTS[kind])
        if unknown:
            raise ConfigurationError(f"unknown {kind} hyperparameters: {sorted(unknown)}")
        merged = {**DEFAULTS[kind], **self.params}
        object.__setattr__(self, "params", merged)
        _validate(kind, merged)

    def with_seed(self, seed: int) -> "WeakSpec":
        return WeakSpec(self.kind, dict(self.params), seed)

    def __getitem__(self, name):
        return self.params[name]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "seed": self.seed}

    @classmethod
    def from_dict(cls, d) -> "WeakSpec":
        return cls(d["kind"], d["params"], d["seed"])


def _positive(name, value, allow_none=False):
    if value is None and allow_none:
        return
    if value is None or not value > 0:
        raise ConfigurationError(f"{name} must be positive, got {value!r}")


def _validate(kind: str, p: Mapping[str, Any]) -> None:
    if kind == "tree":
        _positive("max_depth", p["max_depth"], allow_none=True)
        if p["min_leaf_weight"] is None or p["min_leaf_weight"] < 0:
            raise ConfigurationError("min_leaf_weight must be non-negative")
        cf = p["pruning_cf"]
        if cf is not None and not 0 < cf <= 0.5:
            raise ConfigurationError("pruning_cf must lie in (0, 0.5] or be None")
    elif kind == "forest":
        _positive("n_trees", p["n_trees"])
        _positive("max_features", p["max_features"], allow_none=True)
    elif kind == "naive_bayes":
        _positive("laplace_alpha", p["laplace_alpha"])
    elif kind == "smo":
        _positive("C", p["C"])
        _positive("tolerance", p["tolerance"])
        _positive("max_passes", p["max_passes"])


@dataclass(frozen=True, eq=False)
class WeightedBinaryDataset:
    """Rows of ``X`` with targets in {-1, +1} and a normalized weight each."""

    X: sp.csr_matrix
    targets: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        X = sp.csr_matrix(self.X, dtype=np.float64)
        y = np.asarray(self.targets, dtype=np.int8)
        w = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "targets", y)
        object.__setattr__(self, "weights", w)
        n = X.shape[0]
        if n == 0:
            raise ValidationError("weighted dataset is empty")
        if y.shape != (n,) or w.shape != (n,):
            raise ValidationError("X, targets and weights must have equal lengths")
        if not np.all((y == 1) | (y == -1)):
            raise ValidationError("targets must be -1 or +1")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValidationError("weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValidationError(f"weights must sum to 1, got {w.sum()!r}")

    @classmethod
    def uniform(cls, X, targets) -> "WeightedBinaryDataset":
        X = as_csr(X)
        n = X.shape[0]
        return cls(X, targets, np.full(n, 1.0 / n))

    @classmethod
    def from_vectors(cls, vectors, targets, weights=None) -> "WeightedBinaryDataset":
        X = as_csr(list(vectors))
        if weights is None:
            weights = np.full(X.shape[0], 1.0 / X.shape[0])
        return cls(X, targets, weights)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dimension(self) -> int:
        return self.X.shape[1]

    @property
    def vectors(self) -> list[SparseBinaryVector]:
        X = self.X
        return [
            SparseBinaryVector(tuple(int(j) for j in X.indices[X.indptr[i] : X.indptr[i + 1]]), X.shape[1])
            for i in range(X.shape[0])
        ]


def signs(scores: np.ndarray) -> np.ndarray:
    """Map scores to {-1, +1}; zero goes to +1."""
    return np.where(np.asarray(scores) >= 0, 1, -1).astype(np.int8)


def weighted_error(model, data: WeightedBinaryDataset) -> float:
    pred = signs(model.decision_function(data.X))
    return float(data.weights[pred != data.targets].sum())


class BinaryModel:
    """Common surface of trained binary learners."""

    kind: str
    dimension: int

    def decision_function(self, X) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        return signs(self.decision_function(X))

    def _check(self, X) -> sp.csr_matrix:
        return as_csr(X, self.dimension)


@dataclass(frozen=True, eq=False)
class ConstantModel(BinaryModel):
    """Predicts ``sign`` for every input."""

    sign: int
    dimension: int
    kind: str = "constant"

    def decision_function(self, X) -> np.ndarray:
        X = self._check(X)
        return np.full(X.shape[0], float(self.sign))

    def to_dict(self) -> dict:
        return {"kind": "constant", "sign": int(self.sign), "dimension": self.dimension}

    @classmethod
    def from_dict(cls, d) -> "ConstantModel":
        return cls(int(d["sign"]), int(d["dimension"]))


def majority_sign(data: WeightedBinaryDataset) -> int:
    pos = data.weights[data.targets == 1].sum()
    neg = data.weights[data.targets == -1].sum()
    return 1 if pos >= neg else -1


def single_class(data: WeightedBinaryDataset) -> int | None:
    """The only target carrying positive weight, or ``None`` when both do."""
    active = data.targets[data.weights > 0]
    if active.size == 0:
        return majority_sign(data)
    if np.all(active == active[0]):
        return int(active[0])
    return None
