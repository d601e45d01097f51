"""Random forest of unpruned trees on weighted bootstrap samples."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..corpus import as_csr
from .base import BinaryModel, ConstantModel, WeightedBinaryDataset, derive_seed, single_class
from .tree import TreeStructure, build_tree


def _grow_trees(X, classes, weights, n_classes, params, seed) -> list[TreeStructure]:
    n, d = X.shape
    max_features = params["max_features"] or max(1, math.floor(math.sqrt(d)))
    p = weights / weights.sum()
    trees = []
    for t in range(params["n_trees"]):
        rng = np.random.default_rng(derive_seed(seed, t))
        draws = rng.choice(n, size=n, replace=True, p=p)
        rows, counts = np.unique(draws, return_counts=True)
        trees.append(
            build_tree(
                X[rows],
                classes[rows],
                counts / n,
                n_classes,
                max_depth=None,
                min_leaf_weight=0.0,
                pruning_cf=None,
                max_features=int(max_features),
                rng=rng,
            )
        )
    return trees


def _votes(trees, X, n_classes) -> np.ndarray:
    votes = np.zeros((X.shape[0], n_classes))
    rows = np.arange(X.shape[0])
    for tree in trees:
        votes[rows, np.argmax(tree.distribution(X), axis=1)] += 1
    return votes / len(trees)


@dataclass(frozen=True, eq=False)
class ForestModel(BinaryModel):
    """Score is the vote margin (positive votes minus negative) over trees."""

    trees: tuple[TreeStructure, ...]
    dimension: int
    kind: str = "forest"

    def decision_function(self, X) -> np.ndarray:
        X = self._check(X)
        v = _votes(self.trees, X, 2)
        return v[:, 1] - v[:, 0]

    def to_dict(self) -> dict:
        return {"kind": "forest", "dimension": self.dimension, "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d) -> "ForestModel":
        return cls(tuple(TreeStructure.from_dict(t) for t in d["trees"]), int(d["dimension"]))


@dataclass(frozen=True, eq=False)
class MulticlassForestModel:
    trees: tuple[TreeStructure, ...]
    n_classes: int
    dimension: int
    kind: str = "forest"

    def class_scores(self, X) -> np.ndarray:
        return _votes(self.trees, as_csr(X, self.dimension), self.n_classes)

    def to_dict(self) -> dict:
        return {
            "kind": "forest",
            "n_classes": self.n_classes,
            "dimension": self.dimension,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d) -> "MulticlassForestModel":
        return cls(tuple(TreeStructure.from_dict(t) for t in d["trees"]), int(d["n_classes"]), int(d["dimension"]))


def train_forest(data: WeightedBinaryDataset, params, seed: int):
    only = single_class(data)
    if only is not None:
        return ConstantModel(only, data.dimension)
    classes = (data.targets == 1).astype(np.int64)
    trees = _grow_trees(data.X, classes, data.weights, 2, params, seed)
    return ForestModel(tuple(trees), data.dimension)


def train_forest_multiclass(X, classes, weights, n_classes, params, seed) -> MulticlassForestModel:
    X = as_csr(X)
    trees = _grow_trees(X, np.asarray(classes), np.asarray(weights, dtype=np.float64), n_classes, params, seed)
    return MulticlassForestModel(tuple(trees), n_classes, X.shape[1])
