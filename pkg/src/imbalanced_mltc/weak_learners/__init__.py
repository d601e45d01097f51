"""The five weak learners behind one weighted-binary training contract."""

from __future__ import annotations

import numpy as np

from ..corpus import as_csr
from .base import (
    DEFAULTS,
    KINDS,
    BinaryModel,
    ConstantModel,
    WeakSpec,
    WeightedBinaryDataset,
    canonical_kind,
    derive_seed,
    signs,
    weighted_error,
)
from .forest import ForestModel, MulticlassForestModel, train_forest, train_forest_multiclass
from .naive_bayes import (
    MulticlassNaiveBayesModel,
    NaiveBayesModel,
    train_naive_bayes,
    train_naive_bayes_multiclass,
)
from .smo import SMOModel, train_smo
from .stump import StumpModel, train_stump
from .tree import MulticlassTreeModel, TreeModel, TreeStructure, train_tree, train_tree_multiclass

# Kinds that handle many classes natively; the rest go one-vs-rest.
MULTICLASS_KINDS = ("tree", "forest", "naive_bayes")


def train(spec: WeakSpec, data: WeightedBinaryDataset) -> BinaryModel:
    """Train the learner described by ``spec``; deterministic in ``spec.seed``."""
    p = spec.params
    if spec.kind == "stump":
        return train_stump(data)
    if spec.kind == "tree":
        return train_tree(data, p)
    if spec.kind == "forest":
        return train_forest(data, p, spec.seed)
    if spec.kind == "naive_bayes":
        return train_naive_bayes(data, p)
    return train_smo(data, p["C"], p["tolerance"], p["max_passes"], spec.seed)


def predict(model: BinaryModel, x) -> tuple[int, float]:
    """Sign and confidence for a single vector; a zero score maps to +1."""
    X = as_csr(x, model.dimension)
    if X.shape[0] != 1:
        raise ValueError("predict expects a single vector; use model.decision_function for batches")
    score = float(model.decision_function(X)[0])
    return (1 if score >= 0 else -1), score


def train_multiclass(spec: WeakSpec, X, classes, n_classes: int, weights=None):
    """Natively multiclass model for tree, forest and naive Bayes."""
    X = as_csr(X)
    classes = np.asarray(classes, dtype=np.int64)
    if weights is None:
        weights = np.full(X.shape[0], 1.0 / X.shape[0])
    p = spec.params
    if spec.kind == "tree":
        return train_tree_multiclass(X, classes, weights, n_classes, p)
    if spec.kind == "forest":
        return train_forest_multiclass(X, classes, weights, n_classes, p, spec.seed)
    if spec.kind == "naive_bayes":
        return train_naive_bayes_multiclass(X, classes, weights, n_classes, p)
    raise ValueError(f"{spec.kind} is not natively multiclass")


_BINARY = {
    "constant": ConstantModel,
    "stump": StumpModel,
    "tree": TreeModel,
    "forest": ForestModel,
    "naive_bayes": NaiveBayesModel,
    "smo": SMOModel,
}
_MULTICLASS = {
    "tree": MulticlassTreeModel,
    "forest": MulticlassForestModel,
    "naive_bayes": MulticlassNaiveBayesModel,
}


def binary_from_dict(d) -> BinaryModel:
    return _BINARY[d["kind"]].from_dict(d)


def multiclass_from_dict(d):
    return _MULTICLASS[d["kind"]].from_dict(d)


__all__ = [
    "DEFAULTS",
    "KINDS",
    "MULTICLASS_KINDS",
    "BinaryModel",
    "ConstantModel",
    "ForestModel",
    "MulticlassForestModel",
    "MulticlassNaiveBayesModel",
    "MulticlassTreeModel",
    "NaiveBayesModel",
    "SMOModel",
    "StumpModel",
    "TreeModel",
    "TreeStructure",
    "WeakSpec",
    "WeightedBinaryDataset",
    "binary_from_dict",
    "canonical_kind",
    "derive_seed",
    "multiclass_from_dict",
    "predict",
    "signs",
    "train",
    "train_multiclass",
    "train_smo",
    "weighted_error",
]
