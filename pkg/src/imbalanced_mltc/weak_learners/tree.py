"""C4.5-style decision tree over binary presence splits.

Splits are chosen by gain ratio among candidates whose gain is at least
the average gain, as C4.5 does.  When no candidate has positive gain but
the node is still impure, the best-ratio separating feature is used anyway
so an unpruned, unlimited tree always fits contradiction-free data.
Pruning is C4.5's pessimistic error estimate (no subtree raising).

The core works on integer class labels with instance weights, so the
same builder serves binary targets, Label Powerset classes and the
random forest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.stats import norm

from ..corpus import as_csr
from .base import BinaryModel, ConstantModel, WeightedBinaryDataset, single_class

_GAIN_EPS = 1e-12


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    """Entropy in bits of each row of a non-negative count matrix."""
    totals = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / np.where(totals > 0, totals, 1.0), 0.0)
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=-1)


def added_errors(n: float, e: float, cf: float) -> float:
    """Pessimistic extra errors for a leaf covering ``n`` cases with ``e`` errors.

    Upper limit of the binomial confidence interval at level ``cf``,
    following C4.5.
    """
    if n <= 0:
        return 0.0
    if e < 1:
        base = n * (1 - cf ** (1 / n))
        if e == 0:
            return base
        return base + e * (added_errors(n, 1.0, cf) - base)
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    z = norm.ppf(1 - cf)
    f = (e + 0.5) / n
    r = (f + z * z / (2 * n) + z * math.sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (1 + z * z / n)
    return r * n - e


@dataclass(frozen=True, eq=False)
class TreeStructure:
    """Flat node arrays; node 0 is the root, children come after parents.

    ``feature[i] == -1`` marks a leaf.  ``value[i]`` is the normalized
    class-weight distribution at node ``i``.
    """

    feature: np.ndarray
    present: np.ndarray
    absent: np.ndarray
    value: np.ndarray
    dimension: int

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.present[i]] = depth[i] + 1
                depth[self.absent[i]] = depth[i] + 1
        return int(depth.max())

    def leaf_index(self, X) -> np.ndarray:
        X = as_csr(X, self.dimension)
        n = X.shape[0]
        Xc = X.tocsc()
        leaf = np.zeros(n, dtype=np.int64)
        rows_at = {0: np.arange(n)}
        mark = np.zeros(n, dtype=bool)
        for node in range(self.n_nodes):
            rows = rows_at.pop(node, None)
            if rows is None or rows.size == 0:
                continue
            f = self.feature[node]
            if f < 0:
                leaf[rows] = node
                continue
            col = Xc.indices[Xc.indptr[f] : Xc.indptr[f + 1]]
            mark[col] = True
            has = mark[rows]
            mark[col] = False
            rows_at[int(self.present[node])] = rows[has]
            rows_at[int(self.absent[node])] = rows[~has]
        return leaf

    def distribution(self, X) -> np.ndarray:
        return self.value[self.leaf_index(X)]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "present": self.present.tolist(),
            "absent": self.absent.tolist(),
            "value": self.value.tolist(),
            "dimension": self.dimension,
        }

    @classmethod
    def from_dict(cls, d) -> "TreeStructure":
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["present"], dtype=np.int64),
            np.asarray(d["absent"], dtype=np.int64),
            np.asarray(d["value"], dtype=np.float64).reshape(len(d["feature"]), -1),
            int(d["dimension"]),
        )


def _best_split(X_node, W_node, min_leaf_weight, candidates=None):
    """Return (feature, gain) for the preferred split, or (None, 0.0).

    ``W_node`` is the per-row class-weight matrix for the node's rows.
    """
    class_totals = W_node.sum(axis=0)
    total = class_totals.sum()
    P = np.asarray(X_node.T @ W_node)          # present weight per feature and class
    A = class_totals[None, :] - P
    pw = P.sum(axis=1)
    aw = total - pw
    threshold = max(min_leaf_weight, total * 1e-12)
    valid = (pw >= threshold) & (aw >= threshold)
    if candidates is not None:
        mask = np.zeros_like(valid)
        mask[candidates] = True
        valid &= mask
    if not valid.any():
        return None, 0.0

    h_parent = _entropy_rows(class_totals[None, :])[0]
    gain = h_parent - (pw / total) * _entropy_rows(P) - (aw / total) * _entropy_rows(A)
    frac = pw / total
    with np.errstate(divide="ignore", invalid="ignore"):
        split_info = -(np.where(frac > 0, frac * np.log2(np.where(frac > 0, frac, 1.0)), 0.0)
                       + np.where(frac < 1, (1 - frac) * np.log2(np.where(frac < 1, 1 - frac, 1.0)), 0.0))
        ratio = np.where(split_info > 0, gain / np.where(split_info > 0, split_info, 1.0), 0.0)

    idx = np.flatnonzero(valid)
    g = gain[idx]
    if g.max() > _GAIN_EPS:
        keep = g >= g.mean() - _GAIN_EPS
        keep &= g > _GAIN_EPS
        idx, g = idx[keep], g[keep]
    r = ratio[idx]
    # Highest ratio, ties to the lowest feature index.
    best = idx[int(np.argmax(r))]
    return int(best), float(gain[best])


def build_tree(
    X: sp.csr_matrix,
    classes: np.ndarray,
    weights: np.ndarray,
    n_classes: int,
    max_depth: int | None = None,
    min_leaf_weight: float = 1e-6,
    pruning_cf: float | None = 0.25,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
) -> TreeStructure:
    """Grow (and optionally prune) a tree on weighted multiclass data.

    With ``max_features`` set, each node first evaluates a random subset
    of that many features and falls back to all features when none of
    them has positive gain.
    """
    X = sp.csr_matrix(X, dtype=np.float64)
    n, d = X.shape
    W = np.zeros((n, n_classes))
    W[np.arange(n), classes] = weights
    # Case counts for pruning: weights rescaled to the number of weighted rows.
    scale = np.count_nonzero(weights) / weights.sum() if weights.sum() > 0 else 0.0

    feature, present, absent, value, node_rows, node_depth = [], [], [], [], [], []

    def new_node(rows, depth):
        feature.append(-1)
        present.append(-1)
        absent.append(-1)
        value.append(W[rows].sum(axis=0))
        node_rows.append(rows)
        node_depth.append(depth)
        return len(feature) - 1

    new_node(np.arange(n), 0)
    Xc = X.tocsc()
    mark = np.zeros(n, dtype=bool)
    i = 0
    while i < len(feature):
        rows = node_rows[i]
        dist = value[i]
        pure = np.count_nonzero(dist > 0) <= 1
        if pure or (max_depth is not None and node_depth[i] >= max_depth) or rows.size < 2:
            i += 1
            continue
        X_node = X[rows]
        W_node = W[rows]
        f = None
        if max_features is not None and max_features < d:
            subset = rng.choice(d, size=max_features, replace=False)
            f, g = _best_split(X_node, W_node, min_leaf_weight, subset)
            if f is not None and g <= _GAIN_EPS:
                f = None
        if f is None:
            f, _ = _best_split(X_node, W_node, min_leaf_weight)
        if f is None:
            i += 1
            continue
        col = Xc.indices[Xc.indptr[f] : Xc.indptr[f + 1]]
        mark[col] = True
        has = mark[rows]
        mark[col] = False
        feature[i] = f
        present[i] = new_node(rows[has], node_depth[i] + 1)
        absent[i] = new_node(rows[~has], node_depth[i] + 1)
        i += 1

    feature = np.asarray(feature, dtype=np.int64)
    present = np.asarray(present, dtype=np.int64)
    absent = np.asarray(absent, dtype=np.int64)
    value = np.asarray(value, dtype=np.float64).reshape(len(feature), n_classes)

    if pruning_cf is not None:
        _prune(feature, present, absent, value * scale, pruning_cf)

    return _compact(feature, present, absent, value, d)


def _prune(feature, present, absent, counts, cf):
    """Bottom-up pessimistic pruning, in place on ``feature``."""
    n_nodes = len(feature)
    subtree_est = np.zeros(n_nodes)
    for i in range(n_nodes - 1, -1, -1):
        total = counts[i].sum()
        errors = total - counts[i].max()
        leaf_est = errors + added_errors(total, errors, cf)
        if feature[i] < 0:
            subtree_est[i] = leaf_est
            continue
        sub = subtree_est[present[i]] + subtree_est[absent[i]]
        if leaf_est <= sub + 0.1:
            feature[i] = -1
            subtree_est[i] = leaf_est
        else:
            subtree_est[i] = sub


def _compact(feature, present, absent, value, dimension) -> TreeStructure:
    keep = []
    remap = {}
    stack_order = [0]
    # Breadth-first over reachable nodes keeps children after parents.
    while stack_order:
        nxt = []
        for node in stack_order:
            remap[node] = len(keep)
            keep.append(node)
            if feature[node] >= 0:
                nxt.extend((present[node], absent[node]))
        stack_order = nxt
    keep = np.asarray(keep)
    f = feature[keep]
    p = np.array([remap[present[k]] if feature[k] >= 0 else -1 for k in keep], dtype=np.int64)
    a = np.array([remap[absent[k]] if feature[k] >= 0 else -1 for k in keep], dtype=np.int64)
    v = value[keep]
    totals = v.sum(axis=1, keepdims=True)
    v = np.where(totals > 0, v / np.where(totals > 0, totals, 1.0), 0.0)
    return TreeStructure(f, p, a, v, dimension)


@dataclass(frozen=True, eq=False)
class TreeModel(BinaryModel):
    """Binary tree: class 0 is -1, class 1 is +1; score is the leaf sign."""

    structure: TreeStructure
    kind: str = "tree"

    @property
    def dimension(self) -> int:
        return self.structure.dimension

    def decision_function(self, X) -> np.ndarray:
        dist = self.structure.distribution(self._check(X))
        return np.where(dist[:, 1] >= dist[:, 0], 1.0, -1.0)

    def to_dict(self) -> dict:
        return {"kind": "tree", "structure": self.structure.to_dict()}

    @classmethod
    def from_dict(cls, d) -> "TreeModel":
        return cls(TreeStructure.from_dict(d["structure"]))


@dataclass(frozen=True, eq=False)
class MulticlassTreeModel:
    """Tree over ``n_classes`` classes; scores are leaf class distributions."""

    structure: TreeStructure
    n_classes: int
    kind: str = "tree"

    @property
    def dimension(self) -> int:
        return self.structure.dimension

    def class_scores(self, X) -> np.ndarray:
        return self.structure.distribution(as_csr(X, self.dimension))

    def to_dict(self) -> dict:
        return {"kind": "tree", "n_classes": self.n_classes, "structure": self.structure.to_dict()}

    @classmethod
    def from_dict(cls, d) -> "MulticlassTreeModel":
        return cls(TreeStructure.from_dict(d["structure"]), int(d["n_classes"]))


def _tree_params(params):
    return dict(
        max_depth=params["max_depth"],
        min_leaf_weight=params["min_leaf_weight"],
        pruning_cf=params["pruning_cf"],
    )


def train_tree(data: WeightedBinaryDataset, params):
    only = single_class(data)
    if only is not None:
        return ConstantModel(only, data.dimension)
    classes = (data.targets == 1).astype(np.int64)
    structure = build_tree(data.X, classes, data.weights, 2, **_tree_params(params))
    return TreeModel(structure)


def train_tree_multiclass(X, classes, weights, n_classes, params) -> MulticlassTreeModel:
    structure = build_tree(X, np.asarray(classes), np.asarray(weights, dtype=np.float64), n_classes,
                           **_tree_params(params))
    return MulticlassTreeModel(structure, n_classes)
