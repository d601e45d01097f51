"""Bernoulli naive Bayes with Laplace smoothing.

Instance weights are rescaled to effective counts (``w_i * n``) before
smoothing, so uniform weights reproduce the textbook counting estimates.
Absent features contribute ``log(1 - p)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..corpus import as_csr
from .base import BinaryModel, ConstantModel, WeightedBinaryDataset, single_class


def _fit(X, classes, weights, n_classes, alpha):
    n = X.shape[0]
    counts = np.asarray(weights, dtype=np.float64) * n
    C = np.zeros((n, n_classes))
    C[np.arange(n), classes] = counts
    class_count = C.sum(axis=0)
    feature_count = np.asarray(X.T @ C).T            # n_classes x d
    log_prior = np.log(class_count / class_count.sum())
    p = (feature_count + alpha) / (class_count[:, None] + 2 * alpha)
    return log_prior, np.log(p), np.log1p(-p)


def _joint(X, log_prior, log_p, log_q):
    X = (X != 0).astype(np.float64)
    return log_prior + log_q.sum(axis=1) + np.asarray(X @ (log_p - log_q).T)


@dataclass(frozen=True, eq=False)
class NaiveBayesModel(BinaryModel):
    """Score is the posterior log-odds of +1 against -1."""

    log_prior: np.ndarray   # [neg, pos]
    log_p: np.ndarray       # 2 x d, log P(f=1 | class)
    log_q: np.ndarray       # 2 x d, log P(f=0 | class)
    kind: str = "naive_bayes"

    @property
    def dimension(self) -> int:
        return self.log_p.shape[1]

    def decision_function(self, X) -> np.ndarray:
        j = _joint(self._check(X), self.log_prior, self.log_p, self.log_q)
        return j[:, 1] - j[:, 0]

    def to_dict(self) -> dict:
        return {
            "kind": "naive_bayes",
            "log_prior": self.log_prior.tolist(),
            "log_p": self.log_p.tolist(),
            "log_q": self.log_q.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "NaiveBayesModel":
        return cls(*(np.asarray(d[k], dtype=np.float64) for k in ("log_prior", "log_p", "log_q")))


@dataclass(frozen=True, eq=False)
class MulticlassNaiveBayesModel:
    log_prior: np.ndarray
    log_p: np.ndarray
    log_q: np.ndarray
    kind: str = "naive_bayes"

    @property
    def n_classes(self) -> int:
        return len(self.log_prior)

    @property
    def dimension(self) -> int:
        return self.log_p.shape[1]

    def class_scores(self, X) -> np.ndarray:
        return _joint(as_csr(X, self.dimension), self.log_prior, self.log_p, self.log_q)

    def to_dict(self) -> dict:
        return {
            "kind": "naive_bayes",
            "log_prior": self.log_prior.tolist(),
            "log_p": self.log_p.tolist(),
            "log_q": self.log_q.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "MulticlassNaiveBayesModel":
        return cls(*(np.asarray(d[k], dtype=np.float64) for k in ("log_prior", "log_p", "log_q")))


def train_naive_bayes(data: WeightedBinaryDataset, params):
    only = single_class(data)
    if only is not None:
        return ConstantModel(only, data.dimension)
    classes = (data.targets == 1).astype(np.int64)
    return NaiveBayesModel(*_fit(data.X, classes, data.weights, 2, params["laplace_alpha"]))


def train_naive_bayes_multiclass(X, classes, weights, n_classes, params) -> MulticlassNaiveBayesModel:
    X = as_csr(X)
    return MulticlassNaiveBayesModel(*_fit(X, np.asarray(classes), weights, n_classes, params["laplace_alpha"]))
