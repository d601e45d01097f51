"""Linear soft-margin SVM trained by sequential minimal optimization.

Solves the dual

    max  sum(a) - 1/2 sum_ij a_i a_j y_i y_j <x_i, x_j>
    s.t. 0 <= a_i <= C_i,  sum_i a_i y_i = 0

with a per-instance box ``C_i = C * w_i * n`` so instance weights act as
misclassification costs.  Pairs are picked with second-order working-set
selection (Fan, Chen and Lin, 2005) and the analytic two-variable update;
the loop stops once the maximal KKT violation drops below ``tolerance``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..errors import ConfigurationError
from .base import BinaryModel, ConstantModel, WeightedBinaryDataset, single_class

_TAU = 1e-12
# Gram matrices up to this many rows are precomputed densely.
_DENSE_GRAM_LIMIT = 4000


@dataclass(frozen=True, eq=False)
class SMOModel(BinaryModel):
    """Score is the signed margin ``w.x + b``."""

    w: np.ndarray
    b: float
    support: np.ndarray          # row indices into the training set
    dual_coef: np.ndarray        # alpha_i * y_i for the support rows
    alpha: np.ndarray | None = field(default=None, repr=False)
    n_iter: int = 0
    objective_trace: tuple[float, ...] | None = field(default=None, repr=False)
    kind: str = "smo"

    @property
    def dimension(self) -> int:
        return len(self.w)

    def decision_function(self, X) -> np.ndarray:
        X = self._check(X)
        return np.asarray(X @ self.w).ravel() + self.b

    def to_dict(self) -> dict:
        return {
            "kind": "smo",
            "w": self.w.tolist(),
            "b": float(self.b),
            "support": self.support.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "n_iter": self.n_iter,
        }

    @classmethod
    def from_dict(cls, d) -> "SMOModel":
        return cls(
            np.asarray(d["w"], dtype=np.float64),
            float(d["b"]),
            np.asarray(d["support"], dtype=np.int64),
            np.asarray(d["dual_coef"], dtype=np.float64),
            n_iter=int(d["n_iter"]),
        )


class _Kernel:
    def __init__(self, X: sp.csr_matrix):
        self.X = X
        n = X.shape[0]
        self.diag = np.asarray(X.multiply(X).sum(axis=1)).ravel()
        self.gram = np.asarray((X @ X.T).todense()) if n <= _DENSE_GRAM_LIMIT else None
        self._cache: dict[int, np.ndarray] = {}

    def column(self, i: int) -> np.ndarray:
        if self.gram is not None:
            return self.gram[:, i]
        col = self._cache.get(i)
        if col is None:
            col = np.asarray(self.X @ self.X[i].T.toarray()).ravel()
            if len(self._cache) > 256:
                self._cache.clear()
            self._cache[i] = col
        return col


def _dual_objective(alpha, G):
    # With G = Q a - 1:  sum(a) - 1/2 a'Qa = 1/2 (sum(a) - a'G)
    return 0.5 * (alpha.sum() - alpha @ G)


def solve_dual(X, y, box, tolerance, max_iter, record_objective=False):
    """Run SMO on the box-constrained dual; returns ``(alpha, G, n_iter, trace)``.

    ``G`` is the gradient of the minimization form ``1/2 a'Qa - sum(a)``.
    """
    n = X.shape[0]
    y = y.astype(np.float64)
    kernel = _Kernel(X)
    alpha = np.zeros(n)
    G = -np.ones(n)
    trace = [0.0] if record_objective else None
    it = 0
    while it < max_iter:
        minus_yG = -y * G
        up = ((y > 0) & (alpha < box)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < box))
        if not up.any() or not low.any():
            break
        up_idx = np.flatnonzero(up)
        i = int(up_idx[np.argmax(minus_yG[up_idx])])
        m = minus_yG[i]
        low_idx = np.flatnonzero(low)
        M = minus_yG[low_idx].min()
        if m - M < tolerance:
            break

        Ki = kernel.column(i)
        cand = low_idx[minus_yG[low_idx] < m]
        b_gap = m - minus_yG[cand]
        a_curv = kernel.diag[i] + kernel.diag[cand] - 2.0 * Ki[cand]
        a_curv = np.where(a_curv > 0, a_curv, _TAU)
        j = int(cand[np.argmin(-(b_gap * b_gap) / a_curv)])
        Kj = kernel.column(j)

        ai_old, aj_old = alpha[i], alpha[j]
        Ci, Cj = box[i], box[j]
        if y[i] != y[j]:
            quad = kernel.diag[i] + kernel.diag[j] - 2.0 * Ki[j]
            quad = quad if quad > 0 else _TAU
            delta = (-G[i] - G[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            else:
                if ai < 0:
                    ai, aj = 0.0, -diff
            if diff > Ci - Cj:
                if ai > Ci:
                    ai, aj = Ci, Ci - diff
            else:
                if aj > Cj:
                    aj, ai = Cj, Cj + diff
        else:
            quad = kernel.diag[i] + kernel.diag[j] - 2.0 * Ki[j]
            quad = quad if quad > 0 else _TAU
            delta = (G[i] - G[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > Ci:
                if ai > Ci:
                    ai, aj = Ci, total - Ci
            else:
                if aj < 0:
                    aj, ai = 0.0, total
            if total > Cj:
                if aj > Cj:
                    aj, ai = Cj, total - Cj
            else:
                if ai < 0:
                    ai, aj = 0.0, total

        d_i, d_j = ai - ai_old, aj - aj_old
        alpha[i], alpha[j] = ai, aj
        # Q[:, k] = y * y_k * K[:, k]
        G += y * (y[i] * d_i * Ki + y[j] * d_j * Kj)
        it += 1
        if record_objective:
            trace.append(_dual_objective(alpha, G))
    return alpha, G, it, trace


def _bias(alpha, G, y, box):
    """Intercept from free vectors, else the midpoint of the feasible range."""
    yG = y * G
    active = box > 0
    at_upper = active & (alpha >= box)
    at_lower = active & ~at_upper & (alpha <= 0)
    free = active & ~at_upper & ~at_lower
    if free.any():
        rho = yG[free].mean()
    else:
        ub_mask = (at_upper & (y < 0)) | (at_lower & (y > 0))
        lb_mask = (at_upper & (y > 0)) | (at_lower & (y < 0))
        ub = yG[ub_mask].min() if ub_mask.any() else np.inf
        lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
        if np.isfinite(ub) and np.isfinite(lb):
            rho = 0.5 * (ub + lb)
        else:
            rho = ub if np.isfinite(ub) else (lb if np.isfinite(lb) else 0.0)
    return -float(rho)


def train_smo(
    data: WeightedBinaryDataset,
    C: float = 1.0,
    tolerance: float = 1e-3,
    max_passes: int = 200,
    seed: int = 0,
    record_objective: bool = False,
):
    """Train a linear SVM on weighted binary data.

    Iterations are capped at ``max_passes * n`` pair updates.  Data with a
    single (positively weighted) class yields a :class:`ConstantModel`.
    ``seed`` is accepted for interface symmetry; the solver is
    deterministic.
    """
    if not C > 0 or not tolerance > 0:
        raise ConfigurationError("C and tolerance must be positive")
    if not max_passes > 0:
        raise ConfigurationError("max_passes must be positive")
    only = single_class(data)
    if only is not None:
        return ConstantModel(only, data.dimension)

    X = data.X
    n = X.shape[0]
    y = data.targets.astype(np.float64)
    box = C * data.weights * n
    alpha, G, n_iter, trace = solve_dual(X, y, box, tolerance, int(max_passes) * n, record_objective)

    coef = alpha * y
    w = np.asarray(X.T @ coef).ravel()
    b = _bias(alpha, G, y, box)
    support = np.flatnonzero(alpha > 0)
    return SMOModel(
        w=w,
        b=b,
        support=support,
        dual_coef=coef[support],
        alpha=alpha,
        n_iter=n_iter,
        objective_trace=None if trace is None else tuple(trace),
    )
