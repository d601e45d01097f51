"""One-level decision tree on feature presence."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import BinaryModel, ConstantModel, WeightedBinaryDataset, majority_sign


@dataclass(frozen=True, eq=False)
class StumpModel(BinaryModel):
    """``present_sign`` if ``feature`` is set in the input, else ``absent_sign``."""

    feature: int
    present_sign: int
    absent_sign: int
    dimension: int
    kind: str = "stump"

    @property
    def polarity(self) -> int:
        return self.present_sign

    @property
    def default_side(self) -> int:
        return self.absent_sign

    def decision_function(self, X) -> np.ndarray:
        X = self._check(X)
        present = X[:, self.feature].toarray().ravel() != 0
        return np.where(present, float(self.present_sign), float(self.absent_sign))

    def to_dict(self) -> dict:
        return {
            "kind": "stump",
            "feature": self.feature,
            "present_sign": self.present_sign,
            "absent_sign": self.absent_sign,
            "dimension": self.dimension,
        }

    @classmethod
    def from_dict(cls, d) -> "StumpModel":
        return cls(int(d["feature"]), int(d["present_sign"]), int(d["absent_sign"]), int(d["dimension"]))


def train_stump(data: WeightedBinaryDataset):
    """Exhaustive search over features and both polarities.

    The constant majority predictor is the starting candidate, so a stump
    is only returned when it is strictly better; among equal stumps the
    lowest feature index wins.
    """
    w, y, X = data.weights, data.targets, data.X
    const = majority_sign(data)
    best_err = float(w[y != const].sum())
    best = ConstantModel(const, data.dimension)

    pos = np.where(y == 1, w, 0.0)
    neg = np.where(y == -1, w, 0.0)
    pos_present = X.T @ pos
    neg_present = X.T @ neg
    total_pos, total_neg = pos.sum(), neg.sum()
    # present -> +1, absent -> -1
    err_direct = neg_present + (total_pos - pos_present)
    # present -> -1, absent -> +1
    err_flipped = pos_present + (total_neg - neg_present)
    errs = np.minimum(err_direct, err_flipped)
    if errs.size:
        f = int(np.argmin(errs))
        if errs[f] < best_err - 1e-15:
            if err_direct[f] <= err_flipped[f]:
                best = StumpModel(f, 1, -1, data.dimension)
            else:
                best = StumpModel(f, -1, 1, data.dimension)
    return best
