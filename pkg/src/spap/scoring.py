"""Channel scores and updates of the relaxed pruning indicator ``s``.

``s[j] == 1`` marks column ``j`` of the down projection for removal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ShapeError, as_matrix

__all__ = ["PruneAssignment", "composite_score", "hard_assign", "soft_update"]


@dataclass(frozen=True)
class PruneAssignment:
    values: np.ndarray
    target_lambda: int

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(v)) or v.min(initial=0.0) < 0.0 or v.max(initial=0.0) > 1.0:
            raise ValueError("assignment entries must lie in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    @property
    def is_hard(self) -> bool:
        v = self.values
        return bool(np.all((v == 0.0) | (v == 1.0)) and int(v.sum()) == self.target_lambda)

    @property
    def pruned(self) -> np.ndarray:
        """Indices with nonzero indicator, ascending."""
        return np.flatnonzero(self.values)


def composite_score(w, x, t: float, literal_indexing: bool = False) -> np.ndarray:
    """Blend of squared column norm and a column-wise Wanda score.

    ``score[j] = t * ||w[:, j]||_2^2 + (1 - t) * ||w[:, j]||_1 * ||x[j, :]||_2``

    ``x[j, :]`` is input feature ``j`` over all samples. With
    ``literal_indexing=True`` the sample column ``x[:, j]`` is used instead,
    which needs at least ``n`` samples.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"score mix t must lie in [0, 1], got {t}")
    w = as_matrix(w, "w")
    x = as_matrix(x, "x")
    n = w.shape[1]
    if literal_indexing:
        if x.shape[1] < n:
            raise ShapeError(f"literal indexing needs >= {n} samples, x is {x.shape}")
        feat = np.linalg.norm(x[:, :n], axis=0)
    else:
        if x.shape[0] != n:
            raise ShapeError(f"composite_score: w is {w.shape} but x is {x.shape}")
        feat = np.linalg.norm(x, axis=1)
    sq = np.sum(w * w, axis=0)
    l1 = np.sum(np.abs(w), axis=0)
    return t * sq + (1.0 - t) * l1 * feat


def hard_assign(scores, lam: int) -> PruneAssignment:
    """Mark the ``lam`` smallest scores; ties go to the lower index."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    n = scores.size
    if not 0 < lam < n:
        raise ValueError(f"lambda must satisfy 0 < lambda < {n}, got {lam}")
    order = np.argsort(scores, kind="stable")
    values = np.zeros(n)
    values[order[:lam]] = 1.0
    return PruneAssignment(values, lam)


def soft_update(prev: PruneAssignment, hard_new: PruneAssignment, alpha: float) -> PruneAssignment:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if len(prev) != len(hard_new) or prev.target_lambda != hard_new.target_lambda:
        raise ShapeError("soft_update: assignments differ in length or target lambda")
    values = alpha * prev.values + (1.0 - alpha) * hard_new.values
    # rounding can push a blend of 0/1 entries a hair outside [0, 1]
    return PruneAssignment(np.clip(values, 0.0, 1.0), prev.target_lambda)
