"""Reference solvers for certifying column-subset choices at small sizes."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import ShapeError, as_matrix, frobenius_error, least_squares

__all__ = [
    "DEFAULT_GUARD",
    "GuardExceededError",
    "OracleResult",
    "subset_objective",
    "oracle_best_subset",
    "magnitude_baseline",
    "theorem1_roundtrip",
]

DEFAULT_GUARD = 10**6
FEASIBILITY_TOL = 1e-10


class GuardExceededError(ValueError):
    def __init__(self, count: int, guard: int):
        super().__init__(f"C(n, lambda) = {count} subsets exceeds the enumeration guard {guard}")
        self.count = count
        self.guard = guard


@dataclass(frozen=True)
class OracleResult:
    best_keep: tuple[int, ...]
    best_objective: float
    evaluated_subsets: int


def subset_objective(x: np.ndarray, y: np.ndarray, keep) -> float:
    """Optimal 1/2 ||W X_keep - Y||^2 over W for a fixed kept set."""
    keep = list(keep)
    if not keep:
        return 0.5 * float(np.sum(y * y))
    x_keep = x[keep]
    return frobenius_error(least_squares(x_keep, y), x_keep, y)


def oracle_best_subset(x, y, lam: int, guard: int = DEFAULT_GUARD) -> OracleResult:
    """Exhaustively try every way of pruning ``lam`` of the ``n`` rows of ``x``.

    Subsets are visited in lexicographic order of the pruned indices and
    only a strictly smaller objective replaces the incumbent.
    """
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    n = x.shape[0]
    if x.shape[1] != y.shape[1]:
        raise ShapeError(f"oracle_best_subset: x is {x.shape} but y is {y.shape}")
    if not 0 <= lam < n:
        raise ValueError(f"lambda must satisfy 0 <= lambda < {n}, got {lam}")
    count = math.comb(n, lam)
    if count > guard:
        raise GuardExceededError(count, guard)

    best_keep, best_obj = None, math.inf
    full = range(n)
    for pruned in itertools.combinations(full, lam):
        drop = set(pruned)
        keep = tuple(i for i in full if i not in drop)
        obj = subset_objective(x, y, keep)
        if obj < best_obj:
            best_keep, best_obj = keep, obj
    return OracleResult(best_keep, best_obj, count)


def magnitude_baseline(w0, x, y, lam: int) -> tuple[np.ndarray, float]:
    """Drop the ``lam`` columns of ``w0`` with smallest L2 norm, refit the rest."""
    w0 = as_matrix(w0, "w0")
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    n = w0.shape[1]
    if x.shape[0] != n or y.shape != (w0.shape[0], x.shape[1]):
        raise ShapeError(f"magnitude_baseline: w0 {w0.shape}, x {x.shape}, y {y.shape}")
    if not 0 <= lam < n:
        raise ValueError(f"lambda must satisfy 0 <= lambda < {n}, got {lam}")
    order = np.argsort(np.linalg.norm(w0, axis=0), kind="stable")
    keep = np.sort(order[lam:])
    return keep, subset_objective(x, y, keep)


def theorem1_roundtrip(w, s, lam: int, subset=None) -> np.ndarray:
    """Binarize a feasible fractional indicator without touching ``w``.

    ``(w, s)`` must satisfy ``w diag(s) = 0``, ``sum(s) = lam`` and
    ``0 <= s <= 1``. Any ``lam`` indices from the support of ``s`` may
    carry the ones; ``subset`` picks them (default: the lowest indices).
    Because ``w`` is returned unchanged the objective cannot move, and
    every pruned column of ``w`` is already zero, so the binary pair stays
    feasible.
    """
    w = as_matrix(w, "w")
    s = np.asarray(s, dtype=np.float64).ravel()
    n = w.shape[1]
    if s.size != n:
        raise ShapeError(f"s has {s.size} entries, w has {n} columns")
    if np.any(s < 0) or np.any(s > 1) or abs(s.sum() - lam) > FEASIBILITY_TOL * max(1, n):
        raise ValueError("s is not in the capped simplex {0 <= s <= 1, sum(s) = lambda}")
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    if np.max(np.abs(w * s), initial=0.0) > FEASIBILITY_TOL * scale:
        raise ValueError("w diag(s) != 0: input is infeasible")
    support = np.flatnonzero(s)
    if support.size < lam:
        raise ValueError(f"support of s has {support.size} < lambda = {lam} entries")
    chosen = support[:lam] if subset is None else np.asarray(subset, dtype=np.intp)
    if chosen.size != lam or not np.all(np.isin(chosen, support)):
        raise ValueError("subset must be lambda distinct indices from supp(s)")
    if np.unique(chosen).size != lam:
        raise ValueError("subset must be lambda distinct indices from supp(s)")
    s_bin = np.zeros(n)
    s_bin[chosen] = 1.0
    # the binary pair inherits feasibility from supp(s_bin) ⊆ supp(s)
    assert np.max(np.abs(w * s_bin), initial=0.0) <= FEASIBILITY_TOL * scale
    return s_bin
