"""Penalty method for choosing which down-projection columns to prune.

The bilinear constraint ``W diag(s) = 0`` is replaced by the penalty
``rho/2 * sum_i s_i ||W[:, i]||^2`` with ``s`` relaxed to the capped simplex
``{s in [0,1]^n : sum(s) = lambda}``. Each iteration re-scores the columns
of the current ``W``, moves ``s`` part of the way towards the hard
assignment of the ``lambda`` lowest scores, solves the column-weighted ridge
problem for ``W`` in closed form, and grows ``rho`` geometrically. A final
hard assignment fixes the mask and the surviving columns are refit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ShapeError, as_matrix, frobenius_error, least_squares, solve_spd_escalating
from .scoring import PruneAssignment, composite_score, hard_assign, soft_update

__all__ = [
    "PenaltyConfig",
    "PenaltyRecord",
    "PenaltyResult",
    "ridge_update",
    "penalty_term",
    "penalty_prune",
    "default_rho_init",
    "default_stabilizer",
]


@dataclass(frozen=True)
class PenaltyConfig:
    """Hyperparameters of the penalty method.

    ``rho_init`` and ``stabilizer`` default to data-scaled values
    (``trace(XX^T)/n`` and ``1e-8 * mean(diag(XX^T))``) when left as None.
    """

    iterations: int = 15
    score_mix: float = 0.5
    soft_alpha: float = 0.3
    rho_init: float | None = None
    rho_growth: float = 2.0
    stabilizer: float | None = None
    literal_score_indexing: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 <= self.score_mix <= 1.0:
            raise ValueError("score_mix must lie in [0, 1]")
        if not 0.0 < self.soft_alpha < 1.0:
            raise ValueError("soft_alpha must lie in (0, 1)")
        if self.rho_init is not None and not self.rho_init > 0:
            raise ValueError("rho_init must be > 0")
        if not self.rho_growth > 1.0:
            raise ValueError("rho_growth must be > 1")
        if self.stabilizer is not None and self.stabilizer < 0:
            raise ValueError("stabilizer must be >= 0")


@dataclass(frozen=True)
class PenaltyRecord:
    objective: float   # 1/2 ||WX - Y||_F^2
    penalty: float     # sum_i s_i ||W[:, i]||^2, unweighted
    rho: float         # penalty weight for the next iteration
    changed: int       # entries of the hard pattern that flipped


@dataclass
class PenaltyResult:
    w: np.ndarray                 # m x (n - lambda), refit on kept columns
    keep: np.ndarray              # kept column indices, ascending
    trace: list[PenaltyRecord]
    assignment: PruneAssignment   # final hard s*
    objective: float
    w_penalized: np.ndarray = field(repr=False, default=None)  # W^(K), m x n


def default_rho_init(x: np.ndarray) -> float:
    return float(np.sum(x * x)) / x.shape[0]


def default_stabilizer(x: np.ndarray) -> float:
    return 1e-8 * float(np.sum(x * x)) / x.shape[0]


def penalty_term(w: np.ndarray, s) -> float:
    s = s.values if isinstance(s, PruneAssignment) else np.asarray(s, dtype=np.float64)
    return float(np.dot(s, np.sum(w * w, axis=0)))


def ridge_update(x, y, s, rho: float, delta: float = 0.0) -> np.ndarray:
    """Closed-form minimizer of the penalized objective in ``W``.

    ``W = Y X^T (X X^T + rho diag(s) + delta I)^{-1}``, with ``delta``
    escalated tenfold (three times at most) if the factorization fails.
    """
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    s = s.values if isinstance(s, PruneAssignment) else np.asarray(s, dtype=np.float64).ravel()
    n = x.shape[0]
    if x.shape[1] != y.shape[1] or s.size != n:
        raise ShapeError(f"ridge_update: x {x.shape}, y {y.shape}, s has {s.size} entries")
    if rho < 0 or delta < 0:
        raise ValueError("rho and delta must be nonnegative")
    gram = x @ x.T
    gram[np.diag_indices(n)] += rho * s
    return solve_spd_escalating(gram, x @ y.T, delta).T


def penalty_prune(w0, x, y, lam: int, cfg: PenaltyConfig | None = None) -> PenaltyResult:
    """Select ``lam`` columns of ``w0`` to prune and refit the rest.

    ``x`` is the n x p input to the down projection, ``y`` the m x p target.
    """
    cfg = cfg or PenaltyConfig()
    w0 = as_matrix(w0, "w0")
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    m, n = w0.shape
    if x.shape[0] != n or y.shape != (m, x.shape[1]):
        raise ShapeError(f"penalty_prune: w0 {w0.shape}, x {x.shape}, y {y.shape}")
    if not 0 < lam < n:
        raise ValueError(f"lambda must satisfy 0 < lambda < {n}, got {lam}")

    def score(w):
        return composite_score(w, x, cfg.score_mix, cfg.literal_score_indexing)

    rho = cfg.rho_init if cfg.rho_init is not None else default_rho_init(x)
    delta = cfg.stabilizer if cfg.stabilizer is not None else default_stabilizer(x)

    w = w0
    s = hard_assign(score(w), lam)
    prev_hard = s
    trace = [PenaltyRecord(frobenius_error(w, x, y), penalty_term(w, s), rho, 0)]
    for _ in range(cfg.iterations):
        hard = hard_assign(score(w), lam)
        changed = int(np.count_nonzero(hard.values != prev_hard.values))
        prev_hard = hard
        s = soft_update(s, hard, cfg.soft_alpha)
        w = ridge_update(x, y, s, rho, delta)
        rho = cfg.rho_growth * rho
        trace.append(PenaltyRecord(frobenius_error(w, x, y), penalty_term(w, s), rho, changed))

    final = hard_assign(score(w), lam)
    keep = np.flatnonzero(final.values == 0.0)
    x_keep = x[keep]
    w_star = least_squares(x_keep, y)
    return PenaltyResult(
        w=w_star,
        keep=keep,
        trace=trace,
        assignment=final,
        objective=frobenius_error(w_star, x_keep, y),
        w_penalized=w,
    )
