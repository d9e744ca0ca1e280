"""Dense matrix kernels shared by every solver in the package.

Matrices are plain ``numpy.ndarray`` objects of dtype float64 and
ndim 2. Public functions validate shapes and finiteness on entry so that
dimension mistakes surface as :class:`ShapeError` at the call site.

Random streams come from numpy's Philox-4x64 counter-based bit generator,
which produces an identical stream for a given seed on every platform.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
from scipy.special import expit

__all__ = [
    "ShapeError",
    "NumericalError",
    "NotPositiveDefiniteError",
    "as_matrix",
    "make_rng",
    "matmul",
    "spd_solve",
    "solve_spd_escalating",
    "least_squares",
    "swish",
    "swish_grad",
    "frobenius_error",
]

SYMMETRY_RTOL = 1e-10


class ShapeError(ValueError):
    """Operand shapes do not conform."""


class NumericalError(ArithmeticError):
    """A numerical kernel could not produce a finite, valid result."""


class NotPositiveDefiniteError(NumericalError):
    pass


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a C-contiguous float64 2-D array, checking finiteness."""
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"{name} contains non-finite entries")
    return arr


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Portable generator: Philox-4x64 seeded by ``seed``.

    Distinct ``stream`` values give non-overlapping substreams (Philox jumps).
    """
    bitgen = np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF)
    if stream:
        bitgen = bitgen.jumped(stream)
    return np.random.Generator(bitgen)


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    out = a @ b
    if not np.all(np.isfinite(out)):
        raise NumericalError("matmul overflowed")
    return out


def spd_solve(a, b) -> np.ndarray:
    """Solve ``a @ z = b`` for symmetric positive definite ``a`` by Cholesky.

    Raises NotPositiveDefiniteError when the factorization hits a
    non-positive pivot; callers should retry with ``a + delta * I``.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    n = a.shape[0]
    if a.shape != (n, n):
        raise ShapeError(f"spd_solve: a must be square, got {a.shape}")
    if b.shape[0] != n:
        raise ShapeError(f"spd_solve: a is {a.shape} but b is {b.shape}")
    if n == 0:
        return np.zeros_like(b)
    scale = np.max(np.abs(a))
    if np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * max(scale, 1.0):
        raise ShapeError("spd_solve: a is not symmetric")
    try:
        factor = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(
            "matrix is not positive definite; add a diagonal perturbation delta*I"
        ) from exc
    z = scipy.linalg.cho_solve(factor, b, check_finite=False)
    if not np.all(np.isfinite(z)):
        raise NotPositiveDefiniteError(
            "Cholesky solve produced non-finite values; add a diagonal perturbation delta*I"
        )
    return z


def solve_spd_escalating(a, b, delta: float = 0.0, max_escalations: int = 3) -> np.ndarray:
    """Solve ``(a + delta I) z = b``, multiplying delta by 10 on failure.

    A zero ``delta`` escalates from ``1e-10 * mean(diag(a))`` instead.
    After ``max_escalations`` failed retries the last error propagates.
    """
    a = as_matrix(a, "a")
    n = a.shape[0]
    eye = np.eye(n)
    if delta > 0:
        attempts = [delta * 10.0**k for k in range(max_escalations + 1)]
    else:
        base = 1e-10 * max(float(np.mean(np.diag(a))) if n else 0.0, 1e-12)
        attempts = [0.0] + [base * 10.0**k for k in range(max_escalations)]
    last = None
    for d in attempts:
        try:
            return spd_solve(a + d * eye if d else a, b)
        except NotPositiveDefiniteError as exc:
            last = exc
    raise NotPositiveDefiniteError(
        f"factorization failed after escalating delta to {attempts[-1]:.3g}"
    ) from last


def least_squares(x, y, delta: float = 0.0) -> np.ndarray:
    """``W`` minimizing ``||W x - y||_F^2 + delta ||W||_F^2``.

    Solves the normal equations ``W (x x^T + delta I) = y x^T`` by Cholesky,
    escalating ``delta`` if the Gram matrix is singular.
    """
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    if x.shape[1] != y.shape[1]:
        raise ShapeError(f"least_squares: x is {x.shape} but y is {y.shape}")
    return solve_spd_escalating(x @ x.T, x @ y.T, delta).T


def swish(x):
    """x * sigmoid(x); ``expit`` keeps the sigmoid stable for large |x|."""
    return x * expit(x)


def swish_grad(x):
    sig = expit(x)
    return sig * (1.0 + x * (1.0 - sig))


def frobenius_error(w, x, y) -> float:
    """Half the squared Frobenius norm of ``w @ x - y``."""
    r = matmul(w, x)
    y = as_matrix(y, "y")
    if r.shape != y.shape:
        raise ShapeError(f"frobenius_error: w@x is {r.shape} but y is {y.shape}")
    r -= y
    return 0.5 * float(np.sum(r * r))
