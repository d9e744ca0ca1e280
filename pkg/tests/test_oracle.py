import itertools
import math

import numpy as np
import pytest

from spap.core import make_rng
from spap.oracle import (
    GuardExceededError,
    magnitude_baseline,
    oracle_best_subset,
    subset_objective,
    theorem1_roundtrip,
)


def lstsq_objective(x, y, keep):
    """Independent route: QR-based lstsq on the kept rows."""
    xk = x[list(keep)]
    w = np.linalg.lstsq(xk.T, y.T, rcond=None)[0].T
    r = w @ xk - y
    return 0.5 * float(np.sum(r * r))


def test_lambda_zero_is_least_squares(rng):
    x = rng.standard_normal((5, 20))
    y = rng.standard_normal((3, 20))
    res = oracle_best_subset(x, y, 0)
    assert res.best_keep == tuple(range(5))
    assert res.evaluated_subsets == 1
    assert res.best_objective == pytest.approx(lstsq_objective(x, y, range(5)), rel=1e-10)


def test_planted_keep_set_recovered():
    rng = make_rng(4)
    x = rng.standard_normal((8, 30))
    keep = (0, 2, 3, 6, 7)
    y = rng.standard_normal((4, 5)) @ x[list(keep)]
    res = oracle_best_subset(x, y, 3)
    assert res.best_keep == keep
    assert res.best_objective == pytest.approx(0.0, abs=1e-20)


def test_best_subset_dominates_shuffled_reenumeration():
    rng = make_rng(8)
    x = rng.standard_normal((8, 25))
    y = rng.standard_normal((5, 25))
    res = oracle_best_subset(x, y, 3)
    assert res.evaluated_subsets == math.comb(8, 3) == 56
    subsets = list(itertools.combinations(range(8), 5))
    for idx in rng.permutation(len(subsets)):
        assert res.best_objective <= lstsq_objective(x, y, subsets[idx]) * (1 + 1e-10)
    assert res.best_objective == pytest.approx(lstsq_objective(x, y, res.best_keep), rel=1e-10)


def test_permutation_equivariance(rng):
    x = rng.standard_normal((7, 20))
    y = rng.standard_normal((3, 20))
    perm = rng.permutation(7)
    a = oracle_best_subset(x, y, 2)
    b = oracle_best_subset(x[perm], y, 2)
    assert sorted(perm[list(b.best_keep)]) == list(a.best_keep)
    assert b.best_objective == pytest.approx(a.best_objective, rel=1e-10)


def test_guard():
    x = np.ones((30, 40))
    with pytest.raises(GuardExceededError, match=str(math.comb(30, 15))):
        oracle_best_subset(x, np.ones((2, 40)), 15)


def test_magnitude_baseline_planted():
    rng = make_rng(12)
    w0 = rng.standard_normal((4, 9))
    w0[:, [1, 5, 6]] = 0.0
    x = rng.standard_normal((9, 30))
    y = w0 @ x
    keep, obj = magnitude_baseline(w0, x, y, 3)
    res = oracle_best_subset(x, y, 3)
    assert tuple(keep) == res.best_keep
    assert obj == pytest.approx(0.0, abs=1e-20)


def test_magnitude_never_beats_oracle():
    for seed in range(30):
        rng = make_rng(seed)
        w0 = rng.standard_normal((4, 8))
        x = rng.standard_normal((8, 20))
        y = w0 @ x + 0.3 * rng.standard_normal((4, 20))
        _, obj = magnitude_baseline(w0, x, y, 3)
        assert obj >= oracle_best_subset(x, y, 3).best_objective


def test_subset_objective_empty_keep(rng):
    y = rng.standard_normal((2, 5))
    assert subset_objective(np.ones((3, 5)), y, []) == 0.5 * np.sum(y * y)


def test_roundtrip_binary_input_is_fixed_point():
    w = np.array([[1.0, 0.0, 2.0, 0.0]])
    s = np.array([0.0, 1.0, 0.0, 1.0])
    np.testing.assert_array_equal(theorem1_roundtrip(w, s, 2), s)


def test_roundtrip_fractional_example():
    w = np.array([[0.0, 0.0, 3.0, 0.0], [0.0, 0.0, -1.0, 0.0]])
    s = np.array([0.5, 0.5, 0.0, 1.0])
    out = theorem1_roundtrip(w, s, 2, subset=[0, 1])
    np.testing.assert_array_equal(out, [1.0, 1.0, 0.0, 0.0])
    assert np.max(np.abs(w * out)) == 0.0


@pytest.mark.parametrize("w, s, lam", [
    (np.array([[1.0, 0.0]]), np.array([1.0, 0.0]), 1),       # w diag(s) != 0
    (np.array([[0.0, 0.0]]), np.array([0.7, 0.7]), 1),       # sum(s) != lambda
    (np.array([[0.0, 0.0, 1.0]]), np.array([1.0, 0.0, 0.0]), 2),
])
def test_roundtrip_rejects_bad_input(w, s, lam):
    with pytest.raises(ValueError):
        theorem1_roundtrip(w, s, lam)


def test_roundtrip_rejects_subset_outside_support():
    with pytest.raises(ValueError):
        theorem1_roundtrip(np.zeros((1, 3)), np.array([0.5, 0.5, 0.0]), 1, subset=[2])
