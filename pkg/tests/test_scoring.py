import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from spap.core import make_rng
from spap.scoring import PruneAssignment, composite_score, hard_assign, soft_update


def test_t_one_gives_squared_column_norms(rng):
    w = rng.standard_normal((4, 6))
    x = rng.standard_normal((6, 9))
    np.testing.assert_allclose(composite_score(w, x, 1.0), (w**2).sum(axis=0))


def test_t_zero_unit_rows_gives_l1_norms(rng):
    w = rng.standard_normal((4, 6))
    x = rng.standard_normal((6, 9))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    np.testing.assert_allclose(composite_score(w, x, 0.0), np.abs(w).sum(axis=0))


def test_hand_example():
    w = np.array([[1.0, 0.0], [0.0, 2.0]])
    x = np.array([[3.0, 0.0], [0.0, 1.0]])  # row norms 3 and 1
    np.testing.assert_allclose(composite_score(w, x, 0.5), [2.0, 3.0])


def test_literal_indexing_uses_sample_columns():
    w = np.ones((2, 2))
    x = np.array([[3.0, 0.0, 5.0], [4.0, 1.0, 5.0]])
    # column norms of x are 5, 1; row norms would be sqrt(34), sqrt(42)
    np.testing.assert_allclose(composite_score(w, x, 0.0, literal_indexing=True), [10.0, 2.0])


def test_score_mix_out_of_range():
    with pytest.raises(ValueError):
        composite_score(np.ones((2, 2)), np.ones((2, 3)), 1.5)


def test_scaling_of_terms(rng):
    w = rng.standard_normal((3, 5))
    x = rng.standard_normal((5, 8))
    c = 2.5
    np.testing.assert_allclose(composite_score(c * w, x, 1.0), c**2 * composite_score(w, x, 1.0))
    np.testing.assert_allclose(composite_score(c * w, x, 0.0), c * composite_score(w, x, 0.0))
    for t in (0.0, 1.0):
        assert np.array_equal(np.argsort(composite_score(c * w, x, t)),
                              np.argsort(composite_score(w, x, t)))


def test_hard_assign_increasing_scores():
    np.testing.assert_array_equal(hard_assign([1.0, 2.0, 3.0, 4.0], 2).values, [1, 1, 0, 0])


def test_hard_assign_ties_go_to_lower_index():
    np.testing.assert_array_equal(hard_assign(np.zeros(5), 3).values, [1, 1, 1, 0, 0])


def test_hard_assign_matches_sort_oracle():
    scores = make_rng(11).standard_normal(30)
    lam = 9
    threshold = sorted(scores)[lam - 1]
    expected = (scores <= threshold).astype(float)
    np.testing.assert_array_equal(hard_assign(scores, lam).values, expected)


@pytest.mark.parametrize("lam", [0, 4])
def test_hard_assign_lambda_range(lam):
    with pytest.raises(ValueError):
        hard_assign(np.arange(4.0), lam)


@settings(max_examples=60, deadline=None)
@given(scores=arrays(np.float64, st.integers(2, 40), elements=st.floats(0, 1e6)),
       data=st.data())
def test_hard_assign_is_always_hard(scores, data):
    lam = data.draw(st.integers(1, scores.size - 1))
    a = hard_assign(scores, lam)
    assert a.is_hard
    kept_max = scores[a.values == 0].min()
    assert scores[a.values == 1].max() <= kept_max


def test_soft_update_examples():
    prev = PruneAssignment([1.0, 0.0], 1)
    new = PruneAssignment([0.0, 1.0], 1)
    np.testing.assert_allclose(soft_update(prev, new, 0.3).values, [0.3, 0.7])
    np.testing.assert_array_equal(soft_update(prev, prev, 0.3).values, prev.values)
    np.testing.assert_allclose(soft_update(prev, new, 1e-12).values, new.values, atol=1e-11)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1])
def test_soft_update_alpha_range(alpha):
    a = PruneAssignment([1.0, 0.0], 1)
    with pytest.raises(ValueError):
        soft_update(a, a, alpha)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(2, 30), steps=st.integers(1, 20),
       alpha=st.floats(0.01, 0.99))
def test_soft_update_preserves_sum(seed, n, steps, alpha):
    rng = make_rng(seed)
    lam = int(rng.integers(1, n))
    s = hard_assign(rng.standard_normal(n), lam)
    for _ in range(steps):
        s = soft_update(s, hard_assign(rng.standard_normal(n), lam), alpha)
        assert abs(s.values.sum() - lam) < 1e-12 * n
        assert s.values.min() >= 0 and s.values.max() <= 1


def test_assignment_rejects_out_of_range():
    with pytest.raises(ValueError):
        PruneAssignment([1.2, -0.2], 1)
