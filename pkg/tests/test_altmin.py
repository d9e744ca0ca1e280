import numpy as np
import pytest

from spap.altmin import (
    AdamState,
    AltMinConfig,
    adam_recover,
    adam_step,
    altmin_recover,
    down_closed_form,
    mlp_gradients,
    mlp_objective,
)
from spap.core import ShapeError, make_rng, swish
from spap.glu import GluLayer, glu_forward, prune_by_correspondence
from spap.penalty import penalty_prune


def random_layer(rng, m, n, scale=1.0):
    return GluLayer(scale * rng.standard_normal((n, m)), scale * rng.standard_normal((n, m)),
                    scale * rng.standard_normal((m, n)))


def test_objective_examples(rng):
    layer = random_layer(rng, 3, 5)
    x = rng.standard_normal((3, 8))
    assert mlp_objective(layer, x, glu_forward(layer, x).output) == 0.0
    zero = GluLayer(np.zeros((3, 2)), np.zeros((3, 2)), np.zeros((2, 3)))
    assert mlp_objective(zero, np.ones((2, 2)), np.ones((2, 2))) == 4.0


def test_objective_elementwise_oracle():
    rng = make_rng(9)
    layer = random_layer(rng, 2, 3)
    x = rng.standard_normal((2, 4))
    y = rng.standard_normal((2, 4))
    total = 0.0
    for a in range(2):
        for t in range(4):
            out = 0.0
            for i in range(3):
                up = sum(layer.w_up[i, k] * x[k, t] for k in range(2))
                gate = sum(layer.w_gate[i, k] * x[k, t] for k in range(2))
                out += layer.w_down[a, i] * up * float(swish(gate))
            total += (out - y[a, t]) ** 2
    assert mlp_objective(layer, x, y) == pytest.approx(total, rel=1e-12)


def test_gradients_vanish_at_exact_fit(rng):
    layer = random_layer(rng, 3, 4)
    x = rng.standard_normal((3, 6))
    for g in mlp_gradients(layer, x, glu_forward(layer, x).output):
        assert not g.any()


def test_gradients_match_central_differences():
    rng = make_rng(31)
    layer = random_layer(rng, 5, 7)
    x = rng.standard_normal((5, 15))
    y = rng.standard_normal((5, 15))
    grads = dict(zip(("w_up", "w_gate", "w_down"), mlp_gradients(layer, x, y)))
    h = 1e-5
    for name, g in grads.items():
        w = getattr(layer, name)
        for _ in range(50):
            i, j = rng.integers(w.shape[0]), rng.integers(w.shape[1])
            wp, wm = w.copy(), w.copy()
            wp[i, j] += h
            wm[i, j] -= h
            fd = (mlp_objective(layer.replace(**{name: wp}), x, y)
                  - mlp_objective(layer.replace(**{name: wm}), x, y)) / (2 * h)
            assert abs(fd - g[i, j]) <= 1e-4 * max(abs(fd), abs(g[i, j]))


def test_down_gradient_with_zero_target(rng):
    layer = random_layer(rng, 3, 5)
    x = rng.standard_normal((3, 7))
    z = glu_forward(layer, x).intermediate
    _, _, g_down = mlp_gradients(layer, x, np.zeros((3, 7)))
    np.testing.assert_allclose(g_down, 2 * layer.w_down @ z @ z.T, rtol=1e-12)


def test_gradient_shape_check(rng):
    with pytest.raises(ShapeError):
        mlp_gradients(random_layer(rng, 3, 4), np.ones((3, 5)), np.ones((3, 6)))


def test_down_closed_form_examples(rng):
    y = rng.standard_normal((3, 4))
    np.testing.assert_allclose(down_closed_form(np.eye(4), y, 0.0), y, atol=1e-12)
    z = rng.standard_normal((5, 40))
    c = rng.standard_normal((3, 5))
    np.testing.assert_allclose(down_closed_form(z, c @ z, 0.0), c, atol=1e-9)


def test_down_step_never_increases_objective(rng):
    layer = random_layer(rng, 4, 6)
    x = rng.standard_normal((4, 30))
    y = rng.standard_normal((4, 30))
    z = glu_forward(layer, x).intermediate
    before = mlp_objective(layer, x, y)
    for stab in (0.0, None, 1e-3):
        after = mlp_objective(layer.replace(w_down=down_closed_form(z, y, stab)), x, y)
        assert after <= before
        g = 2 * (down_closed_form(z, y, stab) @ z - y) @ z.T
        if stab in (0.0, None):
            assert np.linalg.norm(g) <= 1e-6 * np.linalg.norm(y @ z.T)


def test_adam_step_reference_values():
    cfg = AltMinConfig(learning_rate=0.1)
    state = AdamState()
    p = {"w": np.array([[1.0, -2.0]])}
    g = {"w": np.array([[0.5, -4.0]])}
    p = adam_step(state, p, g, cfg)
    # first bias-corrected step moves each entry by lr * sign(g) (up to eps)
    np.testing.assert_allclose(p["w"], [[0.9, -1.9]], atol=1e-7)
    assert state.step == 1


def test_recovery_at_optimum_keeps_weights(rng):
    layer = random_layer(rng, 4, 6)
    x = rng.standard_normal((4, 50))
    y = glu_forward(layer, x).output
    out, trace = altmin_recover(layer, x, y, AltMinConfig(iterations=10))
    assert trace[0] == 0.0
    assert mlp_objective(out, x, y) == 0.0
    for name in ("w_up", "w_gate", "w_down"):
        assert np.max(np.abs(getattr(out, name) - getattr(layer, name))) <= 1e-8


def test_unpruned_far_start_decreases_strictly():
    rng = make_rng(77)
    target = random_layer(rng, 6, 10, 0.5)
    layer = random_layer(rng, 6, 10, 0.5)
    x = rng.standard_normal((6, 80))
    y = glu_forward(target, x).output
    _, trace = altmin_recover(layer, x, y, AltMinConfig(iterations=5, learning_rate=1e-2))
    assert np.all(np.diff(trace) < 0)


def test_final_objective_not_above_initial(rng):
    layer = random_layer(rng, 4, 8)
    x = rng.standard_normal((4, 40))
    y = rng.standard_normal((4, 40))
    for recover in (altmin_recover, adam_recover):
        out, trace = recover(layer, x, y, AltMinConfig(learning_rate=0.5))
        assert mlp_objective(out, x, y) <= trace[0]


def _pruned_instance(seed, m=8, n=16, p=96, lam=5):
    rng = make_rng(seed)
    layer = random_layer(rng, m, n, 0.4)
    x = rng.standard_normal((m, p))
    dense = glu_forward(layer, x)
    res = penalty_prune(layer.w_down, dense.intermediate, dense.output, lam)
    pruned = prune_by_correspondence(layer, res.keep).replace(w_down=res.w)
    return pruned, x, dense.output


def test_altmin_beats_plain_adam_on_80_percent():
    wins = 0
    for seed in range(100):
        pruned, x, y = _pruned_instance(seed)
        _, alt = altmin_recover(pruned, x, y)
        _, gd = adam_recover(pruned, x, y)
        wins += alt[-1] < gd[-1]
    assert wins >= 80


def test_too_few_samples_warns(rng):
    layer = random_layer(rng, 3, 10)
    x = rng.standard_normal((3, 6))
    with pytest.warns(RuntimeWarning):
        altmin_recover(layer, x, rng.standard_normal((3, 6)), AltMinConfig(iterations=1))


@pytest.mark.parametrize("kw", [dict(iterations=-1), dict(learning_rate=0.0), dict(adam_beta1=1.0),
                                dict(adam_beta2=0.0), dict(adam_eps=0.0), dict(down_stabilizer=-1.0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        AltMinConfig(**kw)
