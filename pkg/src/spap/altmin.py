"""Weight recovery for a pruned GLU layer.

Minimizes ``f = ||W_down (W_up X * swish(W_gate X)) - Y||_F^2`` (squared
Frobenius norm, no 1/2) by alternating Adam steps on ``W_up`` and
``W_gate`` with an exact least-squares solve for ``W_down``. The plain
Adam variant on all three matrices is kept alongside for ablations.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import ShapeError, as_matrix, least_squares, swish, swish_grad
from .glu import GluLayer, glu_forward

__all__ = [
    "AltMinConfig",
    "AdamState",
    "mlp_objective",
    "mlp_gradients",
    "down_closed_form",
    "adam_step",
    "altmin_recover",
    "adam_recover",
]


@dataclass(frozen=True)
class AltMinConfig:
    iterations: int = 20
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    down_stabilizer: float | None = None  # None: 1e-8 * mean(diag(Z Z^T))

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        for name in ("adam_beta1", "adam_beta2"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if not self.adam_eps > 0:
            raise ValueError("adam_eps must be > 0")
        if self.down_stabilizer is not None and self.down_stabilizer < 0:
            raise ValueError("down_stabilizer must be >= 0")


@dataclass
class AdamState:
    """Bias-corrected Adam moments keyed by parameter name."""

    first: dict[str, np.ndarray] = field(default_factory=dict)
    second: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0


def adam_step(state: AdamState, params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
              cfg: AltMinConfig) -> dict[str, np.ndarray]:
    """One Adam update; returns new arrays and advances ``state`` in place."""
    state.step += 1
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    bc1 = 1.0 - b1**state.step
    bc2 = 1.0 - b2**state.step
    out = {}
    for name, p in params.items():
        g = grads[name]
        m = state.first.get(name)
        v = state.second.get(name)
        if m is None:
            m = np.zeros_like(p)
            v = np.zeros_like(p)
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * (g * g)
        state.first[name] = m
        state.second[name] = v
        out[name] = p - cfg.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + cfg.adam_eps)
    return out


def _check(layer: GluLayer, x: np.ndarray, y: np.ndarray):
    if x.shape[0] != layer.model_dim or y.shape != (layer.model_dim, x.shape[1]):
        raise ShapeError(
            f"layer model_dim {layer.model_dim}, x {x.shape}, y {y.shape} do not conform"
        )


def mlp_objective(layer: GluLayer, x, y) -> float:
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    _check(layer, x, y)
    r = glu_forward(layer, x).output - y
    return float(np.sum(r * r))


def mlp_gradients(layer: GluLayer, x, y) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Analytic gradients of :func:`mlp_objective` as ``(g_up, g_gate, g_down)``."""
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    _check(layer, x, y)
    a = layer.w_up @ x
    b = layer.w_gate @ x
    act = swish(b)
    z = a * act
    r = 2.0 * (layer.w_down @ z - y)
    back = layer.w_down.T @ r
    g_down = r @ z.T
    g_up = (back * act) @ x.T
    g_gate = (back * a * swish_grad(b)) @ x.T
    return g_up, g_gate, g_down


def down_closed_form(z, y, stabilizer: float | None = None) -> np.ndarray:
    """``Y Z^T (Z Z^T + stabilizer I)^{-1}``; None picks ``1e-8 * mean(diag(Z Z^T))``."""
    z = as_matrix(z, "z")
    if stabilizer is None:
        stabilizer = 1e-8 * float(np.sum(z * z)) / max(z.shape[0], 1)
    return least_squares(z, y, stabilizer)


def altmin_recover(layer: GluLayer, x, y, cfg: AltMinConfig | None = None
                   ) -> tuple[GluLayer, np.ndarray]:
    """Alternate Adam steps on up/gate with an exact ``W_down`` solve.

    Returns the lowest-objective iterate seen (the input layer counts as
    iterate 0) and the objective after each iteration, starting with the
    initial value.
    """
    cfg = cfg or AltMinConfig()
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    _check(layer, x, y)
    if x.shape[1] < layer.hidden_dim:
        warnings.warn(
            f"{x.shape[1]} samples < {layer.hidden_dim} hidden channels: "
            "Z Z^T is singular and W_down relies on the stabilizer",
            RuntimeWarning,
            stacklevel=2,
        )
    state = AdamState()
    trace = [mlp_objective(layer, x, y)]
    best, best_obj = layer, trace[0]
    params = {"w_up": layer.w_up, "w_gate": layer.w_gate}
    for _ in range(cfg.iterations):
        g_up, g_gate, _ = mlp_gradients(layer, x, y)
        params = adam_step(state, params, {"w_up": g_up, "w_gate": g_gate}, cfg)
        z = (params["w_up"] @ x) * swish(params["w_gate"] @ x)
        w_down = down_closed_form(z, y, cfg.down_stabilizer)
        layer = GluLayer(params["w_up"], params["w_gate"], w_down)
        trace.append(mlp_objective(layer, x, y))
        if trace[-1] < best_obj:
            best, best_obj = layer, trace[-1]
    return best, np.asarray(trace)


def adam_recover(layer: GluLayer, x, y, cfg: AltMinConfig | None = None
                 ) -> tuple[GluLayer, np.ndarray]:
    """Plain Adam on all three matrices; same contract as :func:`altmin_recover`."""
    cfg = cfg or AltMinConfig()
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    _check(layer, x, y)
    state = AdamState()
    trace = [mlp_objective(layer, x, y)]
    best, best_obj = layer, trace[0]
    params = {"w_up": layer.w_up, "w_gate": layer.w_gate, "w_down": layer.w_down}
    for _ in range(cfg.iterations):
        g_up, g_gate, g_down = mlp_gradients(layer, x, y)
        params = adam_step(state, params, {"w_up": g_up, "w_gate": g_gate, "w_down": g_down}, cfg)
        layer = GluLayer(**params)
        trace.append(mlp_objective(layer, x, y))
        if trace[-1] < best_obj:
            best, best_obj = layer, trace[-1]
    return best, np.asarray(trace)
