"""GLU MLP layers: forward pass and channel pruning by row/column correspondence.

Dimension convention: model width ``m``, hidden width ``n``. The layer maps
an ``m x p`` input to an ``n x p`` intermediate and back to ``m x p``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ShapeError, as_matrix, swish

__all__ = ["GluLayer", "ActivationPair", "glu_forward", "prune_by_correspondence"]


@dataclass(frozen=True)
class GluLayer:
    w_up: np.ndarray    # n x m
    w_gate: np.ndarray  # n x m
    w_down: np.ndarray  # m x n

    def __post_init__(self):
        up = as_matrix(self.w_up, "w_up")
        gate = as_matrix(self.w_gate, "w_gate")
        down = as_matrix(self.w_down, "w_down")
        n, m = up.shape
        if gate.shape != (n, m) or down.shape != (m, n):
            raise ShapeError(
                f"inconsistent GLU shapes: up {up.shape}, gate {gate.shape}, down {down.shape}"
            )
        object.__setattr__(self, "w_up", up)
        object.__setattr__(self, "w_gate", gate)
        object.__setattr__(self, "w_down", down)

    @property
    def hidden_dim(self) -> int:
        return self.w_up.shape[0]

    @property
    def model_dim(self) -> int:
        return self.w_up.shape[1]

    @property
    def num_params(self) -> int:
        return 3 * self.hidden_dim * self.model_dim

    def replace(self, **kw) -> "GluLayer":
        fields = {"w_up": self.w_up, "w_gate": self.w_gate, "w_down": self.w_down}
        fields.update(kw)
        return GluLayer(**fields)


@dataclass(frozen=True)
class ActivationPair:
    input: np.ndarray
    intermediate: np.ndarray
    output: np.ndarray


def glu_forward(layer: GluLayer, x) -> ActivationPair:
    x = as_matrix(x, "x")
    if x.shape[0] != layer.model_dim:
        raise ShapeError(
            f"glu_forward: input has {x.shape[0]} rows, layer model_dim is {layer.model_dim}"
        )
    z = (layer.w_up @ x) * swish(layer.w_gate @ x)
    return ActivationPair(input=x, intermediate=z, output=layer.w_down @ z)


def prune_by_correspondence(layer: GluLayer, keep) -> GluLayer:
    """Keep hidden channels ``keep`` (in their original order).

    Dropping column i of ``w_down`` lets rows i of ``w_up`` and ``w_gate``
    go too, since channel i contributes only through that column.
    """
    keep = np.asarray(keep, dtype=np.intp).ravel()
    n = layer.hidden_dim
    if keep.size == 0:
        raise ValueError("keep set is empty")
    if keep.min() < 0 or keep.max() >= n:
        raise IndexError(f"keep indices must lie in [0, {n - 1}]")
    if np.unique(keep).size != keep.size:
        raise ValueError("keep set has duplicate indices")
    return GluLayer(
        w_up=layer.w_up[keep, :],
        w_gate=layer.w_gate[keep, :],
        w_down=layer.w_down[:, keep],
    )
