"""Layer-by-layer pruning of a stack of GLU MLPs.

Each layer is calibrated on the activations produced by the already-pruned
layers above it; its targets are what the *dense* layer would output on
those same activations. The last eighth of the calibration samples is held
out of every solve and used only to measure end-to-end output error.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .altmin import AltMinConfig, adam_recover, altmin_recover, mlp_objective
from .core import ShapeError, as_matrix, make_rng
from .glu import GluLayer, glu_forward, prune_by_correspondence
from .oracle import DEFAULT_GUARD, magnitude_baseline, oracle_best_subset
from .penalty import PenaltyConfig, penalty_prune

__all__ = [
    "VARIANTS",
    "ToyModel",
    "SparsityPlan",
    "LayerReport",
    "PruneReport",
    "LayerFailure",
    "make_toy_model",
    "sparsity_to_lambda",
    "analytic_cost",
    "sequential_prune",
    "split_calibration",
]

VARIANTS = ("full", "no_update", "gd_only")
HOLDOUT_FRACTION = 1 / 8
ELEMENTWISE_FLOPS = 5  # per hidden activation: swish (4) + gating product (1)
BYTES_PER_PARAM = 8


class LayerFailure(RuntimeError):
    def __init__(self, index: int, cause: Exception):
        super().__init__(f"layer {index}: {cause}")
        self.index = index
        self.cause = cause


@dataclass(frozen=True)
class ToyModel:
    layers: tuple[GluLayer, ...]
    residual: bool = True

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ValueError("model needs at least one layer")
        dims = {layer.model_dim for layer in self.layers}
        if len(dims) != 1:
            raise ShapeError(f"layers disagree on model_dim: {sorted(dims)}")

    @property
    def model_dim(self) -> int:
        return self.layers[0].model_dim

    @property
    def hidden_dims(self) -> list[int]:
        return [layer.hidden_dim for layer in self.layers]

    @property
    def num_params(self) -> int:
        return sum(layer.num_params for layer in self.layers)

    def forward(self, x) -> np.ndarray:
        h = as_matrix(x, "x")
        for layer in self.layers:
            out = glu_forward(layer, h).output
            h = h + out if self.residual else out
        return h


def make_toy_model(seed: int, model_dim: int, hidden_dim: int, num_layers: int,
                   residual: bool = True, channel_decay: float = 0.0) -> ToyModel:
    """Gaussian GLU stack with fan-in scaled weights.

    ``channel_decay > 0`` gives hidden channels power-law importance: the
    k-th most important down-projection column is scaled by
    ``(k + 1) ** -channel_decay``, at a random position per layer.
    """
    rng = make_rng(seed)
    layers = []
    for _ in range(num_layers):
        w_up = rng.standard_normal((hidden_dim, model_dim)) / math.sqrt(model_dim)
        w_gate = rng.standard_normal((hidden_dim, model_dim)) / math.sqrt(model_dim)
        w_down = rng.standard_normal((model_dim, hidden_dim)) / math.sqrt(hidden_dim)
        if channel_decay:
            scale = np.arange(1, hidden_dim + 1, dtype=np.float64) ** -channel_decay
            w_down = w_down * rng.permutation(scale)
        layers.append(GluLayer(w_up, w_gate, w_down))
    return ToyModel(tuple(layers), residual)


def sparsity_to_lambda(overall: float, layer_or_hidden, mlp_share: float = 1.0) -> int:
    """Channels to prune so the whole model loses ``overall`` of its parameters.

    Only MLP parameters are pruned, so the MLP ratio is scaled up by the
    inverse of the MLP parameter share. Rounds half up, clamps to [1, n-1].
    """
    n = layer_or_hidden.hidden_dim if isinstance(layer_or_hidden, GluLayer) else int(layer_or_hidden)
    if not 0.0 < mlp_share <= 1.0:
        raise ValueError(f"mlp_share must lie in (0, 1], got {mlp_share}")
    if not 0.0 < overall:
        raise ValueError(f"overall sparsity must be > 0, got {overall}")
    if overall >= mlp_share:
        raise ValueError(
            f"overall sparsity {overall} >= MLP parameter share {mlp_share}: "
            "unreachable by pruning MLP channels alone"
        )
    lam = math.floor(n * overall / mlp_share + 0.5)
    return min(max(lam, 1), n - 1)


@dataclass(frozen=True)
class SparsityPlan:
    overall_sparsity: float
    mlp_param_share: float
    per_layer_lambda: tuple[int, ...]

    @classmethod
    def for_model(cls, model: ToyModel, overall: float, mlp_share: float = 1.0) -> "SparsityPlan":
        """Uniform plan; ``overall == 0`` yields the identity plan (all lambdas 0)."""
        if overall == 0.0:
            lams = tuple(0 for _ in model.layers)
        else:
            lams = tuple(sparsity_to_lambda(overall, layer, mlp_share) for layer in model.layers)
        return cls(overall, mlp_share, lams)

    def validate(self, model: ToyModel):
        if len(self.per_layer_lambda) != len(model.layers):
            raise ValueError(
                f"plan has {len(self.per_layer_lambda)} entries for {len(model.layers)} layers"
            )
        for i, (lam, n) in enumerate(zip(self.per_layer_lambda, model.hidden_dims)):
            if not 0 <= lam < n:
                raise ValueError(f"layer {i}: lambda {lam} outside [0, {n - 1}]")


def analytic_cost(model: ToyModel, seq_len: int) -> tuple[int, int]:
    """MLP-only FLOPs and weight bytes for one forward pass over ``seq_len`` tokens.

    Three GEMMs cost ``2 m n L`` each; swish plus gating add
    ``ELEMENTWISE_FLOPS * n * L``. Weights are float64.
    """
    m = model.model_dim
    flops = sum((6 * m * n + ELEMENTWISE_FLOPS * n) * seq_len for n in model.hidden_dims)
    nbytes = sum(3 * m * n * BYTES_PER_PARAM for n in model.hidden_dims)
    return flops, nbytes


@dataclass
class LayerReport:
    index: int
    hidden_dim: int
    lam: int
    keep: list[int]
    penalty_objective: float | None = None
    penalty_trace: list[float] = field(default_factory=list)
    recovery_trace: list[float] = field(default_factory=list)
    reconstruction_error: float = 0.0
    magnitude_objective: float | None = None
    oracle_objective: float | None = None
    oracle_gap: float | None = None


@dataclass
class PruneReport:
    variant: str
    overall_sparsity: float
    layers: list[LayerReport]
    params_dense: int
    params_pruned: int
    flops_dense: int
    flops_pruned: int
    bytes_dense: int
    bytes_pruned: int
    end_to_end_error: float      # ||f_pruned - f_dense||^2 / ||f_dense||^2 on held-out samples
    end_to_end_abs_error: float

    def to_dict(self) -> dict:
        return asdict(self)


def split_calibration(calib: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Last ``p // 8`` samples become the held-out split."""
    p = calib.shape[1]
    held = int(p * HOLDOUT_FRACTION)
    return calib[:, : p - held], calib[:, p - held:]


def sequential_prune(model: ToyModel, calib, plan: SparsityPlan, variant: str = "full",
                     penalty_cfg: PenaltyConfig | None = None,
                     altmin_cfg: AltMinConfig | None = None,
                     oracle: bool = False, oracle_guard: int = DEFAULT_GUARD,
                     ) -> tuple[ToyModel, PruneReport]:
    """Prune every layer of ``model`` according to ``plan``.

    ``variant`` selects the recovery applied after the penalty step:
    ``no_update`` (none), ``gd_only`` (Adam on all three matrices) or
    ``full`` (alternating minimization). With ``oracle=True`` each layer's
    mask is also compared against exhaustive search and the magnitude rule.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    penalty_cfg = penalty_cfg or PenaltyConfig()
    altmin_cfg = altmin_cfg or AltMinConfig()
    calib = as_matrix(calib, "calib")
    if calib.shape[0] != model.model_dim:
        raise ShapeError(f"calibration has {calib.shape[0]} rows, model_dim is {model.model_dim}")
    plan.validate(model)
    x_train, x_held = split_calibration(calib)
    if x_train.shape[1] < max(model.hidden_dims):
        raise ValueError(
            f"{x_train.shape[1]} calibration samples < widest layer {max(model.hidden_dims)}"
        )

    h = x_train
    new_layers, reports = [], []
    for i, (layer, lam) in enumerate(zip(model.layers, plan.per_layer_lambda)):
        try:
            dense = glu_forward(layer, h)
            rep = LayerReport(i, layer.hidden_dim, lam, list(range(layer.hidden_dim)))
            pruned = layer
            if lam > 0:
                res = penalty_prune(layer.w_down, dense.intermediate, dense.output, lam, penalty_cfg)
                rep.keep = [int(k) for k in res.keep]
                rep.penalty_objective = res.objective
                rep.penalty_trace = [r.objective for r in res.trace]
                pruned = prune_by_correspondence(layer, res.keep).replace(w_down=res.w)
                if variant == "full":
                    pruned, tr = altmin_recover(pruned, h, dense.output, altmin_cfg)
                    rep.recovery_trace = tr.tolist()
                elif variant == "gd_only":
                    pruned, tr = adam_recover(pruned, h, dense.output, altmin_cfg)
                    rep.recovery_trace = tr.tolist()
                if oracle:
                    _, rep.magnitude_objective = magnitude_baseline(
                        layer.w_down, dense.intermediate, dense.output, lam)
                    orc = oracle_best_subset(dense.intermediate, dense.output, lam, oracle_guard)
                    rep.oracle_objective = orc.best_objective
                    rep.oracle_gap = _relative_gap(res.objective, orc.best_objective)
            rep.reconstruction_error = mlp_objective(pruned, h, dense.output)
            out = glu_forward(pruned, h).output
        except Exception as exc:  # noqa: BLE001 - re-raised with the layer index
            raise LayerFailure(i, exc) from exc
        h = h + out if model.residual else out
        new_layers.append(pruned)
        reports.append(rep)

    pruned_model = ToyModel(tuple(new_layers), model.residual)
    seq_len = calib.shape[1]
    flops_dense, bytes_dense = analytic_cost(model, seq_len)
    flops_pruned, bytes_pruned = analytic_cost(pruned_model, seq_len)
    ref = model.forward(x_held)
    diff = pruned_model.forward(x_held) - ref
    abs_err = float(np.sum(diff * diff))
    ref_energy = float(np.sum(ref * ref))
    report = PruneReport(
        variant=variant,
        overall_sparsity=plan.overall_sparsity,
        layers=reports,
        params_dense=model.num_params,
        params_pruned=pruned_model.num_params,
        flops_dense=flops_dense,
        flops_pruned=flops_pruned,
        bytes_dense=bytes_dense,
        bytes_pruned=bytes_pruned,
        end_to_end_error=abs_err / ref_energy if ref_energy > 0 else abs_err,
        end_to_end_abs_error=abs_err,
    )
    return pruned_model, report


def _relative_gap(value: float, best: float) -> float:
    if best > 0:
        return (value - best) / best
    return 0.0 if value <= 0 else math.inf
