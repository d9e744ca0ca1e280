"""Structured pruning of GLU MLP layers.

A penalty method picks which hidden channels to remove; alternating
minimization then re-fits the surviving up, gate and down projections.
"""

from .altmin import AltMinConfig, altmin_recover, mlp_gradients, mlp_objective
from .core import frobenius_error, make_rng, spd_solve, swish, swish_grad
from .glu import GluLayer, glu_forward, prune_by_correspondence
from .oracle import magnitude_baseline, oracle_best_subset, theorem1_roundtrip
from .penalty import PenaltyConfig, penalty_prune, ridge_update
from .pipeline import (
    SparsityPlan,
    ToyModel,
    analytic_cost,
    make_toy_model,
    sequential_prune,
    sparsity_to_lambda,
)

__version__ = "0.1.0"
