"""Exact oracles for the Gambler's problem: fractal value function, Bellman solution families, discrete solvers."""
from gambler.core_value import (
    BitExpansion,
    DiffReport,
    Dyadic,
    Params,
    as_fraction,
    backward_diff,
    expand_binary,
    forward_diff,
    integral,
    left_limit_and_jump,
    q_value,
    value,
    value_dyadic,
    value_expansion,
)
from gambler.discrete_mdp import DiscreteSpec, exact_table, q_learning, value_iteration
from gambler.kernels import BACKEND
from gambler.policy_bellman import CandidateFn, bellman_residual, optimal_action
from gambler.simulate import mc_value

__all__ = [
    "BACKEND",
    "BitExpansion",
    "CandidateFn",
    "DiffReport",
    "DiscreteSpec",
    "Dyadic",
    "Params",
    "as_fraction",
    "backward_diff",
    "bellman_residual",
    "exact_table",
    "expand_binary",
    "forward_diff",
    "integral",
    "left_limit_and_jump",
    "mc_value",
    "optimal_action",
    "q_learning",
    "q_value",
    "value",
    "value_dyadic",
    "value_expansion",
    "value_iteration",
]
__version__ = "0.1.0"
