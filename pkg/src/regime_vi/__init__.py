"""Penalty and direct solvers for the three-position switching system of a
stock trader facing an unobservable bull/bear regime, with free-boundary
checks and a Monte Carlo strategy check."""

__version__ = "0.1.0"

from .boundaries import FreeBoundaries, extract_boundaries, strategy_action, verify_theorem
from .model import (Grid, ModelParams, canonical_params, hold_time_bounds, make_grid, operator_coeffs,
                    p_star, switch_gain, validate_params)
from .penalty import build_penalty, solve_penalized, step_u
from .simulator import SimConfig, run_strategy, simulate_paths, value_check
from .surfaces import Surfaces
from .vi_oracle import complementarity_check, solve_vi

__all__ = [
    "FreeBoundaries", "Grid", "ModelParams", "SimConfig", "Surfaces", "build_penalty", "canonical_params",
    "complementarity_check", "extract_boundaries", "hold_time_bounds", "make_grid", "operator_coeffs",
    "p_star", "run_strategy", "simulate_paths", "solve_penalized", "solve_vi", "step_u",
    "strategy_action", "switch_gain", "validate_params", "value_check", "verify_theorem",
]
