"""Structural checks on value surfaces: initial data, difference bounds,
monotonicity in belief and time, and nonnegativity of the difference sum."""

from __future__ import annotations

import numpy as np

from .boundaries import PropertyReport
from .surfaces import Surfaces

BOUND_TOL = 1e-3


def initial_data_error(surfaces: Surfaces) -> float:
    K = surfaces.params.K
    return float(max(
        np.max(np.abs(surfaces.v0[0])),
        np.max(np.abs(surfaces.v1[0] - (1 - K))),
        np.max(np.abs(surfaces.v_neg1[0] + (1 + K))),
    ))


def value_report(surfaces: Surfaces, tol: float = BOUND_TOL) -> PropertyReport:
    """Margins are signed: negative values are violations."""
    K = surfaces.params.K
    u1, um = surfaces.u1, surfaces.u_neg1
    rep = PropertyReport()
    rep.add("initial_data", -initial_data_error(surfaces), 0.0, "t=0 rows vs prescribed data")
    rep.add("value_difference_bounds", float(min(
        (u1 + (1 + K)).min(), (-(1 - K) - u1).min(),
        (um - (1 - K)).min(), ((1 + K) - um).min(),
    )), tol, "-(1+K) <= v0-v1 <= -(1-K) and 1-K <= v0-v_neg1 <= 1+K")
    rep.add("belief_monotonicity", float(min(
        (-np.diff(u1, axis=1)).min(), np.diff(um, axis=1).min(),
    )), tol, "v0-v1 nonincreasing and v0-v_neg1 nondecreasing in p")
    rep.add("difference_sum_nonnegative", float((u1 + um).min()), tol, "(v0-v1) + (v0-v_neg1) >= 0")
    rep.add("time_monotonicity", float(min(
        (-np.diff(u1, axis=0)).min(), (-np.diff(um, axis=0)).min(),
    )), tol, "v0-v1 and v0-v_neg1 nonincreasing in time-to-maturity")
    return rep
