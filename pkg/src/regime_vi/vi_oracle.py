"""Direct solver for the discretized switching system, used as an independent check.

Each backward-Euler level is a coupled obstacle problem: every position's value
must dominate the value of switching out of it, and the implicit PDE holds
wherever that constraint is slack. It is solved by projected Gauss-Seidel
sweeps over ``v0``, ``v1`` and ``v_neg1`` in turn; each obstacle is read from
the freshest iterate of the other functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .assembly import Tridiag, step_matrix
from .errors import FixedPointStall, GridMismatch
from .model import Grid, ModelParams
from .surfaces import Surfaces

FP_TOL = 1e-9
MAX_OUTER = 10_000
CONTACT_TOL = 1e-6


@numba.njit(cache=True)
def _pgs_level(lower, diag, upper, v0, v1, vm, r0, r1, rm, K, fp_tol, max_outer, history):
    """Projected Gauss-Seidel on one level, in place. Returns (sweeps, last change)."""
    n = diag.size
    change = np.inf
    for sweep in range(max_outer):
        change = 0.0
        for f in range(3):
            if f == 0:
                x, rhs = v0, r0
            elif f == 1:
                x, rhs = v1, r1
            else:
                x, rhs = vm, rm
            for i in range(n):
                s = rhs[i]
                if i > 0:
                    s -= lower[i] * x[i - 1]
                if i < n - 1:
                    s -= upper[i] * x[i + 1]
                y = s / diag[i]
                if f == 0:
                    ob = max(v1[i] - (1.0 + K), vm[i] + (1.0 - K))
                elif f == 1:
                    ob = v0[i] + (1.0 - K)
                else:
                    ob = v0[i] - (1.0 + K)
                if y < ob:
                    y = ob
                d = abs(y - x[i])
                if d > change:
                    change = d
                x[i] = y
        if sweep < history.size:
            history[sweep] = change
        if change < fp_tol:
            return sweep + 1, change
    return max_outer, change


def solve_vi(
    params: ModelParams,
    grid: Grid,
    *,
    fp_tol: float = FP_TOL,
    max_outer: int = MAX_OUTER,
) -> Surfaces:
    m = step_matrix(params, grid)
    K = params.K
    shape = (grid.n_t + 1, grid.n_p)
    v0 = np.zeros(shape)
    v1 = np.full(shape, 1.0 - K)
    vm = np.full(shape, -(1.0 + K))
    history = np.zeros(64)
    sweeps = np.zeros(grid.n_t + 1, dtype=np.int64)
    non_monotone = 0
    for n in range(1, grid.n_t + 1):
        x0, x1, xm = v0[n - 1].copy(), v1[n - 1].copy(), vm[n - 1].copy()
        history[:] = 0.0
        k, change = _pgs_level(m.lower, m.diag, m.upper, x0, x1, xm,
                               v0[n - 1], v1[n - 1], vm[n - 1], K, fp_tol, max_outer, history)
        if change >= fp_tol:
            raise FixedPointStall(float(change), time_index=n)
        h = history[: min(k, history.size)]
        non_monotone += int(np.sum(h[2:] > h[1:-1] * (1 + 1e-12)))
        v0[n], v1[n], vm[n] = x0, x1, xm
        sweeps[n] = k
    return Surfaces(
        v0=v0, v1=v1, v_neg1=vm, grid=grid, params=params, provenance="vi_oracle",
        diagnostics={
            "fp_tol": fp_tol,
            "total_sweeps": int(sweeps.sum()),
            "max_sweeps": int(sweeps.max()),
            "sup_change_increases": non_monotone,
        },
    )


@dataclass
class ComplementarityReport:
    """Worst-case violations across all functions and levels ``n >= 1``.

    Residuals are in step-matrix form ``M v^n - v^{n-1}`` (``dt`` times the PDE
    residual). ``max_complementarity_product`` is the worst positive value of
    ``min(residual, slack)``, the amount by which neither condition is tight.
    """

    max_pde_residual_neg: float
    max_obstacle_violation: float
    max_complementarity_product: float
    per_function: dict = field(default_factory=dict)
    worst_row: int | None = None

    def passes(self, tol: float) -> bool:
        return max(self.max_pde_residual_neg, self.max_obstacle_violation,
                   self.max_complementarity_product) <= tol

    def to_dict(self) -> dict:
        return {
            "max_pde_residual_neg": self.max_pde_residual_neg,
            "max_obstacle_violation": self.max_obstacle_violation,
            "max_complementarity_product": self.max_complementarity_product,
            "per_function": self.per_function,
            "worst_row": self.worst_row,
        }


def obstacle_slacks(surfaces: Surfaces) -> dict[str, np.ndarray]:
    """Slack of each position's switching constraint; zero on the contact sets."""
    K = surfaces.params.K
    v0, v1, vm = surfaces.v0, surfaces.v1, surfaces.v_neg1
    return {
        "v0": np.minimum(v0 - v1 + (1 + K), v0 - vm - (1 - K)),
        "v1": v1 - v0 - (1 - K),
        "v_neg1": vm - v0 + (1 + K),
    }


def step_residuals(surfaces: Surfaces, matrix: Tridiag) -> dict[str, np.ndarray]:
    out = {}
    for name in ("v0", "v1", "v_neg1"):
        v = getattr(surfaces, name)
        r = np.empty((v.shape[0] - 1, v.shape[1]))
        for n in range(1, v.shape[0]):
            r[n - 1] = matrix.matvec(v[n]) - v[n - 1]
        out[name] = r
    return out


def complementarity_check(
    surfaces: Surfaces, params: ModelParams, grid: Grid, tol: float = 0.0
) -> ComplementarityReport:
    """Recompute discrete residuals and slacks at every node of every level ``n >= 1``.

    Magnitudes at or below ``tol`` are reported as zero.
    """
    if surfaces.grid != grid:
        raise GridMismatch("surfaces were computed on a different grid")
    if surfaces.params != params:
        raise GridMismatch("surfaces were computed with different parameters")
    m = step_matrix(params, grid)
    res = step_residuals(surfaces, m)
    slack = obstacle_slacks(surfaces)
    per = {}
    worst_val, worst_row = -1.0, None
    for name in ("v0", "v1", "v_neg1"):
        r = res[name]
        s = slack[name][1:]
        gap = np.minimum(r, s)
        stats = {
            "max_pde_residual_neg": float(max(0.0, -r.min())),
            "max_obstacle_violation": float(max(0.0, -s.min())),
            "max_complementarity_product": float(max(0.0, gap.max())),
        }
        stats = {k: (0.0 if v <= tol else v) for k, v in stats.items()}
        per[name] = stats
        row_worst = np.maximum.reduce([np.maximum(-r, 0).max(axis=1), np.maximum(-s, 0).max(axis=1),
                                       np.maximum(gap, 0).max(axis=1)])
        k = int(np.argmax(row_worst))
        if row_worst[k] > worst_val:
            worst_val, worst_row = float(row_worst[k]), k + 1
    return ComplementarityReport(
        max_pde_residual_neg=max(p["max_pde_residual_neg"] for p in per.values()),
        max_obstacle_violation=max(p["max_obstacle_violation"] for p in per.values()),
        max_complementarity_product=max(p["max_complementarity_product"] for p in per.values()),
        per_function=per,
        worst_row=worst_row if worst_val > tol else None,
    )
