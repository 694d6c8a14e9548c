"""Penalty approximation of the switching system.

The three-function penalized system is reduced to the two differences
``u1 = v0 - v1`` and ``u_neg1 = v0 - v_neg1``, which are marched with backward
Euler and a damped semismooth Newton solve per level. ``v0`` then follows from
a linear problem whose source is the converged penalty terms, and the long and
short surfaces are recovered as ``v0 - u``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .assembly import Tridiag, step_matrix
from .errors import DomainError, NewtonDivergence
from .model import Grid, ModelParams
from .surfaces import Surfaces

log = logging.getLogger(__name__)

NEWTON_TOL = 1e-10
MAX_ITER = 50
MAX_HALVINGS = 20


@dataclass(frozen=True)
class PenaltyFn:
    """Concave nondecreasing penalty ``beta(x) = -c1 * max(0, 2 - x / eps)``.

    It takes the value ``-c0 = -2 c1`` at 0, ``-c1`` at ``eps`` and vanishes
    from ``2 eps`` on. With ``c0 = 2 c1`` these three values are collinear, so
    a concave function through them is affine on ``[0, 2 eps]``; the hinge at
    ``2 eps`` is the only place it fails to be smooth.
    """

    eps: float
    c0: float
    c1: float

    def __call__(self, x):
        return -self.c1 * np.maximum(0.0, 2.0 - np.asarray(x, dtype=float) / self.eps)

    def derivative(self, x):
        # one-sided (left) derivative at the hinge is taken as 0
        return np.where(np.asarray(x, dtype=float) < 2.0 * self.eps, self.c1 / self.eps, 0.0)

    def second_derivative(self, x):
        """Zero off the hinge; the hinge itself carries a negative point mass."""
        return np.zeros_like(np.asarray(x, dtype=float))


def build_penalty(eps: float, params: ModelParams) -> PenaltyFn:
    if not eps > 0.0:
        raise DomainError(f"penalty scale must be positive, got {eps}")
    spread = (params.mu1 - params.mu2) * (1.0 + params.K) + 1.0
    c1 = spread
    c0 = c1 + spread
    return PenaltyFn(eps=eps, c0=c0, c1=c1)


@dataclass
class USurfaces:
    u1: np.ndarray
    u_neg1: np.ndarray


def _residual(m: Tridiag, beta: PenaltyFn, K: float, dt: float, u1, um, u1_prev, um_prev):
    f1 = m.matvec(u1) - u1_prev + dt * (beta(u1 + 1 + K) - beta(-u1 - (1 - K)) + beta(um - (1 - K)))
    f2 = m.matvec(um) - um_prev + dt * (beta(um - (1 - K)) - beta(-um + (1 + K)) + beta(u1 + 1 + K))
    return f1, f2


def _jacobian_banded(m: Tridiag, beta: PenaltyFn, K: float, dt: float, u1, um) -> np.ndarray:
    """Jacobian with unknowns interleaved as (u1_0, um_0, u1_1, um_1, ...), bandwidth 2."""
    n = u1.size
    d_buy = beta.derivative(u1 + 1 + K)
    d_short_cover = beta.derivative(um - (1 - K))
    j11 = m.diag + dt * (d_buy + beta.derivative(-u1 - (1 - K)))
    j22 = m.diag + dt * (d_short_cover + beta.derivative(-um + (1 + K)))
    j12 = dt * d_short_cover
    j21 = dt * d_buy

    ab = np.zeros((5, 2 * n))
    # ab[2 + row - col, col] = A[row, col]
    ab[2, 0::2] = j11
    ab[2, 1::2] = j22
    ab[1, 1::2] = j12   # row 2i, col 2i+1
    ab[3, 0::2] = j21   # row 2i+1, col 2i
    ab[0, 2::2] = m.upper[:-1]  # row 2i, col 2i+2
    ab[0, 3::2] = m.upper[:-1]
    ab[4, 0:-2:2] = m.lower[1:]  # row 2i+2, col 2i
    ab[4, 1:-2:2] = m.lower[1:]
    return ab


def step_u(
    params: ModelParams,
    grid: Grid,
    penalty: PenaltyFn,
    u_prev: tuple[np.ndarray, np.ndarray],
    *,
    matrix: Tridiag | None = None,
    newton_tol: float = NEWTON_TOL,
    max_iter: int = MAX_ITER,
    max_halvings: int = MAX_HALVINGS,
) -> tuple[np.ndarray, np.ndarray, dict]:
    """Advance ``(u1, u_neg1)`` by one backward-Euler step.

    The residual is measured in step-matrix form (``dt`` times the PDE residual).
    Returns the new rows and a small diagnostics dict.
    """
    m = step_matrix(params, grid) if matrix is None else matrix
    K, dt = params.K, grid.dt
    u1_prev, um_prev = u_prev
    u1, um = u1_prev.copy(), um_prev.copy()
    f1, f2 = _residual(m, penalty, K, dt, u1, um, u1_prev, um_prev)
    res = max(np.max(np.abs(f1)), np.max(np.abs(f2)))
    it = 0
    while res > newton_tol:
        if it >= max_iter:
            raise NewtonDivergence(res)
        it += 1
        rhs = np.empty(2 * u1.size)
        rhs[0::2] = -f1
        rhs[1::2] = -f2
        delta = solve_banded((2, 2), _jacobian_banded(m, penalty, K, dt, u1, um), rhs)
        step = 1.0
        for _ in range(max_halvings + 1):
            c1 = u1 + step * delta[0::2]
            cm = um + step * delta[1::2]
            g1, g2 = _residual(m, penalty, K, dt, c1, cm, u1_prev, um_prev)
            new_res = max(np.max(np.abs(g1)), np.max(np.abs(g2)))
            if new_res < res:
                break
            step *= 0.5
        else:
            raise NewtonDivergence(res)
        u1, um, f1, f2, res = c1, cm, g1, g2, new_res
    return u1, um, {"iterations": it, "residual": float(res)}


def solve_penalized(
    params: ModelParams,
    grid: Grid,
    penalty_eps: float,
    *,
    newton_tol: float = NEWTON_TOL,
    max_iter: int = MAX_ITER,
    max_halvings: int = MAX_HALVINGS,
) -> Surfaces:
    """March the penalized system over every time level and rebuild ``(v0, v1, v_neg1)``."""
    beta = build_penalty(penalty_eps, params)
    m = step_matrix(params, grid)
    ab = m.banded()
    K = params.K
    n_t, n_p = grid.n_t, grid.n_p

    v0 = np.zeros((n_t + 1, n_p))
    u1 = np.empty((n_t + 1, n_p))
    um = np.empty((n_t + 1, n_p))
    u1[0] = -(1.0 - K)
    um[0] = 1.0 + K

    total_iter = 0
    worst = 0.0
    for n in range(1, n_t + 1):
        try:
            u1[n], um[n], info = step_u(
                params, grid, beta, (u1[n - 1], um[n - 1]), matrix=m,
                newton_tol=newton_tol, max_iter=max_iter, max_halvings=max_halvings,
            )
        except NewtonDivergence as exc:
            raise NewtonDivergence(exc.residual, time_index=n) from None
        total_iter += info["iterations"]
        worst = max(worst, info["residual"])
        source = beta(u1[n] + 1 + K) + beta(um[n] - (1 - K))
        v0[n] = solve_banded((1, 1), ab, v0[n - 1] - grid.dt * source)

    log.debug("penalty solve: %d Newton iterations, worst residual %.2e", total_iter, worst)
    return Surfaces(
        v0=v0,
        v1=v0 - u1,
        v_neg1=v0 - um,
        grid=grid,
        params=params,
        provenance="penalty",
        penalty_eps=penalty_eps,
        diagnostics={
            "newton_iterations": total_iter,
            "max_newton_residual": worst,
            "c0": beta.c0,
            "c1": beta.c1,
        },
    )
