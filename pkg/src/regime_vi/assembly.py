"""Finite-difference assembly of the degenerate operator, shared by both solvers.

Rows of the discrete generator ``L_h`` use central differences where the cell
Peclet number ``|b| h / a`` is at most 2 and one-sided upwind differences
otherwise. Truncated ends carry a reflecting (zero-slope) closure for the
diffusion and keep the inward upwind drift; ends sitting
exactly on ``p = 0`` or ``p = 1`` carry no boundary data and use the one-sided
difference pointing into the domain (the drift there points inward).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError
from .model import Grid, ModelParams, operator_coeffs


@dataclass(frozen=True)
class Tridiag:
    """Tridiagonal matrix stored by diagonals; ``lower[0]`` and ``upper[-1]`` are unused."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[1:] += self.lower[1:] * x[:-1]
        y[:-1] += self.upper[:-1] * x[1:]
        return y

    def banded(self) -> np.ndarray:
        """Layout expected by ``scipy.linalg.solve_banded((1, 1), ...)``."""
        ab = np.zeros((3, self.diag.size))
        ab[0, 1:] = self.upper[:-1]
        ab[1] = self.diag
        ab[2, :-1] = self.lower[1:]
        return ab


def generator(params: ModelParams, grid: Grid) -> Tridiag:
    """Discrete ``L_h`` so that ``(L u)_i = lower_i u_{i-1} + diag_i u_i + upper_i u_{i+1}``."""
    p = grid.p
    h = grid.h
    co = operator_coeffs(params, np.clip(p, 0.0, 1.0))
    a, b, c = co.a, co.b, co.c
    n = p.size
    lower = np.zeros(n)
    diag = np.array(c, dtype=float)
    upper = np.zeros(n)

    inner = slice(1, n - 1)
    ai, bi = a[inner], b[inner]
    central = (ai > 0.0) & (np.abs(bi) * h <= 2.0 * ai)
    diff = ai / h**2
    lo = np.where(central, diff - bi / (2 * h), diff + np.maximum(-bi, 0.0) / h)
    up = np.where(central, diff + bi / (2 * h), diff + np.maximum(bi, 0.0) / h)
    lower[inner] = lo
    upper[inner] = up
    diag[inner] -= lo + up

    # left end: reflected diffusion plus upwind drift from the inward neighbour;
    # the zero-slope layer has width a/b, far below h, so the drift must stay
    if p[0] > 0.0:
        upper[0] = 2.0 * a[0] / h**2 + max(b[0], 0.0) / h
    else:
        upper[0] = max(b[0], 0.0) / h
    diag[0] -= upper[0]
    # right end
    if p[-1] < 1.0:
        lower[-1] = 2.0 * a[-1] / h**2 + max(-b[-1], 0.0) / h
    else:
        lower[-1] = max(-b[-1], 0.0) / h
    diag[-1] -= lower[-1]
    return Tridiag(lower, diag, upper)


def step_matrix(params: ModelParams, grid: Grid) -> Tridiag:
    """Backward-Euler matrix ``I - dt L_h``.

    Off-diagonals are nonpositive by construction. Strict diagonal dominance
    needs ``dt * max(c) < 1``; this is checked here so the discrete maximum
    principle holds for every solve built on the matrix.
    """
    gen = generator(params, grid)
    dt = grid.dt
    m = Tridiag(-dt * gen.lower, 1.0 - dt * gen.diag, -dt * gen.upper)
    if np.any(m.lower[1:] > 0.0) or np.any(m.upper[:-1] > 0.0):
        raise SolverError("step matrix has a positive off-diagonal entry")
    c_max = params.mu1 - params.rho
    margin = m.diag - np.abs(m.lower) - np.abs(m.upper)
    if np.any(margin <= 0.0):
        raise SolverError(
            f"step matrix is not diagonally dominant; need dt < {1.0 / c_max:.6g}, got dt = {dt:.6g}"
        )
    return m
