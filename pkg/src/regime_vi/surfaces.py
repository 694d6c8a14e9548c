"""Container for the three value surfaces on a grid."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, InterpolationOutOfRange
from .model import Grid, ModelParams


@dataclass
class Surfaces:
    """Value per unit stock price for the flat, long and short positions.

    Arrays have shape ``(n_t + 1, n_p)``; row ``n`` is time-to-maturity
    ``n * dt``.
    """

    v0: np.ndarray
    v1: np.ndarray
    v_neg1: np.ndarray
    grid: Grid
    params: ModelParams
    provenance: str
    penalty_eps: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (self.grid.n_t + 1, self.grid.n_p)
        for name in ("v0", "v1", "v_neg1"):
            arr = getattr(self, name)
            if arr.shape != shape:
                raise GridMismatch(f"{name} has shape {arr.shape}, grid expects {shape}")

    @property
    def u1(self) -> np.ndarray:
        return self.v0 - self.v1

    @property
    def u_neg1(self) -> np.ndarray:
        return self.v0 - self.v_neg1

    def value(self, position: int) -> np.ndarray:
        return {0: self.v0, 1: self.v1, -1: self.v_neg1}[position]

    def interpolate(self, position: int, p: float, t: float | None = None) -> float:
        """Linear interpolation of ``v_position`` in ``p`` at time level closest to ``t``
        (default: the last level, ``t = T``)."""
        g = self.grid
        if not g.p_lo <= p <= g.p_hi:
            raise InterpolationOutOfRange(f"p={p} outside [{g.p_lo}, {g.p_hi}]")
        if t is None:
            n = g.n_t
        else:
            if not -1e-12 <= t <= g.T + 1e-12:
                raise InterpolationOutOfRange(f"t={t} outside [0, {g.T}]")
            n = int(round(t / g.dt))
        return float(np.interp(p, g.p, self.value(position)[n]))

    def sup_distance(self, other: "Surfaces") -> float:
        if self.grid != other.grid:
            raise GridMismatch("surfaces live on different grids")
        return float(max(np.max(np.abs(a - b)) for a, b in (
            (self.v0, other.v0), (self.v1, other.v1), (self.v_neg1, other.v_neg1))))
