"""Switching boundaries, their structural checks and the induced trading rule."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonMonotoneContact, TimeOutOfRange
from .model import Grid, ModelParams, hold_time_bounds, p_star
from .surfaces import Surfaces
from .vi_oracle import CONTACT_TOL

CONTINUITY_FACTOR = 4.0
# largest boundary speed (belief per unit time) the continuity proxy tolerates
SPEED_BOUND = 50.0
# absorbs rounding in margins that are exact multiples of h
_ROUND = 1e-12

DO_NOTHING = "do nothing"
BUY_1 = "buy 1 share"
BUY_2 = "buy 2 share"
SELL_1 = "sell 1 share"
SELL_2 = "sell 2 share"

_SHIFT = {DO_NOTHING: 0, BUY_1: 1, BUY_2: 2, SELL_1: -1, SELL_2: -2}


@dataclass
class FreeBoundaries:
    """One value per time level for each boundary.

    ``p01`` and ``pneg10`` use ``1.0`` when their contact set is empty;
    ``p0neg1`` and ``p10`` use ``0.0``.
    """

    t_values: np.ndarray
    p01: np.ndarray
    p10: np.ndarray
    pneg10: np.ndarray
    p0neg1: np.ndarray
    p_star: float
    h: float

    @property
    def dt(self) -> float:
        return float(self.t_values[1] - self.t_values[0])

    def level(self, t: float) -> int:
        T = float(self.t_values[-1])
        if not -1e-12 <= t <= T + 1e-12:
            raise TimeOutOfRange(f"t={t} outside [0, {T}]")
        return int(min(max(round(t / self.dt), 0), self.t_values.size - 1))


def default_contact_tol(surfaces: Surfaces) -> float:
    """Contact means slack <= tol. A penalized solution never reaches zero slack;
    its penalty is active wherever the slack is below ``2 * penalty_eps``."""
    if surfaces.provenance == "penalty" and surfaces.penalty_eps is not None:
        return max(CONTACT_TOL, 2.0 * surfaces.penalty_eps)
    return CONTACT_TOL


def _suffix_start(mask: np.ndarray, p: np.ndarray, name: str, n: int) -> float:
    if not mask.any():
        return 1.0
    k = int(np.argmax(mask))
    if not mask[k:].all():
        raise NonMonotoneContact(name, n)
    return float(p[k])


def _prefix_end(mask: np.ndarray, p: np.ndarray, name: str, n: int) -> float:
    if not mask.any():
        return 0.0
    k = mask.size - 1 - int(np.argmax(mask[::-1]))
    if not mask[: k + 1].all():
        raise NonMonotoneContact(name, n)
    return float(p[k])


def extract_boundaries(surfaces: Surfaces, contact_tol: float | None = None) -> FreeBoundaries:
    if contact_tol is None:
        contact_tol = default_contact_tol(surfaces)
    K = surfaces.params.K
    v0, v1, vm = surfaces.v0, surfaces.v1, surfaces.v_neg1
    buy = v0 - v1 + (1 + K) <= contact_tol
    cover = vm - v0 + (1 + K) <= contact_tol
    short = v0 - vm - (1 - K) <= contact_tol
    sell = v1 - v0 - (1 - K) <= contact_tol
    p = surfaces.grid.p
    rows = range(surfaces.grid.n_t + 1)
    return FreeBoundaries(
        t_values=surfaces.grid.t,
        p01=np.array([_suffix_start(buy[n], p, "p01", n) for n in rows]),
        p10=np.array([_prefix_end(sell[n], p, "p10", n) for n in rows]),
        pneg10=np.array([_suffix_start(cover[n], p, "pneg10", n) for n in rows]),
        p0neg1=np.array([_prefix_end(short[n], p, "p0neg1", n) for n in rows]),
        p_star=p_star(surfaces.params),
        h=surfaces.grid.h,
    )


@dataclass
class Check:
    passed: bool
    margin: float
    tolerance: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {"passed": self.passed, "margin": self.margin, "tolerance": self.tolerance,
                "detail": self.detail}


@dataclass
class PropertyReport:
    """Signed margins per property; a check passes iff ``margin >= -tolerance``."""

    checks: dict[str, Check] = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def add(self, name: str, margin: float, tolerance: float, detail: str = "") -> None:
        self.checks[name] = Check(bool(margin >= -tolerance - _ROUND), float(margin), float(tolerance), detail)

    def to_dict(self) -> dict:
        return {"all_passed": self.all_passed, "checks": {k: c.to_dict() for k, c in self.checks.items()}}


def _gaps(fb: FreeBoundaries) -> np.ndarray:
    return np.stack([
        fb.p10 - fb.p0neg1,
        fb.p_star - fb.p10,
        fb.pneg10 - fb.p_star,
        fb.p01 - fb.pneg10,
    ])


def verify_theorem(
    fb: FreeBoundaries,
    params: ModelParams,
    grid: Grid,
    *,
    continuity_factor: float = CONTINUITY_FACTOR,
    speed_bound: float = SPEED_BOUND,
) -> PropertyReport:
    """Check ordering, monotonicity, hold-time intervals, initial points and
    step-to-step continuity on levels ``n >= 1``.

    Near maturity ``p10`` and ``pneg10`` sit within a cell or two of ``p_star``,
    so the ordering is checked with a one-cell tolerance only from the first
    level where every gap exceeds ``h``; earlier levels get two cells.
    """
    h = grid.h
    rep = PropertyReport()
    gaps = _gaps(fb)[:, 1:]
    t = fb.t_values[1:]

    wide = np.all(gaps > h, axis=0)
    start = int(np.argmax(wide)) if wide.any() else gaps.shape[1]
    if start < gaps.shape[1]:
        rep.add("ordering", float(gaps[:, start:].min()), h,
                f"min gap in p0neg1 < p10 < p_star < pneg10 < p01 for t >= {t[start]:.6g}")
    else:
        rep.add("ordering", -np.inf, h, "gaps never all exceed one cell")
    early = gaps[:, :start]
    rep.add("ordering_near_maturity", float(early.min()) if early.size else 0.0, 2 * h,
            f"min gap on the {start} levels before the gaps open up")

    rising = np.concatenate([-np.diff(fb.p0neg1[1:]), -np.diff(fb.pneg10[1:])])
    falling = np.concatenate([np.diff(fb.p01[1:]), np.diff(fb.p10[1:])])
    worst = float(max(rising.max(initial=0.0), falling.max(initial=0.0)))
    rep.add("monotonicity", -worst, h, "largest move against the proved direction")

    t0_lb, t1_lb = hold_time_bounds(params)
    for name, curve, sentinel, lb in (("hold_time_long", fb.p01, 1.0, t1_lb),
                                      ("hold_time_short", fb.p0neg1, 0.0, t0_lb)):
        contact = curve[1:] != sentinel
        first = float(t[np.argmax(contact)]) if contact.any() else np.inf
        margin = first - lb if np.isfinite(first) else float(fb.t_values[-1])
        rep.add(name, margin if margin > 0 else margin - grid.dt, 0.0,
                f"first contact at t={first:.6g}, bound {lb:.6g}")

    err = max(abs(fb.p10[1] - fb.p_star), abs(fb.pneg10[1] - fb.p_star))
    rep.add("initial_points", 2 * h - err, 0.0, "first-level distance of p10, pneg10 from p_star")

    jumps = max(float(np.abs(np.diff(c[1:])).max(initial=0.0))
                for c in (fb.p01, fb.p10, fb.pneg10, fb.p0neg1))
    allowed = continuity_factor * h + speed_bound * grid.dt
    rep.add("continuity", allowed - jumps, 0.0,
            f"largest step-to-step move {jumps:.4g} vs allowed {allowed:.4g}")
    return rep


def strategy_action(fb: FreeBoundaries, t: float, p: float, position: int) -> str:
    """Optimal trade at time-to-maturity ``t`` and belief ``p`` for the current position."""
    n = fb.level(t)
    p01, p10, pneg10, p0neg1 = fb.p01[n], fb.p10[n], fb.pneg10[n], fb.p0neg1[n]
    if position == -1:
        if p >= p01:
            return BUY_2
        if p >= pneg10:
            return BUY_1
        return DO_NOTHING
    if position == 0:
        if p <= p0neg1:
            return SELL_1
        if p >= p01:
            return BUY_1
        return DO_NOTHING
    if position == 1:
        if p <= p0neg1:
            return SELL_2
        if p <= p10:
            return SELL_1
        return DO_NOTHING
    raise ValueError(f"position must be -1, 0 or 1, got {position}")


def apply_action(position: int, action: str) -> int:
    return position + _SHIFT[action]


def target_positions(fb: FreeBoundaries, n: int, p: np.ndarray, position: np.ndarray) -> np.ndarray:
    """Vectorised :func:`strategy_action` at level ``n``; returns post-trade positions."""
    p01, p10, pneg10, p0neg1 = fb.p01[n], fb.p10[n], fb.pneg10[n], fb.p0neg1[n]
    out = position.copy()
    short = position == -1
    flat = position == 0
    long_ = position == 1
    out[short & (p >= pneg10)] = 0
    out[short & (p >= p01)] = 1
    out[flat & (p >= p01)] = 1
    out[flat & (p <= p0neg1)] = -1
    out[long_ & (p <= p10)] = 0
    out[long_ & (p <= p0neg1)] = -1
    return out
