"""Monte Carlo check of switching strategies under the filtered price/belief dynamics.

Prices and beliefs share one innovation Brownian motion. Paths are generated
in fixed-size blocks, each from its own Philox stream keyed by ``(seed, block)``,
so any block can be regenerated on demand and the result does not depend on
the order in which blocks are processed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from .boundaries import FreeBoundaries, target_positions
from .errors import DomainError, PolicyRangeError
from .model import ModelParams, switch_gain
from .surfaces import Surfaces

BLOCK_SIZE = 8192
P_CLAMP = 1e-12

NEVER_TRADE = "never-trade"
IMMEDIATE_BUY = "immediate-buy-hold-to-maturity"
BASELINES = (NEVER_TRADE, IMMEDIATE_BUY)

Policy = Union[FreeBoundaries, str]


@dataclass(frozen=True)
class SimConfig:
    s0: float = 100.0
    p_init: float = 0.5
    n_paths: int = 100_000
    n_steps: int = 2000
    seed: int = 0
    initial_position: int = 0

    def __post_init__(self):
        if not self.s0 > 0:
            raise DomainError(f"s0 must be positive, got {self.s0}")
        if not 0.0 < self.p_init < 1.0:
            raise DomainError(f"p_init must lie in (0, 1), got {self.p_init}")
        if self.n_paths < 1 or self.n_steps < 1:
            raise DomainError("n_paths and n_steps must be at least 1")
        if self.initial_position not in (-1, 0, 1):
            raise DomainError(f"initial_position must be -1, 0 or 1, got {self.initial_position}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


class PathSet:
    """Deterministic, replayable set of ``(S, p)`` paths.

    Iterating a block yields ``(k, S_k, p_k)`` for ``k = 0..n_steps``. Use
    :meth:`materialize` only for small path counts.
    """

    def __init__(self, params: ModelParams, cfg: SimConfig, block_size: int = BLOCK_SIZE):
        self.params = params
        self.cfg = cfg
        self.block_size = block_size
        self.dt = params.T / cfg.n_steps

    @property
    def n_blocks(self) -> int:
        return -(-self.cfg.n_paths // self.block_size)

    def block_len(self, b: int) -> int:
        return min(self.block_size, self.cfg.n_paths - b * self.block_size)

    def _rng(self, b: int) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=[self.cfg.seed, b]))

    def iter_block(self, b: int) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
        P, dt = self.params, self.dt
        m = self.block_len(b)
        rng = self._rng(b)
        dmu = P.mu1 - P.mu2
        sq = math.sqrt(dt)
        S = np.full(m, float(self.cfg.s0))
        p = np.full(m, float(self.cfg.p_init))
        yield 0, S, p
        for k in range(1, self.cfg.n_steps + 1):
            dW = sq * rng.standard_normal(m)
            drift = dmu * p + P.mu2
            S = S * np.exp((drift - 0.5 * P.sigma**2) * dt + P.sigma * dW)
            p = p + (-(P.lambda1 + P.lambda2) * p + P.lambda2) * dt + dmu * p * (1 - p) / P.sigma * dW
            np.clip(p, P_CLAMP, 1.0 - P_CLAMP, out=p)
            yield k, S, p

    def materialize(self) -> tuple[np.ndarray, np.ndarray]:
        """Full ``(n_steps + 1, n_paths)`` arrays of prices and beliefs."""
        S = np.empty((self.cfg.n_steps + 1, self.cfg.n_paths))
        p = np.empty_like(S)
        for b in range(self.n_blocks):
            lo = b * self.block_size
            hi = lo + self.block_len(b)
            for k, Sk, pk in self.iter_block(b):
                S[k, lo:hi] = Sk
                p[k, lo:hi] = pk
        return S, p


def simulate_paths(params: ModelParams, cfg: SimConfig, block_size: int = BLOCK_SIZE) -> PathSet:
    return PathSet(params, cfg, block_size)


@dataclass
class RewardStats:
    mean: float
    std_error: float
    n_paths: int
    trade_count_mean: float
    rewards: np.ndarray | None = None
    trades: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std_error": self.std_error, "n_paths": self.n_paths,
                "trade_count_mean": self.trade_count_mean}


def _book(S: np.ndarray, old: np.ndarray, new: np.ndarray, K: float) -> np.ndarray:
    gain = np.zeros_like(S)
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            if i != j:
                sel = (old == i) & (new == j)
                if sel.any():
                    gain[sel] = switch_gain(i, j, S[sel], K)
    return gain


def run_strategy(
    paths: PathSet,
    policy: Policy,
    params: ModelParams | None = None,
    cfg: SimConfig | None = None,
    *,
    keep_paths: bool = False,
) -> RewardStats:
    """Walk every path, trade according to ``policy`` and book discounted gains.

    ``policy`` is either boundaries from a solve (whose ``t`` is
    time-to-maturity) or one of :data:`BASELINES`. The position is forced flat
    at maturity.
    """
    params = paths.params if params is None else params
    cfg = paths.cfg if cfg is None else cfg
    K, rho, T, dt = params.K, params.rho, params.T, paths.dt
    if isinstance(policy, FreeBoundaries):
        if policy.t_values[-1] < T - 1e-9:
            raise PolicyRangeError(f"policy covers t <= {policy.t_values[-1]}, need {T}")
        levels = [policy.level(T - k * dt) for k in range(cfg.n_steps)]
    elif policy not in BASELINES:
        raise PolicyRangeError(f"unknown policy {policy!r}")

    rewards, trades = [], []
    for b in range(paths.n_blocks):
        m = paths.block_len(b)
        pos = np.full(m, cfg.initial_position, dtype=np.int8)
        reward = np.zeros(m)
        count = np.zeros(m, dtype=np.int64)
        for k, S, p in paths.iter_block(b):
            if k == cfg.n_steps:
                new = np.zeros_like(pos)
            elif isinstance(policy, FreeBoundaries):
                new = target_positions(policy, levels[k], p, pos)
            elif policy == IMMEDIATE_BUY and k == 0:
                new = np.ones_like(pos)
            else:
                continue
            moved = new != pos
            if moved.any():
                reward += math.exp(-rho * k * dt) * _book(S, pos, new, K)
                count += moved
                pos = new
        rewards.append(reward)
        trades.append(count)
    r = np.concatenate(rewards)
    n = np.concatenate(trades)
    se = float(r.std(ddof=1) / math.sqrt(r.size)) if r.size > 1 else 0.0
    return RewardStats(
        mean=float(r.mean()),
        std_error=se,
        n_paths=int(r.size),
        trade_count_mean=float(n.mean()),
        rewards=r if keep_paths else None,
        trades=n if keep_paths else None,
    )


# allowance constant, in units of s0 * (h + dt + penalty_eps); frozen from the canonical run
ALLOWANCE_CONST = 1.0


@dataclass
class VerdictReport:
    passed: bool
    mc_mean: float
    pde_value: float
    std_error: float
    allowance: float
    baselines: dict

    def to_dict(self) -> dict:
        return {"passed": self.passed, "mc_mean": self.mc_mean, "pde_value": self.pde_value,
                "std_error": self.std_error, "allowance": self.allowance, "baselines": self.baselines}


def discretization_allowance(surfaces: Surfaces, cfg: SimConfig, const: float = ALLOWANCE_CONST) -> float:
    g = surfaces.grid
    eps = surfaces.penalty_eps or 0.0
    return const * cfg.s0 * (g.h + surfaces.params.T / cfg.n_steps + eps)


def value_check(
    stats: RewardStats,
    surfaces: Surfaces,
    cfg: SimConfig,
    baselines: dict[str, RewardStats] | None = None,
    *,
    const: float = ALLOWANCE_CONST,
) -> VerdictReport:
    """Compare the optimal-policy mean with ``s0 * v_i(p_init, T)`` and check
    that no baseline beats it beyond Monte Carlo error."""
    value = cfg.s0 * surfaces.interpolate(cfg.initial_position, cfg.p_init)
    allowance = discretization_allowance(surfaces, cfg, const)
    ok = abs(stats.mean - value) <= 3.0 * stats.std_error + allowance
    base = {}
    for name, b in (baselines or {}).items():
        combined = math.hypot(stats.std_error, b.std_error)
        dominated = b.mean <= stats.mean + 3.0 * combined
        base[name] = {"mean": b.mean, "std_error": b.std_error, "combined_se": combined,
                      "gap": stats.mean - b.mean, "not_better_than_optimal": bool(dominated)}
        ok = ok and dominated
    return VerdictReport(bool(ok), stats.mean, value, stats.std_error, allowance, base)
