"""Market parameters, the space-time grid and closed-form model quantities.

Everything here is a pure function of immutable inputs. The solvers assume the
``ModelParams`` they receive already went through :func:`validate_params`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, ParamOrderViolation, ParamRangeViolation

POSITIONS = (-1, 0, 1)


@dataclass(frozen=True)
class ModelParams:
    """Market constants of the two-state model.

    mu1, mu2 are the bull/bear expected returns, ``sigma`` the volatility,
    ``rho`` the discount rate, ``lambda1`` (bull to bear) and ``lambda2``
    (bear to bull) the switching intensities, ``K`` the proportional fee and
    ``T`` the horizon.
    """

    mu1: float
    mu2: float
    sigma: float
    rho: float
    lambda1: float
    lambda2: float
    K: float
    T: float

    def to_dict(self) -> dict:
        return asdict(self)


def canonical_params() -> ModelParams:
    return ModelParams(mu1=0.2, mu2=-0.1, sigma=0.3, rho=0.05, lambda1=1.0, lambda2=1.0, K=0.001, T=1.0)


def validate_params(raw: ModelParams) -> ModelParams:
    """Return ``raw`` unchanged if every standing assumption holds, else raise."""
    for name in ("mu1", "mu2", "sigma", "rho", "lambda1", "lambda2", "K", "T"):
        value = getattr(raw, name)
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
            raise ParamRangeViolation(name, f"must be a finite number, got {value!r}")
    if not 0.0 < raw.K < 1.0:
        raise ParamRangeViolation("K", f"must lie in (0, 1), got {raw.K}")
    for name in ("sigma", "lambda1", "lambda2", "T"):
        if getattr(raw, name) <= 0.0:
            raise ParamRangeViolation(name, f"must be positive, got {getattr(raw, name)}")
    if not raw.mu1 > raw.rho:
        raise ParamOrderViolation("mu1", f"need mu1 > rho, got mu1={raw.mu1}, rho={raw.rho}")
    if not raw.rho > raw.mu2:
        raise ParamOrderViolation("mu2", f"need rho > mu2, got rho={raw.rho}, mu2={raw.mu2}")
    return raw


def p_star(params: ModelParams) -> float:
    """Belief level at which the discounted drift of the stock changes sign."""
    return (params.rho - params.mu2) / (params.mu1 - params.mu2)


def hold_time_bounds(params: ModelParams) -> tuple[float, float]:
    """Lower bounds ``(t0_lb, t1_lb)`` on the time-to-maturity during which no
    flat-to-short (resp. flat-to-long) trade happens."""
    log_ratio = math.log((1.0 + params.K) / (1.0 - params.K))
    t0_lb = log_ratio / (params.rho - params.mu2)
    t1_lb = log_ratio / (params.mu1 - params.rho)
    return t0_lb, t1_lb


@dataclass(frozen=True)
class OperatorCoeffs:
    """Coefficients of ``L = a d_pp + b d_p + c`` evaluated at one or many points."""

    a: np.ndarray | float
    b: np.ndarray | float
    c: np.ndarray | float


def operator_coeffs(params: ModelParams, p) -> OperatorCoeffs:
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr < 0.0) or np.any(p_arr > 1.0) or np.any(~np.isfinite(p_arr)):
        raise DomainError(f"belief must lie in [0, 1], got {p!r}")
    dmu = params.mu1 - params.mu2
    q = p_arr * (1.0 - p_arr)
    a = 0.5 * (dmu * q / params.sigma) ** 2
    b = -(params.lambda1 + params.lambda2) * p_arr + params.lambda2 + dmu * q
    c = dmu * p_arr + params.mu2 - params.rho
    if p_arr.ndim == 0:
        return OperatorCoeffs(float(a), float(b), float(c))
    return OperatorCoeffs(a, b, c)


def switch_gain(i: int, j: int, S, K: float):
    """Cash received when moving from position ``i`` to ``j`` at price ``S``."""
    if i not in POSITIONS or j not in POSITIONS:
        raise DomainError(f"positions must be in {{-1, 0, 1}}, got ({i}, {j})")
    delta = j - i
    if delta > 0:
        return -delta * S * (1.0 + K)
    if delta < 0:
        return -delta * S * (1.0 - K)
    return 0.0 * S


@dataclass(frozen=True)
class Grid:
    """Uniform mesh of ``n_p`` belief nodes on ``[p_lo, p_hi]`` and ``n_t`` time steps."""

    p_lo: float
    p_hi: float
    n_p: int
    n_t: int
    eps: float
    T: float
    h: float = field(init=False)
    dt: float = field(init=False)

    def __post_init__(self):
        if self.n_p < 3 or self.n_t < 1:
            raise DomainError(f"grid needs n_p >= 3 and n_t >= 1, got n_p={self.n_p}, n_t={self.n_t}")
        if not 0.0 <= self.p_lo < self.p_hi <= 1.0:
            raise DomainError(f"need 0 <= p_lo < p_hi <= 1, got [{self.p_lo}, {self.p_hi}]")
        object.__setattr__(self, "h", (self.p_hi - self.p_lo) / (self.n_p - 1))
        object.__setattr__(self, "dt", self.T / self.n_t)

    @property
    def p(self) -> np.ndarray:
        return self.p_lo + self.h * np.arange(self.n_p)

    @property
    def t(self) -> np.ndarray:
        return self.dt * np.arange(self.n_t + 1)

    @property
    def truncated(self) -> bool:
        return self.p_lo > 0.0 or self.p_hi < 1.0

    def to_dict(self) -> dict:
        return {"p_lo": self.p_lo, "p_hi": self.p_hi, "n_p": self.n_p, "n_t": self.n_t,
                "eps": self.eps, "T": self.T, "h": self.h, "dt": self.dt}


def make_grid(params: ModelParams, n_p: int, n_t: int, eps: float | None = None) -> Grid:
    """Build the grid on ``[eps, 1 - eps]``.

    With ``eps=None`` the margin is one cell, i.e. ``eps = h = 1 / (n_p + 1)``,
    which puts the nodes at ``k / (n_p + 1)``.
    """
    if n_p < 3:
        raise DomainError(f"grid needs n_p >= 3, got {n_p}")
    if eps is None:
        eps = 1.0 / (n_p + 1)
    if not 0.0 <= eps < 0.5:
        raise DomainError(f"truncation margin must lie in [0, 0.5), got {eps}")
    return Grid(p_lo=eps, p_hi=1.0 - eps, n_p=n_p, n_t=n_t, eps=eps, T=params.T)
