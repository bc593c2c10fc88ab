"""Cumulative-regret bound curves, p-series bounds and acquisition cost model.

These are calculators only: the constants a, b and the information-gain proxy
are user inputs, so the curves are descriptive and not guarantees for any
particular run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .acquisition import BetaSchedule, BetaVariant, beta
from .errors import InvalidArgumentError

_LOG_OVERFLOW = 700.0


# ---------------------------------------------------------------------------
# p-series
# ---------------------------------------------------------------------------


def p_series(p: float, n: int) -> float:
    """Exact partial sum sum_{k=1}^n k^-p by direct accumulation."""
    k = np.arange(1, n + 1, dtype=float)
    return float(np.sum(k ** (-p)))


def p_series_upper(p: float, n: int) -> float:
    """Closed-form upper bound on sum_{k=1}^n k^-p, by regime of p."""
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    if p > 1:
        return 1.0 / (p - 1.0) + 1.0
    if p == 1:
        return 1.0 + math.log(n)
    q = 1.0 - p
    if p >= 0:
        return 1.0 + (n**q - 1.0) / q
    return ((n + 1) ** q - 1.0) / q


# ---------------------------------------------------------------------------
# information-gain proxies
# ---------------------------------------------------------------------------


def gamma_se(dim: int, c: float = 1.0) -> Callable[[float], float]:
    """c (ln T)^(D+1), the squared-exponential rate."""
    return lambda T: c * math.log(T) ** (dim + 1)


def gamma_matern(dim: int, nu: float = 2.5, c: float = 1.0) -> Callable[[float], float]:
    """c T^kappa ln T with kappa = D(D+1) / (2 nu + D(D+1))."""
    kappa = dim * (dim + 1) / (2 * nu + dim * (dim + 1))
    return lambda T: c * T**kappa * math.log(T)


def gamma_proxy(kernel: str, dim: int) -> Callable[[float], float]:
    if kernel == "se":
        return gamma_se(dim)
    if kernel in ("matern", "matern52"):
        return gamma_matern(dim)
    raise InvalidArgumentError(f"unknown kernel {kernel!r}; expected 'se' or 'matern'")


# ---------------------------------------------------------------------------
# regret bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundParams:
    big_dim: int
    low_dim: int
    n0: int = 1
    alpha: int = 0
    delta: float = 0.1
    a_const: float = 1.0
    b_const: float = 1.0
    gamma: Callable[[float], float] | None = None
    sigma2: float = 1e-4

    def __post_init__(self):
        if not 0 <= self.low_dim < self.big_dim:
            raise InvalidArgumentError("need 0 <= d < D")
        if not 0 < self.delta < 1:
            raise InvalidArgumentError("delta must lie in (0, 1)")
        if self.n0 < 1 or self.alpha < 0:
            raise InvalidArgumentError("need n0 >= 1 and alpha >= 0")
        if self.sigma2 <= 0:
            raise InvalidArgumentError("sigma2 must be positive")
        if self.gamma is None:
            object.__setattr__(self, "gamma", gamma_matern(self.big_dim))

    @property
    def c1(self) -> float:
        return 8.0 / math.log(1.0 + self.sigma2)


@dataclass(frozen=True)
class BoundCurve:
    t: np.ndarray
    bound: np.ndarray
    regime: str

    @property
    def per_step(self) -> np.ndarray:
        return self.bound / self.t


def regime(alpha: float, r: int) -> str:
    """Which growth regime alpha falls into for search co-dimension r."""
    if alpha >= 2 * r:
        return "constant"
    if alpha >= r - 1:
        return "logarithmic"
    return "polynomial"


def in_cost_window(alpha: float, big_dim: int, low_dim: int) -> bool:
    """D-d-1 <= alpha < 2(D-d)-1: bound-optimal and cheaper than full-space search."""
    r = big_dim - low_dim
    return r - 1 <= alpha < 2 * r - 1


def _beta_T(p: BoundParams, T: float) -> float:
    variant = BetaVariant.DEGEN_D0 if p.low_dim == 0 else BetaVariant.MSUCB
    return beta(BetaSchedule(variant, p.big_dim, p.low_dim, p.delta, p.a_const, p.b_const), T)


def _v_const(p: BoundParams, r: int) -> float:
    # b sqrt(log(2Da/delta)) ((r+1)!)^(1/r), factorial through log-gamma
    return p.b_const * math.sqrt(math.log(2 * p.big_dim * p.a_const / p.delta)) * math.exp(
        math.lgamma(r + 2) / r
    )


def _curve(p: BoundParams, r: int, horizon: int) -> BoundCurve:
    if horizon < 1:
        raise InvalidArgumentError("horizon must be >= 1")
    which = regime(p.alpha, r)
    v = _v_const(p, r)
    scale = 2.0 * v * (math.log(6.0 / p.delta) / p.n0) ** (1.0 / r)
    ts = np.arange(1, horizon + 1, dtype=float)
    out = np.empty(horizon)
    for i, T in enumerate(ts):
        main = math.sqrt(_beta_T(p, T) * p.c1 * T * p.gamma(T))
        if which == "constant":
            extra = scale
        elif which == "logarithmic":
            extra = scale * (1.0 + math.log(T))
        else:
            e = 1.0 - (p.alpha + 1.0) / r
            extra = scale * r / (r - p.alpha - 1.0) * T**e
        out[i] = main + extra + math.pi**2 / 6.0
    return BoundCurve(t=ts, bound=out, regime=which)


def regret_bound_curve(params: BoundParams, horizon: int) -> BoundCurve:
    """Explicit cumulative-regret bound B(1..horizon) for MS-UCB.

    For d = 0 the co-dimension is D and the d = 0 exploration schedule is used.
    """
    return _curve(params, params.big_dim - params.low_dim, horizon)


def effective_dim_bound_curve(params: BoundParams, d_e: int, horizon: int) -> BoundCurve:
    """Bound curve when f varies only along a d_e-dimensional linear subspace."""
    if not 1 <= d_e <= params.big_dim:
        raise InvalidArgumentError("need 1 <= d_e <= D")
    return _curve(params, d_e, horizon)


# ---------------------------------------------------------------------------
# acquisition cost
# ---------------------------------------------------------------------------


def acq_cost_log(big_dim: int, low_dim: int, alpha: int, n0: int, horizon: int, zeta: float):
    """Natural logs of (MS-UCB, full-space) acquisition call counts at ``horizon``."""
    if not 0 < zeta < 1:
        raise InvalidArgumentError("zeta must lie in (0, 1)")
    log_pool = math.log(n0) + (alpha + 1) * math.log(horizon + 1) - math.log(alpha + 1)
    return log_pool - low_dim * math.log(zeta), -big_dim * math.log(zeta)


def acq_cost_model(big_dim: int, low_dim: int, alpha: int, n0: int, horizon: int, zeta: float):
    """Grid-search call counts (|Z_T| zeta^-d, zeta^-D); inf where they overflow.

    Use :func:`acq_cost_log` to compare counts that overflow a float.
    """
    lm, lf = acq_cost_log(big_dim, low_dim, alpha, n0, horizon, zeta)
    return tuple(math.exp(v) if v < _LOG_OVERFLOW else math.inf for v in (lm, lf))
