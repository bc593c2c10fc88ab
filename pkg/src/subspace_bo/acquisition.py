"""UCB acquisition, exploration schedules and budgeted maximization over subspaces."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import gp
from .errors import InvalidArgumentError, InvalidConfigError, InvalidStateError
from .subspace import Anchor, SplitSpec, SubspacePool, embed

_SCREEN_CHUNK = 20_000


class BetaVariant(str, enum.Enum):
    MSUCB = "msucb"
    GPUCB = "gpucb"
    DEGEN_D0 = "degen_d0"


@dataclass(frozen=True)
class BetaSchedule:
    variant: BetaVariant
    big_dim: int
    low_dim: int
    delta: float = 0.1
    a_const: float = 1.0
    b_const: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "variant", BetaVariant(self.variant))
        if not 0.0 < self.delta < 1.0:
            raise InvalidConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if self.a_const <= 0 or self.b_const <= 0:
            raise InvalidConfigError("a_const and b_const must be positive")
        if self.variant is BetaVariant.MSUCB and self.low_dim == 0:
            raise InvalidConfigError("d = 0 requires the degen_d0 schedule")


def beta(schedule: BetaSchedule, t: int) -> float:
    """Exploration weight beta_t for iteration t >= 1."""
    if t < 1:
        raise InvalidArgumentError(f"t must be >= 1, got {t}")
    delta = schedule.delta
    a, b = schedule.a_const, schedule.b_const
    lead = math.pi**2 * t * t
    if schedule.variant is BetaVariant.DEGEN_D0:
        return 4.0 * math.log(lead / (2.0 * delta))
    if schedule.variant is BetaVariant.MSUCB:
        d, D = schedule.low_dim, schedule.big_dim
        return 2.0 * math.log(lead / delta) + 2.0 * d * math.log(
            2.0 * b * d * math.sqrt(math.log(6.0 * D * a / delta)) * t * t
        )
    D = schedule.big_dim
    return 2.0 * math.log(lead / (3.0 * delta)) + 2.0 * D * math.log(
        2.0 * b * D * math.sqrt(math.log(2.0 * D * a / delta)) * t * t
    )


def ucb_batch(model: gp.GpModel, beta_t: float, X: np.ndarray) -> np.ndarray:
    mean, std = gp.posterior_batch(model, X)
    return mean + math.sqrt(beta_t) * std


def ucb(model: gp.GpModel, beta_t: float, x) -> float:
    if not beta_t > 0:
        raise InvalidArgumentError(f"beta_t must be > 0, got {beta_t}")
    mean, std = gp.posterior(model, x)
    return mean + math.sqrt(beta_t) * std


@dataclass(frozen=True)
class InnerOptBudget:
    """Evaluation budget for one acquisition maximization.

    ``restarts_per_subspace=None`` resolves to max(2, ceil(10 d / |pool|)).
    ``total_eval_cap=None`` resolves to 10 D screening evaluations plus the
    refinement allowance, i.e. what full-space search spends with this budget.
    ``local_starts`` is how many of the best screened starts get local refinement.
    """

    restarts_per_subspace: int | None = None
    max_evals_per_restart: int = 30
    total_eval_cap: int | None = None
    local_starts: int = 5

    def __post_init__(self):
        if self.restarts_per_subspace is not None and self.restarts_per_subspace < 1:
            raise InvalidConfigError("restarts_per_subspace must be positive")
        if self.max_evals_per_restart < 1 or self.local_starts < 0:
            raise InvalidConfigError("max_evals_per_restart must be positive")
        if self.total_eval_cap is not None:
            if self.total_eval_cap < max(1, self.restarts_per_subspace or 1):
                raise InvalidConfigError("total_eval_cap must be >= restarts_per_subspace")

    def restarts(self, low_dim: int, n_subspaces: int) -> int:
        if low_dim == 0:
            return 1
        if self.restarts_per_subspace is not None:
            return self.restarts_per_subspace
        return max(2, math.ceil(10 * low_dim / n_subspaces))

    def cap(self, big_dim: int) -> int:
        if self.total_eval_cap is not None:
            return self.total_eval_cap
        return 10 * big_dim + self.local_starts * max(self.max_evals_per_restart - 1, 0)


@dataclass
class AcqResult:
    x: np.ndarray
    value: float
    anchor_index: int
    y: np.ndarray
    n_evals: int
    # best value found on each subspace; nan where a subspace was not screened
    per_subspace: np.ndarray


class _BudgetSpent(Exception):
    pass


def _maximize(
    model: gp.GpModel,
    beta_t: float,
    Z: np.ndarray,
    low_dim: int,
    assemble,
    free_idx: np.ndarray,
    budget: InnerOptBudget,
    rng: np.random.Generator,
) -> AcqResult:
    """Screen random starts on every subspace, then refine the best ones.

    ``Z`` holds one row per subspace; ``assemble(Y, Z)`` maps free coordinates
    (..., d) and anchor rows (..., k) to full points, and ``free_idx`` lists the
    full-space coordinates that y controls (for the chain rule).
    """
    if not beta_t > 0:
        raise InvalidArgumentError(f"beta_t must be > 0, got {beta_t}")
    n = Z.shape[0]
    if n == 0:
        raise InvalidStateError("cannot maximize over an empty pool")
    d = low_dim
    sqrt_beta = math.sqrt(beta_t)
    cap = budget.cap(model.dim)
    m = budget.max_evals_per_restart
    r = budget.restarts(d, n)

    refine_k = 0 if d == 0 else min(budget.local_starts, n * r)
    reserve = refine_k * max(m - 1, 0)
    n_screen = min(n * r, max(1, cap - reserve))
    if n_screen >= n:
        sel = np.arange(n)
        r_eff = min(r, n_screen // n)
    else:
        sel = np.sort(rng.choice(n, size=n_screen, replace=False))
        r_eff = 1
    Y = rng.uniform(-1.0, 1.0, size=(sel.size, r_eff, d))
    owner = np.repeat(sel, r_eff)
    Yflat = Y.reshape(sel.size * r_eff, d)

    vals = np.empty(Yflat.shape[0])
    for lo in range(0, Yflat.shape[0], _SCREEN_CHUNK):
        hi = lo + _SCREEN_CHUNK
        X = assemble(Yflat[lo:hi], Z[owner[lo:hi]])
        vals[lo:hi] = ucb_batch(model, beta_t, X)
    evals = vals.size

    per_subspace = np.full(n, np.nan)
    np.fmax.at(per_subspace, owner, vals)
    best_y = Yflat.copy()
    best_v = vals.copy()

    remaining = cap - evals
    order = np.argsort(-vals, kind="stable")[:refine_k]
    for j in order:
        allowance = min(m - 1, remaining)
        if allowance < 1:
            break
        z = Z[owner[j]]
        calls = 0
        seen = [best_v[j], best_y[j]]

        def neg_ucb(y, z=z):
            nonlocal calls
            if calls >= allowance:
                raise _BudgetSpent
            calls += 1
            y = np.clip(y, -1.0, 1.0)
            x = assemble(y[None, :], z[None, :])
            mu, sd, dmu, dsd = gp.posterior_with_grad(model, x)
            v = float(mu[0] + sqrt_beta * sd[0])
            if v > seen[0]:
                seen[0], seen[1] = v, y.copy()
            g = (dmu[0] + sqrt_beta * dsd[0])[free_idx]
            return -v, -g

        try:
            minimize(
                neg_ucb,
                best_y[j],
                jac=True,
                method="L-BFGS-B",
                bounds=[(-1.0, 1.0)] * d,
                options={"maxfun": allowance, "maxiter": allowance},
            )
        except _BudgetSpent:
            pass
        evals += calls
        remaining -= calls
        best_v[j], best_y[j] = seen[0], seen[1]
        per_subspace[owner[j]] = max(per_subspace[owner[j]], seen[0])

    top = np.max(best_v)
    # exact ties resolve to the lowest subspace index
    win = int(np.flatnonzero(best_v == top)[np.argmin(owner[best_v == top])])
    y_star = best_y[win]
    i_star = int(owner[win])
    x_star = assemble(y_star[None, :], Z[i_star][None, :])[0]
    return AcqResult(
        x=x_star,
        value=float(top),
        anchor_index=i_star,
        y=y_star,
        n_evals=int(evals),
        per_subspace=per_subspace,
    )


def _subspace_layout(spec: SplitSpec):
    k = spec.anchor_dim
    if spec.permutation is None:
        free_idx = np.arange(k, spec.big_dim)
    else:
        free_idx = np.asarray(spec.permutation[k:])
    return (lambda Y, Z: embed(spec, Y, Z)), free_idx


def maximize_on_subspace(
    model: gp.GpModel,
    beta_t: float,
    spec: SplitSpec,
    anchor: Anchor,
    budget: InnerOptBudget,
    rng: np.random.Generator,
) -> tuple[np.ndarray, float]:
    """Best (y, ucb) found on the single subspace through ``anchor``."""
    if spec.low_dim < 1:
        raise InvalidArgumentError("maximize_on_subspace needs d >= 1")
    assemble, free_idx = _subspace_layout(spec)
    Z = np.asarray(anchor.z, dtype=float).reshape(1, -1)
    res = _maximize(model, beta_t, Z, spec.low_dim, assemble, free_idx, budget, rng)
    return res.y, res.value


def argmax_over_pool(
    model: gp.GpModel,
    beta_t: float,
    spec: SplitSpec,
    pool: SubspacePool | np.ndarray,
    budget: InnerOptBudget,
    rng: np.random.Generator,
) -> AcqResult:
    """Maximize UCB over the union of all pool subspaces."""
    Z = pool.z if isinstance(pool, SubspacePool) else np.asarray(pool, dtype=float)
    if Z.shape[0] == 0:
        raise InvalidStateError("subspace pool is empty")
    assemble, free_idx = _subspace_layout(spec)
    return _maximize(model, beta_t, Z, spec.low_dim, assemble, free_idx, budget, rng)


def argmax_full_space(
    model: gp.GpModel,
    beta_t: float,
    budget: InnerOptBudget,
    rng: np.random.Generator,
) -> AcqResult:
    """Maximize UCB over the whole box [-1, 1]^D (GP-UCB)."""
    D = model.dim
    Z = np.empty((1, 0))
    return _maximize(
        model, beta_t, Z, D, lambda Y, Z: np.asarray(Y, dtype=float), np.arange(D), budget, rng
    )
