"""MS-UCB and baseline optimizers sharing one run-record format.

Every optimizer maximizes an :class:`~subspace_bo.benchmarks.Objective` over
[-1, 1]^D.  A run starts from ``init_points`` uniform random points (recorded
at t <= 0) and then performs ``horizon`` acquisition steps.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import gp
from .acquisition import (
    BetaSchedule,
    BetaVariant,
    InnerOptBudget,
    argmax_full_space,
    argmax_over_pool,
    beta,
)
from .benchmarks import Objective, log_distance
from .errors import InvalidConfigError, InvalidStateError
from .subspace import SplitSpec, SubspacePool

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MsUcbConfig:
    split: SplitSpec
    horizon: int = 100
    n0: int = 1
    alpha: int = 0
    delta: float = 0.1
    a_const: float = 1.0
    b_const: float = 1.0
    init_points: int = 20
    budget: InnerOptBudget = field(default_factory=InnerOptBudget)
    kernel: gp.KernelFamily = gp.KernelFamily.MATERN52
    refit_every: int = 5
    hyper_budget: int = 60
    seed: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise InvalidConfigError("horizon must be >= 1")
        if self.init_points < 1:
            raise InvalidConfigError("init_points must be >= 1")
        if self.refit_every < 1:
            raise InvalidConfigError("refit_every must be >= 1")
        if int(self.n0) != self.n0 or self.n0 < 1:
            raise InvalidConfigError("n0 must be an integer >= 1")
        if int(self.alpha) != self.alpha or self.alpha < 0:
            raise InvalidConfigError("alpha must be an integer >= 0")
        if not 0 < self.delta < 1:
            raise InvalidConfigError("delta must lie in (0, 1)")


@dataclass
class Row:
    t: int
    x: np.ndarray
    u: float
    f_true: float | None
    best_observed: float
    best_true: float | None
    r_t: float | None
    R_t: float | None
    pool_size: int
    acq_evals: int
    elapsed: float


@dataclass
class RunRecord:
    optimizer: str
    seed: int
    known_optimum: float | None
    rows: list[Row] = field(default_factory=list)
    complete: bool = True
    error: str | None = None

    def iterations(self) -> list[Row]:
        """Rows of the acquisition steps, t >= 1."""
        return [r for r in self.rows if r.t >= 1]

    def log_dist(self, row: Row) -> float | None:
        if self.known_optimum is None or row.best_true is None:
            return None
        return log_distance(row.best_true, self.known_optimum)

    @property
    def final(self) -> Row:
        return self.rows[-1]


@dataclass
class _Streams:
    init: np.random.Generator
    pool: np.random.Generator
    acq: np.random.Generator
    noise: np.random.Generator
    hyper: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "_Streams":
        children = np.random.SeedSequence(seed).spawn(5)
        return cls(*(np.random.default_rng(s) for s in children))


def initial_design(dim: int, n: int, seed: int) -> np.ndarray:
    """The uniform initial design used by every optimizer for this seed."""
    return _Streams.from_seed(seed).init.uniform(-1.0, 1.0, size=(n, dim))


class _Tracker:
    """Accumulates rows and the incumbents."""

    def __init__(self, obj: Objective, record: RunRecord):
        self.obj = obj
        self.record = record
        self.best_obs = -math.inf
        self.best_true = -math.inf
        self.R = 0.0
        self.start = time.perf_counter()

    def add(self, t: int, x, u: float, f_true: float, pool_size: int, evals: int) -> None:
        self.best_obs = max(self.best_obs, u)
        self.best_true = max(self.best_true, f_true)
        known = self.obj.known_optimum
        r_t = R_t = None
        if t >= 1 and known is not None:
            r_t = known - f_true
            self.R += r_t
            R_t = self.R
        self.record.rows.append(
            Row(
                t=t,
                x=np.array(x, dtype=float),
                u=u,
                f_true=f_true,
                best_observed=self.best_obs,
                best_true=self.best_true,
                r_t=r_t,
                R_t=R_t,
                pool_size=pool_size,
                acq_evals=evals,
                elapsed=time.perf_counter() - self.start,
            )
        )


def _observe(obj: Objective, x: np.ndarray, rng: np.random.Generator) -> tuple[float, float]:
    f = obj(x)
    noise = obj.noise_std * rng.standard_normal() if obj.noise_std > 0 else 0.0
    return f + noise, f


def _initial_kernel(family: gp.KernelFamily, data: gp.Dataset) -> gp.KernelConfig:
    var = float(np.var(data.values))
    var = var if var > 0 else 1.0
    return gp.KernelConfig(
        family=family,
        lengthscale=0.5 * math.sqrt(data.dim),
        signal_variance=var,
        noise_variance=1e-3 * var,
    )


def _run_loop(obj: Objective, config: MsUcbConfig, name: str, propose, events=None) -> RunRecord:
    """Shared BO loop; ``propose(model, t, streams)`` returns (x, pool_size, evals)."""
    streams = _Streams.from_seed(config.seed)
    record = RunRecord(optimizer=name, seed=config.seed, known_optimum=obj.known_optimum)
    tracker = _Tracker(obj, record)
    X0 = streams.init.uniform(-1.0, 1.0, size=(config.init_points, obj.dim))
    try:
        us = []
        for i, x in enumerate(X0):
            u, f = _observe(obj, x, streams.noise)
            us.append(u)
            tracker.add(i + 1 - config.init_points, x, u, f, 0, 0)
        data = gp.Dataset(X0, us)
        kcfg = gp.fit_hyperparameters(
            data, _initial_kernel(config.kernel, data), config.hyper_budget, rng=streams.hyper
        ) if len(data) >= 2 else _initial_kernel(config.kernel, data)
        model = gp.fit(data, kcfg)

        for t in range(1, config.horizon + 1):
            x, pool_size, evals = propose(model, t, streams)
            if events is not None:
                events.append(("observe", t))
            u, f = _observe(obj, x, streams.noise)
            tracker.add(t, x, u, f, pool_size, evals)
            data = data.append(x, u)
            if t % config.refit_every == 0:
                kcfg = gp.fit_hyperparameters(data, kcfg, config.hyper_budget, rng=streams.hyper)
            model = gp.fit(data, kcfg)
            if events is not None:
                events.append(("refit", t))
    except Exception as exc:  # noqa: BLE001 - partial record is the contract
        log.warning("%s run (seed %d) aborted: %s", name, config.seed, exc)
        record.complete = False
        record.error = f"{type(exc).__name__}: {exc}"
    return record


def _check_box(x: np.ndarray) -> np.ndarray:
    if not np.all(np.abs(x) <= 1.0):
        raise InvalidStateError("suggested point left [-1, 1]^D")
    return x


def run_msucb(obj: Objective, config: MsUcbConfig, events: list | None = None) -> RunRecord:
    """Run MS-UCB: grow the pool, maximize UCB over it, observe, refit."""
    split = config.split
    if split.big_dim != obj.dim:
        raise InvalidConfigError(f"split is for D={split.big_dim}, objective has D={obj.dim}")
    variant = BetaVariant.DEGEN_D0 if split.low_dim == 0 else BetaVariant.MSUCB
    schedule = BetaSchedule(variant, split.big_dim, split.low_dim, config.delta,
                            config.a_const, config.b_const)
    pool = None

    def propose(model, t, streams):
        nonlocal pool
        if pool is None:
            pool = SubspacePool(split, config.n0, config.alpha, rng=streams.pool)
        pool.grow(t)
        if events is not None:
            events.append(("grow", t))
        res = argmax_over_pool(model, beta(schedule, t), split, pool, config.budget, streams.acq)
        if events is not None:
            events.append(("acquire", t))
        return _check_box(res.x), len(pool), res.n_evals

    return _run_loop(obj, config, "msucb", propose, events)


def run_gpucb(obj: Objective, config: MsUcbConfig, events: list | None = None) -> RunRecord:
    """GP-UCB on the full box with the same inner budget object."""
    schedule = BetaSchedule(BetaVariant.GPUCB, obj.dim, obj.dim, config.delta,
                            config.a_const, config.b_const)

    def propose(model, t, streams):
        res = argmax_full_space(model, beta(schedule, t), config.budget, streams.acq)
        if events is not None:
            events.append(("acquire", t))
        return _check_box(res.x), 0, res.n_evals

    return _run_loop(obj, config, "gpucb", propose, events)


def run_line_baseline(obj: Objective, config: MsUcbConfig, events: list | None = None) -> RunRecord:
    """One fresh axis-aligned line per iteration (d = 1, pool replaced, not grown)."""
    split = SplitSpec(obj.dim, 1, config.split.permutation if config.split.big_dim == obj.dim else None)
    schedule = BetaSchedule(BetaVariant.MSUCB, obj.dim, 1, config.delta,
                            config.a_const, config.b_const)
    pool = None

    def propose(model, t, streams):
        nonlocal pool
        if pool is None:
            pool = SubspacePool(split, 1, 0, rng=streams.pool)
        pool.replace(t)
        if events is not None:
            events.append(("grow", t))
        res = argmax_over_pool(model, beta(schedule, t), split, pool, config.budget, streams.acq)
        if events is not None:
            events.append(("acquire", t))
        return _check_box(res.x), len(pool), res.n_evals

    return _run_loop(obj, replace(config, split=split), "line", propose, events)


def run_random_search(obj: Objective, horizon: int, seed: int, init_points: int = 20) -> RunRecord:
    """Uniform random search; shares the initial design of the BO runs."""
    streams = _Streams.from_seed(seed)
    record = RunRecord(optimizer="random", seed=seed, known_optimum=obj.known_optimum)
    tracker = _Tracker(obj, record)
    X0 = streams.init.uniform(-1.0, 1.0, size=(init_points, obj.dim))
    try:
        for i, x in enumerate(X0):
            u, f = _observe(obj, x, streams.noise)
            tracker.add(i + 1 - init_points, x, u, f, 0, 0)
        for t in range(1, horizon + 1):
            x = streams.acq.uniform(-1.0, 1.0, size=obj.dim)
            u, f = _observe(obj, x, streams.noise)
            tracker.add(t, x, u, f, 0, 0)
    except Exception as exc:  # noqa: BLE001
        log.warning("random run (seed %d) aborted: %s", seed, exc)
        record.complete = False
        record.error = f"{type(exc).__name__}: {exc}"
    return record
