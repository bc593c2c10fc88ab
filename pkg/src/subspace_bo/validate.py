"""Quick invariant self-test run by ``subspace-bo validate``."""

from __future__ import annotations

import math

import numpy as np

from . import gp
from .acquisition import BetaSchedule, InnerOptBudget, argmax_over_pool, beta
from .benchmarks import BenchmarkSpec, make_benchmark
from .bounds import p_series, p_series_upper
from .optimizers import MsUcbConfig, run_msucb
from .subspace import SplitSpec, SubspacePool, embed, pool_size, pool_size_bound, split


def _dense_posterior(model: gp.GpModel, x: np.ndarray) -> tuple[float, float]:
    X = model.data.points
    y = model.data.values - model.y_offset
    K = gp.kernel_matrix(model.config, X, X) + (
        model.config.noise_variance + model.jitter
    ) * np.eye(len(X))
    Kinv = np.linalg.inv(K)
    k = gp.kernel_matrix(model.config, X, x[None, :])[:, 0]
    var = model.config.signal_variance - k @ Kinv @ k
    return float(k @ Kinv @ y + model.y_offset), math.sqrt(max(var, 0.0))


def check_gp(rng) -> bool:
    for family in gp.KernelFamily:
        for _ in range(10):
            D, n = rng.integers(1, 6), rng.integers(2, 15)
            data = gp.Dataset(rng.uniform(-1, 1, (n, D)), rng.normal(size=n))
            model = gp.fit(data, gp.KernelConfig(family, 0.7, 1.3, 0.05))
            x = rng.uniform(-1, 1, D)
            m1, s1 = gp.posterior(model, x)
            m2, s2 = _dense_posterior(model, x)
            if abs(m1 - m2) > 1e-8 or abs(s1 - s2) > 1e-8:
                return False
    return True


def check_round_trip(rng) -> bool:
    for D, d in [(5, 1), (20, 5), (100, 0)]:
        spec = SplitSpec(D, d)
        x = rng.uniform(-1, 1, (200, D))
        y, z = split(spec, x)
        if not np.array_equal(embed(spec, y, z), x):
            return False
    return True


def check_pool(rng) -> bool:
    for n0, a in [(1, 0), (10, 0), (1, 1), (1, 2)]:
        pool = SubspacePool(SplitSpec(6, 2), n0, a, rng=rng)
        for t in range(1, 16):
            pool.grow(t)
            if len(pool) != pool_size(n0, a, t) or not len(pool) < pool_size_bound(n0, a, t):
                return False
    return True


def check_beta(rng) -> bool:
    for v, D, d in [("msucb", 100, 5), ("gpucb", 100, 100), ("degen_d0", 100, 0)]:
        s = BetaSchedule(v, D, d)
        b = [beta(s, t) for t in range(1, 200)]
        if any(b2 < b1 for b1, b2 in zip(b, b[1:])) or b[0] <= 0:
            return False
    return True


def check_p_series(rng) -> bool:
    for p in (-1.5, 0.25, 0.5, 1.0, 2.0):
        for n in (2, 10, 500):
            if not p_series(p, n) < p_series_upper(p, n):
                return False
    return True


def check_containment(rng) -> bool:
    obj = make_benchmark(BenchmarkSpec("ackley", 6), noise_std=0.01)
    rec = run_msucb(obj, MsUcbConfig(split=SplitSpec(6, 2), horizon=5, init_points=5, seed=1))
    if not rec.complete:
        return False
    model = gp.fit(gp.Dataset(np.array([r.x for r in rec.rows]), [r.u for r in rec.rows]),
                   gp.KernelConfig())
    pool = SubspacePool(SplitSpec(6, 2), 3, 0, rng=rng)
    pool.grow(1)
    res = argmax_over_pool(model, 4.0, SplitSpec(6, 2), pool, InnerOptBudget(), rng)
    return all(np.all(np.abs(r.x) <= 1) for r in rec.rows) and np.all(np.abs(res.x) <= 1)


CHECKS = {
    "gp posterior matches dense inverse": check_gp,
    "split/embed round trip": check_round_trip,
    "pool cardinality and bound": check_pool,
    "beta schedules nondecreasing": check_beta,
    "p-series bounds dominate sums": check_p_series,
    "suggestions stay in the box": check_containment,
}


def run_checks(echo=print) -> bool:
    rng = np.random.default_rng(20240101)
    ok = True
    for name, check in CHECKS.items():
        passed = bool(check(rng))
        ok &= passed
        echo(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
