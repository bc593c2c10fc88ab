import math

import numpy as np
import pytest

from subspace_bo.acquisition import InnerOptBudget
from subspace_bo.benchmarks import BenchmarkSpec, Objective, make_benchmark
from subspace_bo.optimizers import (
    MsUcbConfig,
    initial_design,
    run_gpucb,
    run_line_baseline,
    run_msucb,
    run_random_search,
)
from subspace_bo.subspace import SplitSpec, pool_size

FAST = InnerOptBudget(max_evals_per_restart=10, local_starts=2)


def _cfg(D, d, **kw):
    kw.setdefault("budget", FAST)
    kw.setdefault("init_points", 5)
    kw.setdefault("hyper_budget", 10)
    return MsUcbConfig(split=SplitSpec(D, d), **kw)


def test_single_step_trace():
    obj = make_benchmark(BenchmarkSpec("hyper_ellipsoid", 4))
    rec = run_msucb(obj, _cfg(4, 2, horizon=1))
    assert rec.complete
    assert len(rec.rows) == 6
    assert [r.t for r in rec.rows] == [-4, -3, -2, -1, 0, 1]
    assert rec.final.pool_size == 1


def test_event_order():
    obj = make_benchmark(BenchmarkSpec("levy", 3))
    events = []
    run_msucb(obj, _cfg(3, 1, horizon=3), events=events)
    names = [e for e, _ in events]
    assert names == ["grow", "acquire", "observe", "refit"] * 3
    assert [t for _, t in events] == [1] * 4 + [2] * 4 + [3] * 4


@pytest.mark.parametrize("n0, alpha", [(1, 0), (3, 0), (1, 1), (2, 2)])
def test_pool_size_column(n0, alpha):
    obj = make_benchmark(BenchmarkSpec("ackley", 6))
    rec = run_msucb(obj, _cfg(6, 2, horizon=6, n0=n0, alpha=alpha))
    assert [r.pool_size for r in rec.iterations()] == [pool_size(n0, alpha, t) for t in range(1, 7)]


def test_line_baseline_single_line_each_step():
    obj = make_benchmark(BenchmarkSpec("ackley", 6))
    rec = run_line_baseline(obj, _cfg(6, 3, horizon=5, n0=4, alpha=2))
    assert [r.pool_size for r in rec.iterations()] == [1] * 5


def test_determinism():
    obj = make_benchmark(BenchmarkSpec("levy", 5), noise_std=0.01)
    for runner in (run_msucb, run_gpucb, run_line_baseline):
        a = runner(obj, _cfg(5, 2, horizon=4, seed=7))
        b = runner(obj, _cfg(5, 2, horizon=4, seed=7))
        assert [r.u for r in a.rows] == [r.u for r in b.rows]
        np.testing.assert_array_equal(np.array([r.x for r in a.rows]), np.array([r.x for r in b.rows]))


def test_shared_initial_design():
    obj = make_benchmark(BenchmarkSpec("levy", 5))
    X0 = initial_design(5, 5, seed=3)
    recs = [
        run_msucb(obj, _cfg(5, 2, horizon=1, seed=3)),
        run_gpucb(obj, _cfg(5, 2, horizon=1, seed=3)),
        run_random_search(obj, 1, 3, init_points=5),
    ]
    for rec in recs:
        np.testing.assert_array_equal(np.array([r.x for r in rec.rows[:5]]), X0)


def test_containment_and_regret_bookkeeping():
    obj = make_benchmark(BenchmarkSpec("hyper_ellipsoid", 5))
    for runner in (run_msucb, run_gpucb, run_line_baseline):
        rec = runner(obj, _cfg(5, 2, horizon=6, seed=1))
        assert rec.complete
        xs = np.array([r.x for r in rec.rows])
        assert np.all(np.abs(xs) <= 1.0)
        its = rec.iterations()
        assert all(r.r_t >= 0 for r in its)
        np.testing.assert_allclose([r.R_t for r in its], np.cumsum([r.r_t for r in its]), rtol=1e-12)
        bt = [r.best_true for r in rec.rows]
        assert all(b2 >= b1 for b1, b2 in zip(bt, bt[1:]))


def test_d0_end_to_end():
    obj = make_benchmark(BenchmarkSpec("ackley", 4))
    rec = run_msucb(obj, _cfg(4, 0, horizon=4, n0=3))
    assert rec.complete
    # with d = 0 each suggestion is one of the pool anchors
    assert [r.pool_size for r in rec.iterations()] == [3, 6, 9, 12]


def test_acq_evals_within_cap():
    obj = make_benchmark(BenchmarkSpec("ackley", 8))
    cfg = _cfg(8, 2, horizon=4, n0=10, alpha=1)
    for runner in (run_msucb, run_gpucb, run_line_baseline):
        rec = runner(obj, cfg)
        assert all(0 < r.acq_evals <= FAST.cap(8) for r in rec.iterations())


def test_objective_failure_gives_incomplete_record():
    calls = {"n": 0}

    def flaky(x):
        calls["n"] += 1
        if calls["n"] > 7:
            raise RuntimeError("simulator crashed")
        return -float(np.sum(x**2))

    obj = Objective(dim=3, fn=flaky, noise_std=0.0, known_optimum=0.0, name="flaky")
    rec = run_msucb(obj, _cfg(3, 1, horizon=5))
    assert not rec.complete
    assert "simulator crashed" in rec.error
    assert len(rec.rows) == 7


def test_random_search_on_linear_function():
    obj = Objective(dim=1, fn=lambda x: float(x[0]), noise_std=0.0, known_optimum=1.0, name="lin")
    finals = [run_random_search(obj, 100, s, init_points=1).final.best_true for s in range(50)]
    assert np.median(finals) > 0.9


def test_gpucb_finds_quadratic_peak():
    obj = Objective(dim=2, fn=lambda x: -float(np.sum((x - 0.3) ** 2)), noise_std=0.0,
                    known_optimum=0.0, name="quad")
    rec = run_gpucb(obj, _cfg(2, 1, horizon=30, budget=InnerOptBudget()))
    assert rec.final.best_true > -1e-2


def test_msucb_improves_over_initial_design():
    obj = make_benchmark(BenchmarkSpec("hyper_ellipsoid", 10))
    wins = 0
    for seed in range(10):
        rec = run_msucb(obj, _cfg(10, 3, horizon=30, seed=seed))
        init_best = rec.rows[4].best_true
        wins += rec.final.best_true > init_best
    assert wins >= 9
