import math

import numpy as np
import pytest

from subspace_bo import gp
from subspace_bo.acquisition import (
    BetaSchedule,
    InnerOptBudget,
    argmax_full_space,
    argmax_over_pool,
    beta,
    maximize_on_subspace,
    ucb,
    ucb_batch,
)
from subspace_bo.errors import InvalidConfigError, InvalidStateError
from subspace_bo.subspace import Anchor, SplitSpec, SubspacePool, embed


def _model(rng, n=5, D=3, ell=0.5):
    X = rng.uniform(-1, 1, (n, D))
    return gp.fit(gp.Dataset(X, rng.normal(size=n)), gp.KernelConfig("matern52", ell, 1.0, 1e-4))


def test_beta_degenerate_value():
    s = BetaSchedule("degen_d0", 10, 0, delta=0.5)
    expected = 4 * math.log(math.pi**2 * 1 / (2 * 0.5))
    assert beta(s, 1) == pytest.approx(expected, rel=1e-14)
    assert beta(s, 1) == pytest.approx(9.157839, abs=1e-6)


def test_beta_msucb_formula():
    s = BetaSchedule("msucb", 100, 5, delta=0.1, a_const=2.0, b_const=3.0)
    t = 7
    expected = 2 * math.log(math.pi**2 * t**2 / 0.1) + 2 * 5 * math.log(
        2 * 3.0 * 5 * math.sqrt(math.log(6 * 100 * 2.0 / 0.1)) * t**2
    )
    assert beta(s, t) == pytest.approx(expected, rel=1e-14)


def test_beta_msucb_monotone():
    s = BetaSchedule("msucb", 100, 5, delta=0.1)
    b = [beta(s, t) for t in range(1, 1002)]
    assert all(b2 >= b1 for b1, b2 in zip(b, b[1:]))


def test_beta_msucb_below_full_dimensional():
    ms = BetaSchedule("msucb", 100, 1, delta=0.1)
    full = BetaSchedule("gpucb", 100, 100, delta=0.1)
    for t in (1, 10, 100, 1000):
        assert beta(ms, t) < beta(full, t)


def test_beta_d0_requires_degenerate_variant():
    with pytest.raises(InvalidConfigError):
        BetaSchedule("msucb", 10, 0)


def test_beta_delta_range():
    with pytest.raises(InvalidConfigError):
        BetaSchedule("msucb", 10, 2, delta=1.0)


def test_ucb_exploitation_limit(rng):
    model = _model(rng)
    x = rng.uniform(-1, 1, 3)
    mean, _ = gp.posterior(model, x)
    assert abs(ucb(model, 1e-12, x) - mean) < 1e-5


def test_ucb_on_prior():
    model = gp.prior(gp.KernelConfig("se", 0.3, 2.0, 0.0), 4)
    assert ucb(model, 9.0, np.zeros(4)) == pytest.approx(3.0 * math.sqrt(2.0))


def test_ucb_dominates_mean(rng):
    model = _model(rng)
    X = rng.uniform(-1, 1, (50, 3))
    mean, _ = gp.posterior_batch(model, X)
    assert np.all(ucb_batch(model, 4.0, X) >= mean)


def test_maximize_on_prior_is_constant(rng):
    spec = SplitSpec(4, 1)
    model = gp.prior(gp.KernelConfig("matern52", 0.5, 1.5, 0.0), 4)
    y, value = maximize_on_subspace(
        model, 4.0, spec, Anchor(np.zeros(3), 1), InnerOptBudget(), rng
    )
    assert value == pytest.approx(2.0 * math.sqrt(1.5))
    assert np.all(np.abs(y) <= 1)


def test_maximize_dominates_its_starts():
    spec = SplitSpec(3, 1)
    z = np.array([0.2, -0.4])
    X = embed(spec, np.array([[0.3]]), z[None, :])
    model = gp.fit(gp.Dataset(X, [1.0]), gp.KernelConfig("se", 0.4, 1.0, 0.0))
    budget = InnerOptBudget(restarts_per_subspace=6, local_starts=6)
    starts = np.random.default_rng(5).uniform(-1, 1, (1, 6, 1)).reshape(-1, 1)
    _, value = maximize_on_subspace(
        model, 25.0, spec, Anchor(z, 1), budget, np.random.default_rng(5)
    )
    start_vals = ucb_batch(model, 25.0, embed(spec, starts, z[None, :]))
    assert value >= start_vals.max()


def test_maximize_matches_dense_grid(rng):
    spec = SplitSpec(3, 1)
    budget = InnerOptBudget(restarts_per_subspace=10, local_starts=10, max_evals_per_restart=40)
    grid = np.linspace(-1, 1, 10_001)[:, None]
    for _ in range(20):
        model = _model(rng, n=5, D=3, ell=0.5)
        z = rng.uniform(-1, 1, 2)
        b = float(rng.uniform(0.5, 9.0))
        grid_max = ucb_batch(model, b, embed(spec, grid, z[None, :])).max()
        y, value = maximize_on_subspace(model, b, spec, Anchor(z, 1), budget, rng)
        assert -1 <= y[0] <= 1
        assert value >= grid_max - 1e-3
        assert value == pytest.approx(ucb(model, b, embed(spec, y, z)), abs=1e-12)


def test_argmax_d0_is_enumeration(rng):
    spec = SplitSpec(4, 0)
    model = _model(rng, n=6, D=4)
    pool = SubspacePool(spec, 5, 0, rng=1)
    pool.grow(1)
    res = argmax_over_pool(model, 3.0, spec, pool, InnerOptBudget(), rng)
    vals = ucb_batch(model, 3.0, pool.z)
    assert res.anchor_index == int(np.argmax(vals))
    np.testing.assert_array_equal(res.x, pool.z[res.anchor_index])
    assert res.value == vals.max()
    assert res.n_evals == 5


def test_singleton_pool_equals_subspace_maximization(rng):
    spec = SplitSpec(5, 2)
    model = _model(rng, n=8, D=5)
    pool = SubspacePool(spec, 1, 0, rng=2)
    pool.grow(1)
    res = argmax_over_pool(model, 4.0, spec, pool, InnerOptBudget(), np.random.default_rng(9))
    y, value = maximize_on_subspace(
        model, 4.0, spec, pool.anchors[0], InnerOptBudget(), np.random.default_rng(9)
    )
    np.testing.assert_array_equal(res.y, y)
    assert res.value == value


def test_pool_value_is_max_of_subspaces(rng):
    spec = SplitSpec(6, 2)
    model = _model(rng, n=10, D=6)
    pool = SubspacePool(spec, 4, 1, rng=4)
    for t in range(1, 4):
        pool.grow(t)
    res = argmax_over_pool(model, 4.0, spec, pool, InnerOptBudget(), rng)
    screened = res.per_subspace[~np.isnan(res.per_subspace)]
    assert res.value == screened.max()
    assert np.all(np.abs(res.x) <= 1)
    np.testing.assert_array_equal(res.x[:4], pool.z[res.anchor_index])


def test_empty_pool_raises(rng):
    spec = SplitSpec(4, 1)
    with pytest.raises(InvalidStateError):
        argmax_over_pool(_model(rng, D=4), 1.0, spec, SubspacePool(spec), InnerOptBudget(), rng)


def test_budget_accounting(rng):
    spec = SplitSpec(10, 3)
    model = _model(rng, n=12, D=10)
    for n0, alpha, budget in [
        (1, 0, InnerOptBudget()),
        (5, 1, InnerOptBudget(max_evals_per_restart=10)),
        (20, 2, InnerOptBudget(total_eval_cap=300)),
        (1, 0, InnerOptBudget(restarts_per_subspace=3, local_starts=3, max_evals_per_restart=4)),
    ]:
        pool = SubspacePool(spec, n0, alpha, rng=0)
        for t in range(1, 5):
            pool.grow(t)
            res = argmax_over_pool(model, 2.0, spec, pool, budget, rng)
            r = budget.restarts(3, len(pool))
            assert res.n_evals <= len(pool) * r * budget.max_evals_per_restart
            assert res.n_evals <= budget.cap(10)


def test_default_budget_parity_with_full_space(rng):
    model = _model(rng, n=12, D=20)
    budget = InnerOptBudget()
    full = argmax_full_space(model, 4.0, budget, rng)
    assert full.n_evals <= budget.cap(20)
    spec = SplitSpec(20, 5)
    for n0, alpha in [(1, 0), (10, 0), (1, 1), (1, 2)]:
        pool = SubspacePool(spec, n0, alpha, rng=0)
        for t in range(1, 8):
            pool.grow(t)
        res = argmax_over_pool(model, 4.0, spec, pool, budget, rng)
        assert res.n_evals <= budget.cap(20)


def test_argmax_determinism(rng):
    spec = SplitSpec(8, 2)
    model = _model(rng, n=10, D=8)
    pool = SubspacePool(spec, 3, 1, rng=0)
    for t in range(1, 4):
        pool.grow(t)
    a = argmax_over_pool(model, 4.0, spec, pool, InnerOptBudget(), np.random.default_rng(1))
    b = argmax_over_pool(model, 4.0, spec, pool, InnerOptBudget(), np.random.default_rng(1))
    np.testing.assert_array_equal(a.x, b.x)
    assert a.value == b.value


def test_tie_break_lowest_index():
    spec = SplitSpec(3, 0)
    model = gp.prior(gp.KernelConfig(), 3)
    Z = np.array([[0.1, 0.2, 0.3], [0.0, 0.0, 0.0], [-0.5, 0.5, 0.0]])
    res = argmax_over_pool(model, 2.0, spec, Z, InnerOptBudget(), np.random.default_rng(0))
    assert res.anchor_index == 0


def test_grid_near_optimality_over_pool(rng):
    # d = 1: dense grid over every subspace of a small pool
    spec = SplitSpec(3, 1)
    grid = np.linspace(-1, 1, 4001)[:, None]
    budget = InnerOptBudget(restarts_per_subspace=8, local_starts=24, max_evals_per_restart=40)
    for _ in range(5):
        model = _model(rng, n=5, D=3, ell=0.6)
        pool = SubspacePool(spec, 3, 0, rng=rng)
        pool.grow(1)
        best = max(ucb_batch(model, 4.0, embed(spec, grid, z[None, :])).max() for z in pool.z)
        res = argmax_over_pool(model, 4.0, spec, pool, budget, rng)
        assert res.value >= best - 1e-3
