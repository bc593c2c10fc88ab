"""Gaussian-process regression: kernels, exact posterior, hyperparameter fitting.

All inputs live in the box [-1, 1]^D.  The prior mean is zero; observed values
are centred on their empirical mean before fitting and the offset is added back
at prediction time.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import FactorizationError, InvalidArgumentError

_SQRT5 = math.sqrt(5.0)
_JITTER_START = 1e-10
_JITTER_MAX = 1e-4
# variance bounds are relative to the sample variance of the observed values
_LOG_BOUNDS = {
    "lengthscale": (math.log(1e-2), math.log(1e2)),
    "signal_variance": (math.log(1e-6), math.log(1e6)),
    "noise_variance": (math.log(1e-10), math.log(1e2)),
}


class KernelFamily(str, enum.Enum):
    MATERN52 = "matern52"
    SQUARED_EXPONENTIAL = "se"


@dataclass(frozen=True)
class KernelConfig:
    family: KernelFamily = KernelFamily.MATERN52
    lengthscale: float = 1.0
    signal_variance: float = 1.0
    noise_variance: float = 1e-4

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if not self.lengthscale > 0:
            raise InvalidArgumentError(f"lengthscale must be > 0, got {self.lengthscale}")
        if not self.signal_variance > 0:
            raise InvalidArgumentError(
                f"signal_variance must be > 0, got {self.signal_variance}"
            )
        if not self.noise_variance >= 0:
            raise InvalidArgumentError(
                f"noise_variance must be >= 0, got {self.noise_variance}"
            )


@dataclass(frozen=True)
class Dataset:
    """Observed inputs (n, D) in [-1, 1]^D and their noisy values (n,)."""

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if points.shape[0] != values.shape[0]:
            raise InvalidArgumentError(
                f"{points.shape[0]} points but {values.shape[0]} values"
            )
        if points.size and np.any(np.abs(points) > 1.0):
            raise InvalidArgumentError("dataset points must lie in [-1, 1]^D")
        points.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.values.shape[0]

    def append(self, x, u) -> "Dataset":
        x = np.asarray(x, dtype=float).reshape(1, -1)
        return Dataset(np.vstack([self.points, x]), np.append(self.values, float(u)))


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * a @ b.T
    )
    return np.maximum(d2, 0.0)


def kernel_matrix(config: KernelConfig, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross-covariance matrix k(a_i, b_j) for row-stacked inputs."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    if a.shape[1] != b.shape[1]:
        raise InvalidArgumentError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    d2 = _sq_dists(a, b)
    ell = config.lengthscale
    s = config.signal_variance
    if config.family is KernelFamily.SQUARED_EXPONENTIAL:
        return s * np.exp(-0.5 * d2 / ell**2)
    r = _SQRT5 * np.sqrt(d2) / ell
    return s * (1.0 + r + r * r / 3.0) * np.exp(-r)


def kernel_eval(config: KernelConfig, x, x2) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    x2 = np.asarray(x2, dtype=float).reshape(-1)
    if x.shape != x2.shape:
        raise InvalidArgumentError(f"dimension mismatch: {x.shape[0]} vs {x2.shape[0]}")
    diff = x - x2
    d2 = float(diff @ diff)
    ell = config.lengthscale
    s = config.signal_variance
    if config.family is KernelFamily.SQUARED_EXPONENTIAL:
        return s * math.exp(-0.5 * d2 / ell**2)
    r = _SQRT5 * math.sqrt(d2) / ell
    return s * (1.0 + r + r * r / 3.0) * math.exp(-r)


def _kernel_and_grad(config: KernelConfig, x: np.ndarray, X: np.ndarray):
    """k(x_i, X_j) of shape (m, n) and its gradient w.r.t. x_i, shape (m, n, D)."""
    diff = x[:, None, :] - X[None, :, :]
    d2 = np.sum(diff * diff, axis=2)
    ell = config.lengthscale
    s = config.signal_variance
    if config.family is KernelFamily.SQUARED_EXPONENTIAL:
        k = s * np.exp(-0.5 * d2 / ell**2)
        dk = -(k / ell**2)[:, :, None] * diff
        return k, dk
    r = _SQRT5 * np.sqrt(d2) / ell
    e = np.exp(-r)
    k = s * (1.0 + r + r * r / 3.0) * e
    # dk/dx = -s * 5/(3 l^2) * (1 + r) * exp(-r) * (x - X); smooth at r = 0
    coef = -s * 5.0 / (3.0 * ell**2) * (1.0 + r) * e
    return k, coef[:, :, None] * diff


# ---------------------------------------------------------------------------
# Exact GP
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GpModel:
    config: KernelConfig
    data: Dataset
    chol: np.ndarray
    alpha: np.ndarray
    y_offset: float = 0.0
    jitter: float = field(default=0.0)

    @property
    def dim(self) -> int:
        return self.data.dim


def _factorize(cov: np.ndarray, signal_variance: float) -> tuple[np.ndarray, float]:
    jitter = _JITTER_START * signal_variance
    eye = np.eye(cov.shape[0])
    while jitter <= _JITTER_MAX * signal_variance * (1 + 1e-9):
        try:
            return np.linalg.cholesky(cov + jitter * eye), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise FactorizationError(
        f"covariance not positive definite with jitter up to {_JITTER_MAX * signal_variance:g}"
    )


def fit(data: Dataset, config: KernelConfig) -> GpModel:
    """Factorize K + noise*I for the data and cache the weight vector."""
    if len(data) == 0:
        raise InvalidArgumentError("cannot fit a GP to an empty dataset")
    X = data.points
    offset = float(np.mean(data.values))
    y = data.values - offset
    cov = kernel_matrix(config, X, X)
    cov[np.diag_indices_from(cov)] += config.noise_variance
    L, jitter = _factorize(cov, config.signal_variance)
    alpha = cho_solve((L, True), y)
    return GpModel(config=config, data=data, chol=L, alpha=alpha, y_offset=offset, jitter=jitter)


def prior(config: KernelConfig, dim: int) -> GpModel:
    """A model with no observations; queries return the prior."""
    data = Dataset(np.empty((0, dim)), np.empty(0))
    return GpModel(config=config, data=data, chol=np.empty((0, 0)), alpha=np.empty(0))


def posterior_batch(model: GpModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and standard deviation at each row of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.dim:
        raise InvalidArgumentError(f"query dimension {X.shape[1]} != model dimension {model.dim}")
    if len(model.data) == 0:
        m = X.shape[0]
        return np.full(m, model.y_offset), np.full(m, math.sqrt(model.config.signal_variance))
    ks = kernel_matrix(model.config, model.data.points, X)
    mean = ks.T @ model.alpha + model.y_offset
    v = solve_triangular(model.chol, ks, lower=True, check_finite=False)
    var = model.config.signal_variance - np.sum(v * v, axis=0)
    return mean, np.sqrt(np.maximum(var, 0.0))


def posterior(model: GpModel, x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != model.dim:
        raise InvalidArgumentError(f"query dimension {x.shape[0]} != model dimension {model.dim}")
    mean, std = posterior_batch(model, x[None, :])
    return float(mean[0]), float(std[0])


def posterior_with_grad(model: GpModel, X: np.ndarray):
    """Mean, std and their gradients (m, D) at the rows of ``X``.

    The std gradient is set to zero where the std has collapsed to zero.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if len(model.data) == 0:
        mean, std = posterior_batch(model, X)
        zeros = np.zeros_like(X)
        return mean, std, zeros, zeros.copy()
    k, dk = _kernel_and_grad(model.config, X, model.data.points)
    mean = k @ model.alpha + model.y_offset
    dmean = np.einsum("mnd,n->md", dk, model.alpha)
    w = cho_solve((model.chol, True), k.T)  # (n, m)
    var = model.config.signal_variance - np.sum(k.T * w, axis=0)
    std = np.sqrt(np.maximum(var, 0.0))
    dvar = -2.0 * np.einsum("mnd,nm->md", dk, w)
    with np.errstate(divide="ignore", invalid="ignore"):
        dstd = np.where(std[:, None] > 1e-12, dvar / (2.0 * std[:, None]), 0.0)
    return mean, std, dmean, dstd


def log_marginal_likelihood(data: Dataset, config: KernelConfig) -> float:
    """Log evidence of the centred values under the zero-mean GP prior."""
    try:
        model = fit(data, config)
    except FactorizationError:
        return -math.inf
    y = data.values - model.y_offset
    n = len(data)
    return float(
        -0.5 * y @ model.alpha
        - np.sum(np.log(np.diag(model.chol)))
        - 0.5 * n * math.log(2.0 * math.pi)
    )


# ---------------------------------------------------------------------------
# Hyperparameters
# ---------------------------------------------------------------------------

_PARAMS = ("lengthscale", "signal_variance", "noise_variance")


def _to_config(base: KernelConfig, theta: np.ndarray) -> KernelConfig:
    return replace(base, **{name: float(math.exp(v)) for name, v in zip(_PARAMS, theta)})


def _clip_theta(theta: np.ndarray, log_scale: float) -> np.ndarray:
    shift = np.array([0.0, log_scale, log_scale])
    lo = np.array([_LOG_BOUNDS[p][0] for p in _PARAMS]) + shift
    hi = np.array([_LOG_BOUNDS[p][1] for p in _PARAMS]) + shift
    return np.clip(theta, lo, hi)


def fit_hyperparameters(
    data: Dataset,
    init: KernelConfig,
    budget: int,
    *,
    n_starts: int = 3,
    rng: np.random.Generator | None = None,
) -> KernelConfig:
    """Multi-start coordinate search over log (lengthscale, signal, noise).

    ``budget`` caps the number of likelihood evaluations.  The returned config
    never has a lower log marginal likelihood than ``init``.
    """
    if budget <= 0:
        return init
    if len(data) < 2:
        raise InvalidArgumentError("hyperparameter fitting needs at least 2 points")
    rng = np.random.default_rng(0) if rng is None else rng

    best_cfg = init
    best_ll = log_marginal_likelihood(data, init)
    used = 1

    var = float(np.var(data.values))
    log_scale = math.log(var) if var > 0 else 0.0
    theta0 = _clip_theta(
        np.log([init.lengthscale, init.signal_variance, max(init.noise_variance, 1e-300)]),
        log_scale,
    )
    starts = [theta0] + [
        _clip_theta(theta0 + rng.uniform(-1.5, 1.5, size=3), log_scale)
        for _ in range(n_starts - 1)
    ]
    per_start = max(1, (budget - 1) // len(starts))

    for theta in starts:
        if used >= budget:
            break
        allowance = min(per_start, budget - used)
        cur = theta.copy()
        cur_cfg = _to_config(init, cur)
        cur_ll = log_marginal_likelihood(data, cur_cfg)
        spent = 1
        step = 1.0
        while spent < allowance and step > 1e-3:
            improved = False
            for i in range(len(_PARAMS)):
                for sign in (1.0, -1.0):
                    if spent >= allowance:
                        break
                    cand = cur.copy()
                    cand[i] += sign * step
                    cand = _clip_theta(cand, log_scale)
                    if np.array_equal(cand, cur):
                        continue
                    cfg = _to_config(init, cand)
                    ll = log_marginal_likelihood(data, cfg)
                    spent += 1
                    if ll > cur_ll:
                        cur, cur_cfg, cur_ll = cand, cfg, ll
                        improved = True
                        break
            if not improved:
                step *= 0.5
        used += spent
        if cur_ll > best_ll:
            best_cfg, best_ll = cur_cfg, cur_ll
    return best_cfg
