import math

import numpy as np
import pytest

from subspace_bo import gp


def dense_posterior(model: gp.GpModel, x: np.ndarray) -> tuple[float, float]:
    """Posterior via an explicit inverse of K + (noise + jitter) I."""
    X = model.data.points
    y = model.data.values - model.y_offset
    K = gp.kernel_matrix(model.config, X, X)
    K = K + (model.config.noise_variance + model.jitter) * np.eye(len(X))
    Kinv = np.linalg.inv(K)
    k = np.array([gp.kernel_eval(model.config, xi, x) for xi in X])
    mean = k @ Kinv @ y + model.y_offset
    var = gp.kernel_eval(model.config, x, x) - k @ Kinv @ k
    return float(mean), math.sqrt(max(var, 0.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
