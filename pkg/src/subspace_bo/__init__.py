"""Bayesian optimization restricted to a growing pool of random axis-aligned subspaces."""

__version__ = "0.1.0"

from .acquisition import BetaSchedule, InnerOptBudget, argmax_over_pool, beta, ucb
from .benchmarks import BenchmarkSpec, Objective, log_distance, make_benchmark
from .gp import Dataset, GpModel, KernelConfig, fit, posterior
from .optimizers import (
    MsUcbConfig,
    RunRecord,
    run_gpucb,
    run_line_baseline,
    run_msucb,
    run_random_search,
)
from .subspace import SplitSpec, SubspacePool, embed, split

__all__ = [
    "BenchmarkSpec", "BetaSchedule", "Dataset", "GpModel", "InnerOptBudget",
    "KernelConfig", "MsUcbConfig", "Objective", "RunRecord", "SplitSpec",
    "SubspacePool", "argmax_over_pool", "beta", "embed", "fit", "log_distance",
    "make_benchmark", "posterior", "run_gpucb", "run_line_baseline", "run_msucb",
    "run_random_search", "split", "ucb",
]
