"""Synthetic test functions rescaled to [-1, 1]^D.

Native functions are minimization problems; the :class:`Objective` wrappers
negate them so that every optimizer in this package maximizes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np

from .errors import InvalidArgumentError

LOG_DIST_FLOOR = 1e-12
CAMELBACK_MIN = -1.0316284534898774
CAMELBACK_ARGMIN = ((0.08984201368301331, -0.7126564032704135),
                    (-0.08984201368301331, 0.7126564032704135))


class Family(str, enum.Enum):
    ACKLEY = "ackley"
    LEVY = "levy"
    HYPER_ELLIPSOID = "hyper_ellipsoid"
    CAMELBACK_AUGMENTED = "camelback_augmented"


def ackley(x: np.ndarray, a: float = 20.0, b: float = 0.2, c: float = 2 * math.pi) -> float:
    x = np.asarray(x, dtype=float)
    n = x.size
    s1 = np.sum(x * x) / n
    s2 = np.sum(np.cos(c * x)) / n
    return float(-a * math.exp(-b * math.sqrt(s1)) - math.exp(s2) + a + math.e)


def levy(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    w = 1.0 + (x - 1.0) / 4.0
    head = math.sin(math.pi * w[0]) ** 2
    mid = np.sum((w[:-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(math.pi * w[:-1] + 1.0) ** 2))
    tail = (w[-1] - 1.0) ** 2 * (1.0 + math.sin(2.0 * math.pi * w[-1]) ** 2)
    return float(head + mid + tail)


def hyper_ellipsoid(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(np.arange(1, x.size + 1) * x * x))


def camelback(x: np.ndarray) -> float:
    """Six-hump camelback on its first two coordinates."""
    x1, x2 = float(x[0]), float(x[1])
    return (4.0 - 2.1 * x1**2 + x1**4 / 3.0) * x1**2 + x1 * x2 + (-4.0 + 4.0 * x2**2) * x2**2


@dataclass(frozen=True)
class BenchmarkSpec:
    family: Family
    dim: int

    def __post_init__(self):
        try:
            object.__setattr__(self, "family", Family(self.family))
        except ValueError:
            raise InvalidArgumentError(f"unsupported benchmark family {self.family!r}") from None
        if self.dim < 1:
            raise InvalidArgumentError("dim must be >= 1")
        if self.family is Family.CAMELBACK_AUGMENTED and self.dim < 2:
            raise InvalidArgumentError("camelback_augmented needs dim >= 2")

    @property
    def effective_dims(self) -> int | None:
        return 2 if self.family is Family.CAMELBACK_AUGMENTED else None


def native_bounds(spec: BenchmarkSpec) -> tuple[np.ndarray, np.ndarray]:
    D = spec.dim
    if spec.family is Family.ACKLEY:
        half = np.full(D, 32.768)
    elif spec.family is Family.LEVY:
        half = np.full(D, 10.0)
    elif spec.family is Family.HYPER_ELLIPSOID:
        half = np.full(D, 5.12)
    else:
        # auxiliary coordinates keep [-1, 1]
        half = np.ones(D)
        half[:2] = (3.0, 2.0)
    return -half, half


def _native_fn(family: Family) -> Callable[[np.ndarray], float]:
    return {
        Family.ACKLEY: ackley,
        Family.LEVY: levy,
        Family.HYPER_ELLIPSOID: hyper_ellipsoid,
        Family.CAMELBACK_AUGMENTED: camelback,
    }[family]


def _native_minimum(family: Family) -> float:
    return CAMELBACK_MIN if family is Family.CAMELBACK_AUGMENTED else 0.0


def to_native(spec: BenchmarkSpec, x) -> np.ndarray:
    lo, hi = native_bounds(spec)
    return lo + (np.asarray(x, dtype=float) + 1.0) * 0.5 * (hi - lo)


def _scaled_negated(spec: BenchmarkSpec, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dim,):
        raise InvalidArgumentError(f"expected a {spec.dim}-vector, got shape {x.shape}")
    return -_native_fn(spec.family)(to_native(spec, x))


@dataclass(frozen=True)
class Objective:
    """Black-box function on [-1, 1]^D, to be maximized.

    ``fn`` returns the noiseless value; ``noise_std`` is the standard deviation
    of the Gaussian noise the optimizers add when observing it.
    """

    dim: int
    fn: Callable[[np.ndarray], float]
    noise_std: float = 0.0
    known_optimum: float | None = None
    name: str = "objective"

    def __call__(self, x) -> float:
        return float(self.fn(np.asarray(x, dtype=float)))


def make_benchmark(spec: BenchmarkSpec, noise_std: float = 0.0) -> Objective:
    return Objective(
        dim=spec.dim,
        fn=partial(_scaled_negated, spec),
        noise_std=noise_std,
        known_optimum=-_native_minimum(spec.family) + 0.0,
        name=f"{spec.family.value}-{spec.dim}",
    )


def log_distance(best_true_value: float, known_optimum: float) -> float:
    """log10 of the gap to the optimum, floored at 1e-12."""
    return math.log10(max(known_optimum - best_true_value, LOG_DIST_FLOOR))
