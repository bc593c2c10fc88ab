"""Axis-aligned embedding subspaces and the growing pool of anchors.

A point x in [-1, 1]^D is split into an anchor part z (the first D - d
coordinates) and a free part y (the last d coordinates).  Fixing z and letting
y range over [-1, 1]^d gives one d-dimensional subspace of the box.  The
selector matrices of that construction are never materialised; splitting and
embedding are plain slices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, InvalidConfigError, InvalidStateError


@dataclass(frozen=True)
class SplitSpec:
    big_dim: int
    low_dim: int
    # optional coordinate permutation applied before slicing; None keeps the
    # natural "last d coordinates are free" layout
    permutation: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.big_dim < 2:
            raise InvalidConfigError(f"big_dim must be >= 2, got {self.big_dim}")
        if not 0 <= self.low_dim < self.big_dim:
            raise InvalidConfigError(
                f"low_dim must satisfy 0 <= d < D, got d={self.low_dim}, D={self.big_dim}"
            )
        if self.permutation is not None:
            perm = tuple(int(i) for i in self.permutation)
            if sorted(perm) != list(range(self.big_dim)):
                raise InvalidConfigError("permutation must be a permutation of range(D)")
            object.__setattr__(self, "permutation", perm)

    @property
    def anchor_dim(self) -> int:
        return self.big_dim - self.low_dim


def _check_box(arr: np.ndarray, name: str) -> None:
    if arr.size and (not np.all(np.isfinite(arr)) or np.any(np.abs(arr) > 1.0)):
        raise InvalidArgumentError(f"{name} coordinates must lie in [-1, 1]")


def split(spec: SplitSpec, x) -> tuple[np.ndarray, np.ndarray]:
    """Return (y, z): y the last d coordinates of x, z the first D - d."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.big_dim:
        raise InvalidArgumentError(f"expected dimension {spec.big_dim}, got {x.shape[-1]}")
    if spec.permutation is not None:
        x = x[..., list(spec.permutation)]
    k = spec.anchor_dim
    return x[..., k:].copy(), x[..., :k].copy()


def embed(spec: SplitSpec, y, z) -> np.ndarray:
    """Inverse of :func:`split`; broadcasts over leading axes of y and z."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if y.shape[-1] != spec.low_dim or z.shape[-1] != spec.anchor_dim:
        raise InvalidArgumentError(
            f"expected y of dim {spec.low_dim} and z of dim {spec.anchor_dim}, "
            f"got {y.shape[-1]} and {z.shape[-1]}"
        )
    _check_box(y, "y")
    _check_box(z, "z")
    lead = np.broadcast_shapes(y.shape[:-1], z.shape[:-1])
    x = np.concatenate(
        [
            np.broadcast_to(z, lead + (spec.anchor_dim,)),
            np.broadcast_to(y, lead + (spec.low_dim,)),
        ],
        axis=-1,
    )
    if spec.permutation is not None:
        inv = np.argsort(spec.permutation)
        x = x[..., inv]
    return x


@dataclass(frozen=True)
class Anchor:
    z: np.ndarray
    birth_iter: int


def subspaces_at(n0: int, alpha: int, t: int) -> int:
    """Number of anchors sampled at iteration t: N0 * t**alpha."""
    return n0 * t**alpha


def pool_size(n0: int, alpha: int, t: int) -> int:
    """Exact |Z_t| = sum_{k<=t} N0 k^alpha."""
    return sum(n0 * k**alpha for k in range(1, t + 1))


def pool_size_bound(n0: int, alpha: int, t: int) -> float:
    """Closed-form upper bound N0 (t+1)^(alpha+1) / (alpha+1) on |Z_t|."""
    return n0 * (t + 1) ** (alpha + 1) / (alpha + 1)


class SubspacePool:
    """Growing set of anchors.  Anchors are never evicted.

    Storage is a single (n, D - d) array so that very large pools stay cheap
    to enumerate.  ``max_anchors`` guards memory: exceeding it raises rather
    than dropping anchors.
    """

    def __init__(
        self,
        spec: SplitSpec,
        n0: int = 1,
        alpha: int = 0,
        rng: np.random.Generator | int | None = None,
        max_anchors: int = 5_000_000,
    ):
        if int(n0) != n0 or n0 < 1:
            raise InvalidConfigError(f"n0 must be an integer >= 1, got {n0}")
        if int(alpha) != alpha or alpha < 0:
            raise InvalidConfigError(f"alpha must be an integer >= 0, got {alpha}")
        self.spec = spec
        self.n0 = int(n0)
        self.alpha = int(alpha)
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.max_anchors = max_anchors
        self.t = 0
        self._n = 0
        self._z = np.empty((16, spec.anchor_dim))
        self._birth = np.empty(16, dtype=int)

    def __len__(self) -> int:
        return self._n

    @property
    def z(self) -> np.ndarray:
        """Read-only (n, D - d) view of all anchors in sampling order."""
        view = self._z[: self._n]
        view.setflags(write=False)
        return view

    @property
    def anchors(self) -> list[Anchor]:
        return [Anchor(z.copy(), int(b)) for z, b in zip(self.z, self._birth[: self._n])]

    def grow(self, t: int) -> int:
        """Append N0 t^alpha fresh anchors for iteration t; return how many."""
        if t != self.t + 1:
            raise InvalidStateError(f"pool grown through {self.t}; cannot grow at t={t}")
        n_new = subspaces_at(self.n0, self.alpha, t)
        if len(self) + n_new > self.max_anchors:
            raise InvalidStateError(
                f"pool would hold {len(self) + n_new} anchors, above cap {self.max_anchors}"
            )
        new = self.rng.uniform(-1.0, 1.0, size=(n_new, self.spec.anchor_dim))
        end = self._n + n_new
        if end > self._z.shape[0]:
            cap = max(end, 2 * self._z.shape[0])
            z = np.empty((cap, self.spec.anchor_dim))
            z[: self._n] = self._z[: self._n]
            birth = np.empty(cap, dtype=int)
            birth[: self._n] = self._birth[: self._n]
            self._z, self._birth = z, birth
        self._z[self._n:end] = new
        self._birth[self._n:end] = t
        self._n = end
        self.t = t
        return n_new

    def replace(self, t: int) -> None:
        """Discard all anchors and draw a fresh N_t batch (line-search baseline)."""
        self._n = 0
        self.t = t - 1
        self.grow(t)


def grow_pool(pool: SubspacePool, t: int) -> SubspacePool:
    pool.grow(t)
    return pool
