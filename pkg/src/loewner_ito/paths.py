"""Seeded ensembles of independent standard Brownian motions on uniform grids.

Every (path, dimension) pair draws from its own random stream, keyed by the
master seed, the path index, the dimension and the refinement level.  Paths
can therefore be generated in any order, or in parallel, and still come out
bit-identical.

Path values at the grid points are the canonical data.  Refinement inserts
Brownian-bridge midpoints and copies the existing values untouched, so the
coarse path is an exact subsample of the refined one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SizingError

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class TimeGrid:
    t_end: float
    n_steps: int

    def __post_init__(self):
        if not np.isfinite(self.t_end) or self.t_end <= 0:
            raise SizingError(f"t_end must be positive and finite, got {self.t_end}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise SizingError(f"n_steps must be a positive integer, got {self.n_steps}")
        object.__setattr__(self, "n_steps", int(self.n_steps))
        object.__setattr__(self, "t_end", float(self.t_end))

    @property
    def h(self) -> float:
        return self.t_end / self.n_steps

    def times(self) -> np.ndarray:
        """Grid points t_j = j*h, j = 0..n_steps."""
        return np.arange(self.n_steps + 1) * self.h

    def refined(self) -> "TimeGrid":
        return TimeGrid(self.t_end, 2 * self.n_steps)


def _stream(seed: int, path: int, dim: int, level: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & _SEED_MASK, spawn_key=(path, dim, level))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class BrownianPath:
    """One n-dimensional Brownian path.

    ``values`` has shape (n_dims, n_steps + 1), ``increments`` has shape
    (n_dims, n_steps).
    """

    grid: TimeGrid
    values: np.ndarray
    increments: np.ndarray

    @property
    def n_dims(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class BrownianEnsemble:
    """Immutable ensemble of ``n_paths`` Brownian paths in ``n_dims`` dimensions.

    Arrays are indexed (path, dim, step).  ``level`` counts how many dyadic
    refinements separate this ensemble from the one originally generated.
    """

    n_dims: int
    n_paths: int
    grid: TimeGrid
    seed: int
    values: np.ndarray = field(repr=False)
    increments: np.ndarray = field(repr=False)
    level: int = 0

    def __post_init__(self):
        for arr in (self.values, self.increments):
            arr.setflags(write=False)

    def path(self, index: int) -> BrownianPath:
        return BrownianPath(self.grid, self.values[index], self.increments[index])

    def __len__(self) -> int:
        return self.n_paths

    def __iter__(self):
        return (self.path(i) for i in range(self.n_paths))

    def to_bytes(self) -> bytes:
        """Increments as little-endian float64 in (path, dim, step) order."""
        return np.ascontiguousarray(self.increments, dtype="<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, n_dims: int, n_paths: int, grid: TimeGrid,
                   seed: int = 0) -> "BrownianEnsemble":
        """Replay an ensemble from a dump written by :meth:`to_bytes`."""
        expected = n_paths * n_dims * grid.n_steps * 8
        if len(data) != expected:
            raise SizingError(f"increment dump has {len(data)} bytes, expected {expected}")
        inc = np.frombuffer(data, dtype="<f8").astype(np.float64)
        inc = inc.reshape(n_paths, n_dims, grid.n_steps)
        return cls(n_dims, n_paths, grid, seed, _prefix_sum(inc), inc)


def _prefix_sum(increments: np.ndarray) -> np.ndarray:
    values = np.zeros(increments.shape[:-1] + (increments.shape[-1] + 1,))
    np.cumsum(increments, axis=-1, out=values[..., 1:])
    return values


def generate_ensemble(n_dims: int, grid: TimeGrid, n_paths: int, seed: int = 0) -> BrownianEnsemble:
    """Draw ``n_paths`` independent ``n_dims``-dimensional Brownian paths.

    Increment j of (path, dim) is Normal(0, h), taken from the stream keyed by
    (seed, path, dim).
    """
    if n_dims < 1 or n_paths < 1:
        raise SizingError(f"need n_dims >= 1 and n_paths >= 1, got {n_dims}, {n_paths}")
    if not isinstance(grid, TimeGrid) or grid.n_steps < 1:
        raise SizingError("grid must be a TimeGrid with at least one step")
    sd = np.sqrt(grid.h)
    inc = np.empty((n_paths, n_dims, grid.n_steps))
    for p in range(n_paths):
        for d in range(n_dims):
            inc[p, d] = sd * _stream(seed, p, d, 0).standard_normal(grid.n_steps)
    return BrownianEnsemble(n_dims, n_paths, grid, seed, _prefix_sum(inc), inc)


def refine(e: BrownianEnsemble) -> BrownianEnsemble:
    """Halve the step by inserting Brownian-bridge midpoints.

    The midpoint of [t, t+h] is (B_t + B_{t+h})/2 + sqrt(h)/2 * Z, which has
    the conditional variance h/4 of the bridge.  Existing values are copied
    exactly.
    """
    level = e.level + 1
    half_sd = 0.5 * np.sqrt(e.grid.h)
    n = e.grid.n_steps
    values = np.empty((e.n_paths, e.n_dims, 2 * n + 1))
    values[..., ::2] = e.values
    left, right = e.values[..., :-1], e.values[..., 1:]
    for p in range(e.n_paths):
        for d in range(e.n_dims):
            z = _stream(e.seed, p, d, level).standard_normal(n)
            values[p, d, 1::2] = 0.5 * (left[p, d] + right[p, d]) + half_sd * z
    return BrownianEnsemble(e.n_dims, e.n_paths, e.grid.refined(), e.seed,
                            values, np.diff(values, axis=-1), level)
