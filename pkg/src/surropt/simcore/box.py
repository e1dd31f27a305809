"""Axis-aligned box feasible regions."""

from __future__ import annotations

import numpy as np

from ..exceptions import FeasibilityError


class Box:
    """Feasible region of the form ``lower <= x <= upper`` componentwise.

    Bounds are finite and strictly ordered; the box is immutable after
    construction.
    """

    def __init__(self, lower, upper):
        lower = np.atleast_1d(np.asarray(lower, dtype=float)).copy()
        upper = np.atleast_1d(np.asarray(upper, dtype=float)).copy()
        if lower.ndim != 1 or upper.shape != lower.shape:
            raise ValueError("lower and upper must be 1-d arrays of equal length")
        if not (np.isfinite(lower).all() and np.isfinite(upper).all()):
            raise ValueError("box bounds must be finite")
        if not np.all(lower < upper):
            raise ValueError("need lower < upper in every coordinate")
        lower.flags.writeable = False
        upper.flags.writeable = False
        self._lower = lower
        self._upper = upper

    @property
    def lower(self) -> np.ndarray:
        return self._lower

    @property
    def upper(self) -> np.ndarray:
        return self._upper

    @property
    def dimension(self) -> int:
        return self._lower.size

    @property
    def widths(self) -> np.ndarray:
        return self._upper - self._lower

    def diagonal(self) -> float:
        """Euclidean length of the main diagonal."""
        return float(np.linalg.norm(self.widths))

    def contains(self, point, atol: float = 0.0) -> bool:
        x = np.asarray(point, dtype=float)
        if x.shape != self._lower.shape:
            return False
        return bool(
            np.all(x >= self._lower - atol) and np.all(x <= self._upper + atol)
        )

    def require(self, point) -> np.ndarray:
        """Return the point as an array, raising FeasibilityError if outside."""
        x = np.asarray(point, dtype=float)
        if x.shape != self._lower.shape:
            raise FeasibilityError(
                f"point has shape {x.shape}, box is {self.dimension}-dimensional"
            )
        if not self.contains(x):
            raise FeasibilityError(
                f"point {x} outside box [{self._lower}, {self._upper}]"
            )
        return x

    def project(self, point) -> np.ndarray:
        """Componentwise clip onto the box."""
        x = np.asarray(point, dtype=float)
        return np.clip(x, self._lower, self._upper)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n independent uniform draws, shape (n, d)."""
        u = rng.random((n, self.dimension))
        return self._lower + u * self.widths

    def latin_hypercube(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Latin hypercube sample of n points, shape (n, d).

        Each coordinate is stratified into n equal cells with one point per
        cell, cells shuffled independently per coordinate.
        """
        d = self.dimension
        u = (np.arange(n)[:, None] + rng.random((n, d))) / n
        for j in range(d):
            u[:, j] = u[rng.permutation(n), j]
        return self._lower + u * self.widths

    def grid(self, points_per_axis: int) -> np.ndarray:
        """Full-factorial grid, shape (points_per_axis**d, d). Small d only."""
        axes = [
            np.linspace(self._lower[j], self._upper[j], points_per_axis)
            for j in range(self.dimension)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def __repr__(self):
        return f"Box(lower={self._lower.tolist()}, upper={self._upper.tolist()})"

    def __eq__(self, other):
        if not isinstance(other, Box):
            return NotImplemented
        return np.array_equal(self._lower, other._lower) and np.array_equal(
            self._upper, other._upper
        )

    def __hash__(self):
        return hash((self._lower.tobytes(), self._upper.tobytes()))
