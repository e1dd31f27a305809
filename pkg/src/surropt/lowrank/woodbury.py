"""Woodbury-identity solves and active-set selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import FactorizationError
from .guard import guard


def woodbury_solve(sigma_diag, U, C, V, b) -> np.ndarray:
    """Solve (U C V + diag(sigma)) z = b touching only m-by-m factorizations.

    Uses (UCV + S)^{-1} b = S^{-1}b - S^{-1}U (C^{-1} + V S^{-1} U)^{-1} V S^{-1} b.
    b may be a vector or a matrix of stacked right-hand sides.
    """
    sigma = np.asarray(sigma_diag, dtype=float)
    if np.any(sigma <= 0):
        raise ValueError("sigma entries must be positive")
    U = guard(np.asarray(U, dtype=float))
    V = guard(np.asarray(V, dtype=float))
    C = np.asarray(C, dtype=float)
    b = np.asarray(b, dtype=float)
    vec = b.ndim == 1
    B = b[:, None] if vec else b
    s_inv_b = B / sigma[:, None]
    if U.size == 0 or not U.any():
        return s_inv_b[:, 0] if vec else s_inv_b
    try:
        C_inv = np.linalg.inv(C)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"capacitance core C is singular: {exc}") from exc
    inner = C_inv + V @ guard(U / sigma[:, None])
    try:
        correction = np.linalg.solve(inner, V @ s_inv_b)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"inner matrix is singular: {exc}") from exc
    out = s_inv_b - (U / sigma[:, None]) @ correction
    return out[:, 0] if vec else out


@dataclass(frozen=True)
class ActiveSet:
    """Ordered index subset anchoring a low-rank approximation."""

    indices: np.ndarray
    n: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int).copy()
        if idx.ndim != 1 or idx.size == 0:
            raise ValueError("indices must form a nonempty 1-d array")
        if idx.size > self.n:
            raise ValueError("active set larger than the dataset")
        if np.unique(idx).size != idx.size:
            raise ValueError("indices must be distinct")
        if idx.min() < 0 or idx.max() >= self.n:
            raise ValueError(f"indices must lie in [0, {self.n})")
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    @property
    def m(self) -> int:
        return int(self.indices.size)

    def __len__(self):
        return self.m

    def __iter__(self):
        return iter(self.indices)


def select_active_set(n: int, m: int, rng) -> ActiveSet:
    """Uniform without-replacement sample of m of the n indices."""
    if not (1 <= m <= n):
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    return ActiveSet(rng.choice(n, size=m, replace=False), n)
