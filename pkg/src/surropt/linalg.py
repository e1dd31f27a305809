"""Shared dense linear algebra helpers.

Symmetric positive-definite systems are factorized by Cholesky with an
escalating diagonal jitter: starting at ``1e-10 * trace(A)/n``, doubled at
most ``MAX_JITTER_DOUBLINGS`` times before giving up.  All factorizations go
through :func:`cholesky_factor` so callers can assert that a code path is
factorization-free via :func:`factorization_count`.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .exceptions import FactorizationError

MAX_JITTER_DOUBLINGS = 10

_factorization_count = 0


def factorization_count() -> int:
    """Number of Cholesky factorizations performed so far in this process."""
    return _factorization_count


class CholeskyFactor:
    """Lower-triangular Cholesky factor of ``A + jitter*I``."""

    def __init__(self, lower: np.ndarray, jitter: float):
        self.lower = lower
        self.jitter = jitter

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solve ``A x = b``."""
        return cho_solve((self.lower, True), b)

    def solve_lower(self, b: np.ndarray) -> np.ndarray:
        """Solve ``L x = b`` with the lower factor alone."""
        return solve_triangular(self.lower, b, lower=True)

    def log_det(self) -> float:
        """``log det A`` from the factor diagonal."""
        return 2.0 * float(np.sum(np.log(np.diag(self.lower))))


def cholesky_factor(a: np.ndarray) -> CholeskyFactor:
    """Factor a symmetric PSD matrix, escalating jitter on failure.

    Raises
    ------
    FactorizationError
        If the factorization still fails after the jitter ceiling.
    """
    global _factorization_count
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    _factorization_count += 1
    base = 1e-10 * max(np.trace(a) / max(n, 1), np.finfo(float).tiny)
    jitter = 0.0
    for attempt in range(MAX_JITTER_DOUBLINGS + 1):
        try:
            c, low = cho_factor(a + jitter * np.eye(n), lower=True)
            return CholeskyFactor(np.tril(c), jitter)
        except np.linalg.LinAlgError:
            jitter = base if jitter == 0.0 else 2.0 * jitter
    raise FactorizationError(
        f"Cholesky failed after {MAX_JITTER_DOUBLINGS} jitter doublings "
        f"(final jitter {jitter:.3e})"
    )


def solve_psd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``A x = b`` for symmetric PSD ``A`` under the jitter policy."""
    return cholesky_factor(a).solve(np.asarray(b, dtype=float))
