"""Shape guard threading through every low-rank construction path.

Tests arm the guard to prove the approximations never allocate a square
matrix at data scale; production leaves it disarmed at zero cost.
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np

_square_limit: int | None = None


def guard(a: np.ndarray) -> np.ndarray:
    """Assert the array is not square-at-scale when the guard is armed."""
    if (
        _square_limit is not None
        and a.ndim == 2
        and min(a.shape) >= _square_limit
    ):
        raise AssertionError(
            f"low-rank path allocated a {a.shape} matrix with the square "
            f"guard armed at {_square_limit}"
        )
    return a


@contextmanager
def forbid_square(limit: int):
    """Fail any guarded allocation with both dimensions >= limit."""
    global _square_limit
    prev = _square_limit
    _square_limit = int(limit)
    try:
        yield
    finally:
        _square_limit = prev
