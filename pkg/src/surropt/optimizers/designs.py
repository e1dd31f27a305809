"""Small experiment designs scaled to a local region around a center point."""

from __future__ import annotations

import itertools

import numpy as np


def two_level_factorial(
    center, half_widths, max_full_dimension: int = 10
) -> np.ndarray:
    """Corner points center +- half_widths in every sign combination.

    Above max_full_dimension the even-parity half fraction is used, which
    halves the run count while keeping main effects estimable.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    h = np.broadcast_to(np.asarray(half_widths, dtype=float), center.shape)
    d = center.size
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=d)))
    if d > max_full_dimension:
        signs = signs[np.prod(signs, axis=1) > 0]
    return center + signs * h


def central_composite(center, half_widths, axial: float = 1.0) -> np.ndarray:
    """Face-centered central composite design: factorial corners, axial
    points at +-axial*half_widths on each axis, and the center itself."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    h = np.broadcast_to(np.asarray(half_widths, dtype=float), center.shape)
    d = center.size
    corners = two_level_factorial(center, h)
    axial_pts = np.vstack(
        [center + s * axial * h * np.eye(d)[j] for j in range(d) for s in (-1.0, 1.0)]
    )
    return np.vstack([corners, axial_pts, center[None, :]])
