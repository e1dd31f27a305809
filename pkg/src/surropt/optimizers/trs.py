"""Exact maximization of a quadratic over a Euclidean ball.

Solves max g's + s'Hs/2 subject to ||s|| <= radius via the
eigendecomposition of H and a secular-equation solve on the Lagrange
multiplier, including the hard case where the gradient is orthogonal to
the leading eigenspace. Intended for the small dimensions of local
polynomial models.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq


def maximize_quadratic_in_ball(g, H, radius: float) -> np.ndarray:
    """Return the step s maximizing g's + s'Hs/2 with ||s|| <= radius."""
    g = np.atleast_1d(np.asarray(g, dtype=float))
    H = np.atleast_2d(np.asarray(H, dtype=float))
    radius = float(radius)
    if radius <= 0:
        raise ValueError("radius must be positive")
    Hs = 0.5 * (H + H.T)
    # maximizing g's + s'Hs/2 is minimizing b's + s'As/2 with A=-H, b=-g
    lam, V = np.linalg.eigh(-Hs)
    c = V.T @ (-g)
    scale = max(1.0, float(np.max(np.abs(lam))), float(np.linalg.norm(c)))
    tol = 1e-12 * scale

    def coords(mu: float) -> np.ndarray:
        return -c / (lam + mu)

    if lam[0] > tol:
        s = coords(0.0)
        if np.linalg.norm(s) <= radius:
            return V @ s

    mu_lo = max(0.0, -float(lam[0]))
    edge = max(tol, 1e-12 * max(1.0, mu_lo))
    lo = mu_lo + edge
    if np.linalg.norm(coords(lo)) < radius:
        if mu_lo == 0.0:
            # positive semidefinite with an interior minimizer
            return V @ coords(lo)
        # hard case: the boundary is reached by padding along an
        # eigendirection of the smallest eigenvalue of A
        active = np.abs(lam + mu_lo) <= edge
        shat = np.where(active, 0.0, -c / np.where(active, 1.0, lam + mu_lo))
        pad = float(np.sqrt(max(radius**2 - float(shat @ shat), 0.0)))
        e = np.zeros_like(shat)
        e[int(np.argmax(active))] = pad
        s1, s2 = shat + e, shat - e
        q1 = c @ s1 + 0.5 * float(s1 @ (lam * s1))
        q2 = c @ s2 + 0.5 * float(s2 @ (lam * s2))
        return V @ (s1 if q1 <= q2 else s2)

    hi = mu_lo + max(1.0, float(np.linalg.norm(c)) / radius + abs(lam[0]))
    while np.linalg.norm(coords(hi)) > radius:
        hi = mu_lo + 2.0 * (hi - mu_lo)

    def gap(mu: float) -> float:
        return float(np.linalg.norm(coords(mu))) - radius

    mu = brentq(gap, lo, hi, xtol=1e-15, rtol=1e-14)
    return V @ coords(mu)
