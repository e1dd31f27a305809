"""Acquisition scores for sequential design-point selection.

The knowledge-gradient scores quantify the expected gain in the estimated
maximum from one more simulation; the upper-confidence-bound score trades
posterior mean against posterior uncertainty.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr

from ..gp.posterior import PosteriorBase

SQRT_2PI = float(np.sqrt(2.0 * np.pi))


def _phi(z: np.ndarray | float) -> np.ndarray | float:
    return np.exp(-0.5 * np.square(z)) / SQRT_2PI


def expected_max_affine(intercepts, slopes) -> float:
    """E[max_i (a_i + b_i Z)] for standard normal Z, in closed form.

    Sorts the lines by slope, removes the ones that never attain the upper
    envelope, and sums Gaussian partial moments between consecutive
    breakpoints of the envelope.
    """
    a = np.atleast_1d(np.asarray(intercepts, dtype=float))
    b = np.atleast_1d(np.asarray(slopes, dtype=float))
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise ValueError("need matching nonempty 1-d intercepts and slopes")
    order = np.lexsort((a, b))
    a, b = a[order], b[order]
    if b.size > 1:
        # among equal slopes only the largest intercept can win
        keep = np.flatnonzero(np.diff(b) > 0)
        keep = np.append(keep, b.size - 1)
        a, b = a[keep], b[keep]

    # plain-float stack sweep; called in tight loops, so avoid array scalars
    al, bl = a.tolist(), b.tolist()
    lines: list[int] = []
    lefts: list[float] = []
    neg_inf = float("-inf")
    for j in range(len(bl)):
        aj, bj = al[j], bl[j]
        z = neg_inf
        while lines:
            i = lines[-1]
            z = (al[i] - aj) / (bj - bl[i])
            if z <= lefts[-1]:
                lines.pop()
                lefts.pop()
            else:
                break
        if not lines:
            z = neg_inf
        lines.append(j)
        lefts.append(z)

    idx = np.array(lines)
    zs = np.array(lefts[1:])
    cdf, pdf = ndtr(zs), _phi(zs)
    cdf_lo = np.concatenate(([0.0], cdf))
    cdf_hi = np.concatenate((cdf, [1.0]))
    pdf_lo = np.concatenate(([0.0], pdf))
    pdf_hi = np.concatenate((pdf, [0.0]))
    return float(a[idx] @ (cdf_hi - cdf_lo) + b[idx] @ (pdf_lo - pdf_hi))


def _cross_covariances(post: PosteriorBase, X: np.ndarray, v: np.ndarray):
    """Posterior covariances between each row of X and the point v."""
    if hasattr(post, "cov"):
        return post.cov(X, v[None, :])[:, 0]
    return np.array([post.cov_at(x, v) for x in X])


def _lookahead_slopes(post, X: np.ndarray, v: np.ndarray, noise_var: float):
    """delta_n(x_i, v) = K_n(x_i, v) / sqrt(K_n(v, v) + noise_var).

    The candidate's own variance enters both the numerator's last entry
    (X ends with v) and the denominator; the clamped value is used for
    both so roundoff can't produce a negative square root.
    """
    cross = _cross_covariances(post, X, v)
    var_v = float(post.var_at(v))
    cross[-1] = var_v
    denom = var_v + float(noise_var)
    if denom <= 0:
        raise ZeroDivisionError(
            "posterior variance plus noise at the candidate is not positive"
        )
    return cross / np.sqrt(denom)


def kg_score_discrete(post, x, noise_var: float) -> float:
    """Knowledge gradient restricted to the design points plus the candidate.

    The one-step-ahead mean at each point is affine in the standard normal
    innovation, so the expectation of the max is computed exactly;
    noise_var is the variance of the prospective observation at x.
    """
    v = np.atleast_1d(np.asarray(x, dtype=float))
    X_all = np.vstack([post.points, v])
    mu = post.mean(X_all)
    delta = _lookahead_slopes(post, X_all, v, noise_var)
    if np.all(delta == 0.0):
        return 0.0
    return expected_max_affine(mu, delta) - float(mu.max())


def kg_score_saa(
    post,
    x,
    samples: int,
    rng: np.random.Generator,
    grid=None,
    noise_var: float = 0.0,
    chunk: int = 100_000,
) -> float:
    """Sample-average approximation of the knowledge gradient.

    Draws standard normal innovations and averages the resulting gain in
    the maximum of the one-step-ahead mean over the candidate grid (the
    design points by default); deterministic given the generator state.
    """
    samples = int(samples)
    if samples < 1:
        raise ValueError("samples must be at least 1")
    z = rng.standard_normal(samples)
    return kg_score_saa_with_draws(post, x, z, grid=grid, noise_var=noise_var,
                                   chunk=chunk)


def kg_score_saa_with_draws(
    post, x, z: np.ndarray, grid=None, noise_var: float = 0.0,
    chunk: int = 100_000,
) -> float:
    """SAA score with caller-supplied innovations, enabling common random
    numbers across candidates."""
    v = np.atleast_1d(np.asarray(x, dtype=float))
    base = post.points if grid is None else np.atleast_2d(np.asarray(grid, float))
    X_all = np.vstack([base, v])
    mu = post.mean(X_all)
    delta = _lookahead_slopes(post, X_all, v, noise_var)
    current = float(mu.max())
    z = np.asarray(z, dtype=float)
    total = 0.0
    for start in range(0, z.size, chunk):
        zc = z[start : start + chunk]
        total += np.max(mu[:, None] + np.outer(delta, zc), axis=0).sum()
    return total / z.size - current


def ucb_score(post: PosteriorBase, x, gamma: float) -> float:
    """mu_n(x) + sqrt(gamma * K_n(x, x)), with the variance clamped at 0."""
    gamma = float(gamma)
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    var = max(float(post.cov_at(x, x)), 0.0)
    return float(post.mean_at(x)) + float(np.sqrt(gamma * var))


def ucb_schedule(n: int, a: float = 2.0) -> float:
    """Default confidence-width schedule gamma_n = a ln(n + 1)."""
    return float(a) * float(np.log(n + 1))
