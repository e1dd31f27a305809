"""Sampling-based global search driven by an inversion-free GP surrogate.

The surrogate predicts through a convex combination of the sample means,
so building and querying it involves no matrix factorization; its mean and
variance feed a sampling distribution that favors points likely to beat
the incumbent.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from ..exceptions import EnvelopeError
from ..gp.kernels import Kernel
from ..simcore.data import Dataset

MIN_ACCEPT_RATE = 1e-6
WEIGHT_SUM_TOL = 1e-10


class InverseDistanceWeights:
    """Normalized inverse-distance-power weights lambda_i(x) ~ ||x-x_i||^-p.

    Nonnegative, sum to one, and interpolate: at a data point all weight
    concentrates there (split equally across exact duplicates). Default
    power d+1 keeps the weights integrable-tail sharp in any dimension.
    """

    def __init__(self, points: np.ndarray, power: float | None = None):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.power = float(power) if power is not None else self.points.shape[1] + 1
        if self.power <= 0:
            raise ValueError("power must be positive")

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        d2 = np.sum(np.square(self.points - x), axis=1)
        hits = d2 == 0.0
        if hits.any():
            return hits / hits.sum()
        with np.errstate(over="ignore"):
            w = d2 ** (-0.5 * self.power)
        if np.isinf(w).any():
            # so close that the power underflows the distance: treat as hits
            hits = np.isinf(w)
            return hits / hits.sum()
        return w / w.sum()


def validate_weight_family(weights, points: np.ndarray, check_points) -> None:
    """Check nonnegativity, unit sum, and interpolation; raise on violation."""
    points = np.atleast_2d(points)
    for x in np.atleast_2d(check_points):
        lam = weights(x)
        if np.any(lam < 0):
            raise ValueError(f"weight family produced a negative weight at {x}")
        if abs(lam.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights at {x} sum to {lam.sum()}, not 1")
    for j, xj in enumerate(points):
        lam = weights(xj)
        expect = np.all(points == xj, axis=1)
        expect = expect / expect.sum()
        if not np.allclose(lam, expect, rtol=0, atol=WEIGHT_SUM_TOL):
            raise ValueError(
                f"weight family does not interpolate data point {j}"
            )


@dataclass
class GpsModel:
    """Weight-combination surrogate: mean lambda(x)'ybar and variance
    K(x,x) - 2 lambda(x)'k(x) + lambda(x)'(K+Sigma)lambda(x).

    All queries are direct products; nothing is inverted or factorized.
    """

    kernel: Kernel
    points: np.ndarray
    ybar: np.ndarray
    weights: object
    K_plus_sigma: np.ndarray

    @property
    def n(self) -> int:
        return self.ybar.size

    def mean_at(self, x) -> float:
        return float(self.weights(x) @ self.ybar)

    def var_at(self, x) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lam = self.weights(x)
        k = self.kernel.gram(x[None, :], self.points)[0]
        raw = (
            float(self.kernel(x, x))
            - 2.0 * float(lam @ k)
            + float(lam @ self.K_plus_sigma @ lam)
        )
        return max(raw, 0.0)

    def mean(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.mean_at(x) for x in X])

    def var(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.var_at(x) for x in X])


def gps_build_model(
    kernel: Kernel,
    data: Dataset,
    weight_family=None,
    noise_floor: float | None = None,
    validate: bool = True,
) -> GpsModel:
    """Assemble the inversion-free surrogate from aggregated observations."""
    X = data.points()
    ybar = data.means()
    sigma = data.noise_variances(floor=noise_floor)
    if weight_family is None:
        weight_family = InverseDistanceWeights(X)
    if validate:
        mids = 0.5 * (X[:-1] + X[1:]) if len(data) > 1 else X
        validate_weight_family(weight_family, X, mids)
    K = kernel.gram(X)
    return GpsModel(kernel, X, ybar, weight_family, K + np.diag(sigma))


def gps_density(model: GpsModel, c: float, grid) -> np.ndarray:
    """Normalized sampling weights h(x) ~ P(normal(mean, var) > c) on a grid.

    Zero-variance points degenerate to the indicator of beating c (one half
    exactly at c); if every tail probability underflows, the density falls
    back to uniform with a warning.
    """
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    c = float(c)
    mu = model.mean(grid)
    sd = np.sqrt(model.var(grid))
    p = np.empty(grid.shape[0])
    positive = sd > 0
    p[positive] = 0.5 * erfc((c - mu[positive]) / (sd[positive] * np.sqrt(2.0)))
    degenerate = ~positive
    p[degenerate] = np.where(
        mu[degenerate] > c, 1.0, np.where(mu[degenerate] < c, 0.0, 0.5)
    )
    total = p.sum()
    if total <= 0.0:
        warnings.warn(
            "all tail probabilities underflowed; sampling uniformly",
            RuntimeWarning,
            stacklevel=2,
        )
        return np.full(grid.shape[0], 1.0 / grid.shape[0])
    return p / total


def _sample_indices_ar(
    weights: np.ndarray, count: int, rng: np.random.Generator
) -> np.ndarray:
    top = weights.max()
    if top <= 0:
        raise ValueError("weights must contain a positive entry")
    # uniform proposal over indices: the exact acceptance rate is known
    rate = weights.mean() / top
    if rate < MIN_ACCEPT_RATE:
        raise EnvelopeError(
            f"acceptance rate {rate:.3g} below {MIN_ACCEPT_RATE}; the envelope "
            "is too loose for acceptance-rejection"
        )
    n = weights.size
    out = np.empty(count, dtype=int)
    filled = 0
    while filled < count:
        block = max(64, int((count - filled) / max(rate, 1e-12)))
        idx = rng.integers(n, size=block)
        u = rng.random(block)
        accepted = idx[u * top <= weights[idx]]
        take = min(accepted.size, count - filled)
        out[filled : filled + take] = accepted[:take]
        filled += take
    return out


def _sample_indices_mcmc(
    weights: np.ndarray,
    count: int,
    rng: np.random.Generator,
    proposal_width: int | None = None,
    burn_in: int = 1000,
) -> np.ndarray:
    if weights.max() <= 0:
        raise ValueError("weights must contain a positive entry")
    n = weights.size
    width = proposal_width if proposal_width is not None else max(1, n // 10)
    width = int(width)
    if width < 1:
        raise ValueError("proposal width must be at least 1")
    state = int(np.argmax(weights))
    out = np.empty(count, dtype=int)
    steps = burn_in + count
    # symmetric proposal: step of 1..width in either direction, wrapping
    offsets = rng.integers(1, width + 1, size=steps)
    signs = np.where(rng.random(steps) < 0.5, -1, 1)
    accept_u = rng.random(steps)
    for t in range(steps):
        prop = (state + signs[t] * offsets[t]) % n
        if accept_u[t] * weights[state] < weights[prop]:
            state = int(prop)
        if t >= burn_in:
            out[t - burn_in] = state
    return out


def gps_sample(
    grid,
    weights,
    sampler: str,
    count: int,
    rng: np.random.Generator,
    proposal_width: int | None = None,
    burn_in: int = 1000,
    smoothing_bandwidth: float | None = None,
    box=None,
) -> np.ndarray:
    """Draw points from the sampling distribution over a grid.

    acceptance_rejection produces exact draws under a max-weight envelope;
    mcmc runs a symmetric random walk on grid indices. An optional Gaussian
    smoothing perturbs the drawn grid points for continuous search spaces
    (off by default).
    """
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (grid.shape[0],):
        raise ValueError("need one weight per grid point")
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    count = int(count)
    if count < 1:
        raise ValueError("count must be positive")
    if sampler == "acceptance_rejection":
        idx = _sample_indices_ar(weights, count, rng)
    elif sampler == "mcmc":
        idx = _sample_indices_mcmc(
            weights, count, rng, proposal_width=proposal_width, burn_in=burn_in
        )
    else:
        raise ValueError(f"unknown sampler {sampler!r}")
    points = grid[idx].copy()
    if smoothing_bandwidth is not None:
        points += float(smoothing_bandwidth) * rng.standard_normal(points.shape)
        if box is not None:
            points = np.array([box.project(p) for p in points])
    return points
