"""Promising-area search with shrinking-ball value estimates.

Each iteration samples candidates uniformly in a box around the incumbent,
re-estimates every visited point by averaging all historical samples
within a shrinking radius, interpolates those estimates with a noise-free
GP, and moves the incumbent to the surrogate maximum inside the area. The
area halves whenever the surrogate fails to find an improvement and the
run stops once it collapses below resolution.
"""

from __future__ import annotations

import time

import numpy as np

from ..gp.kernels import GaussianKernel
from ..gp.means import ConstantMean
from ..gp.posterior import GpPrior, posterior
from ..simcore.box import Box
from ..simcore.data import AggregatedObservation, Dataset
from ..simcore.models import SimulationModel, run_replications
from .sequential import argmax_lowest_index
from .trace import Budget, OptimizationTrace, TraceRecord


def shrinking_ball_estimates(
    visited: np.ndarray, history_x: np.ndarray, history_y: np.ndarray, radius: float
) -> np.ndarray:
    """Average every historical sample within radius of each visited point;
    a point's own samples sit at distance zero, so the average is never
    empty."""
    diffs = visited[:, None, :] - history_x[None, :, :]
    within = np.sqrt(np.sum(diffs * diffs, axis=2)) <= radius
    out = np.empty(visited.shape[0])
    for i in range(visited.shape[0]):
        out[i] = history_y[within[i]].mean()
    return out


def _interpolating_posterior(visited: np.ndarray, estimates: np.ndarray):
    """Noise-free GP through the ball estimates."""
    spread = float(np.std(estimates))
    if visited.shape[0] > 1:
        diffs = visited[:, None, :] - visited[None, :, :]
        dists = np.sqrt(np.sum(diffs * diffs, axis=2))
        eta = 0.5 * float(np.median(dists[dists > 0])) if (dists > 0).any() else 1.0
    else:
        eta = 1.0
    prior = GpPrior(
        ConstantMean(float(estimates.mean())),
        GaussianKernel(tau=max(spread, 1e-6), eta=max(eta, 1e-9)),
    )
    data = Dataset(
        [
            AggregatedObservation(x, float(v), 1, 0.0)
            for x, v in zip(visited, estimates)
        ]
    )
    return posterior(prior, data)


def spas_run(
    model: SimulationModel,
    box: Box,
    budget,
    rng,
    candidates_per_iter: int = 8,
    reps: int = 1,
    start=None,
    ball_gamma: float = 1.0 / 3.0,
    mpa_floor_rel: float = 1e-3,
    surrogate_grid_per_dim: int = 32,
) -> OptimizationTrace:
    """Run the search inside box until the budget or the area runs out."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    if not isinstance(budget, Budget):
        budget = Budget(budget)
    d = box.dimension
    incumbent = (
        box.require(np.asarray(start, dtype=float))
        if start is not None
        else 0.5 * (box.lower + box.upper)
    )
    half = 0.5 * box.widths.copy()
    floor = mpa_floor_rel * box.widths

    history_x: list[np.ndarray] = []
    history_y: list[float] = []
    visited: list[np.ndarray] = []
    seen: set[bytes] = set()

    trace = OptimizationTrace(dimension=d)
    incumbent_est = np.nan
    iter_cost = candidates_per_iter * reps
    k = 0
    while budget.can_afford(iter_cost):
        k += 1
        t0 = time.perf_counter()
        lo = np.maximum(box.lower, incumbent - half)
        hi = np.minimum(box.upper, incumbent + half)
        mpa = Box(lo, hi)
        candidates = np.vstack(
            [incumbent[None, :], mpa.sample(rng, candidates_per_iter - 1)]
        )
        for p in candidates:
            budget.spend(reps)
            rs = run_replications(model, p, reps, rng)
            for y in rs.outputs:
                history_x.append(rs.point)
                history_y.append(float(y))
            key = rs.point.tobytes()
            if key not in seen:
                seen.add(key)
                visited.append(rs.point)

        V = np.array(visited)
        HX = np.array(history_x)
        HY = np.array(history_y)
        radius = float(np.max(half)) * k ** (-ball_gamma)
        estimates = shrinking_ball_estimates(V, HX, HY, radius)
        post = _interpolating_posterior(V, estimates)

        in_mpa = np.array([mpa.contains(v) for v in V])
        pool = np.vstack(
            [
                candidates,
                mpa.latin_hypercube(rng, surrogate_grid_per_dim * d),
                V[in_mpa] if in_mpa.any() else np.empty((0, d)),
            ]
        )
        means = post.mean(pool)
        best = argmax_lowest_index(means)
        new_incumbent = pool[best]
        new_est = float(means[best])
        improved = np.isnan(incumbent_est) or new_est > incumbent_est

        elapsed = (time.perf_counter() - t0) * 1000.0
        for p in candidates:
            trace.append(
                TraceRecord(
                    k, p, reps, new_incumbent, new_est, radius,
                    elapsed / len(candidates),
                )
            )

        incumbent, incumbent_est = new_incumbent, new_est
        if not improved:
            half *= 0.5
            if np.all(half <= floor):
                trace.converged = True
                break

    trace.recommendation = incumbent
    trace.recommendation_estimate = float(incumbent_est)
    return trace
