"""Six-step sequential optimization template for GP-guided search.

The template fixes a prior, runs an initial design, then loops: select a
batch by a criterion, simulate, update the belief; it finishes by
maximizing the belief mean over a candidate grid. Criteria plug in through
a small adapter interface so knowledge gradient, confidence bounds, and
density-based sampling share the surrounding machinery.
"""

from __future__ import annotations

import abc
import time

import numpy as np

from ..exceptions import BudgetError
from ..gp.posterior import GpPrior, posterior
from ..simcore.data import Dataset
from ..simcore.models import SimulationModel, observe
from .acquisition import (
    expected_max_affine,
    kg_score_saa_with_draws,
    ucb_schedule,
    ucb_score,
)
from .gps import gps_build_model, gps_density
from .trace import Budget, OptimizationTrace, TraceRecord

CANDIDATES_PER_DIM = 128


def candidate_grid(box, data_points: np.ndarray | None, rng, per_dim: int = CANDIDATES_PER_DIM):
    """Fresh space-filling candidates plus the visited points."""
    grid = box.latin_hypercube(rng, per_dim * box.dimension)
    if data_points is not None and len(data_points):
        grid = np.vstack([grid, data_points])
    return grid


def argmax_lowest_index(values: np.ndarray) -> int:
    """First index attaining the maximum; deterministic tie-breaking."""
    return int(np.argmax(values))


class SequentialCriterion(abc.ABC):
    """Belief construction plus batch selection for the template."""

    name = "criterion"

    @abc.abstractmethod
    def fit(self, prior: GpPrior, data: Dataset, noise_floor):
        """Build the belief object; must expose mean(X) -> array."""

    @abc.abstractmethod
    def select(self, belief, grid, batch, rng, noise_at, incumbent_estimate):
        """Pick batch indices into grid; returns (indices, scores)."""


def _top_indices(scores: np.ndarray, batch: int) -> np.ndarray:
    order = np.argsort(-scores, kind="stable")
    return order[:batch]


class KgDiscreteCriterion(SequentialCriterion):
    """Exact knowledge gradient over the design points plus the candidate."""

    name = "kg_discrete"

    def fit(self, prior, data, noise_floor):
        return posterior(prior, data, noise_floor=noise_floor)

    def select(self, belief, grid, batch, rng, noise_at, incumbent_estimate):
        # same quantities as kg_score_discrete, batched across the grid
        X = belief.points
        n = len(X)
        mu = np.empty(n + 1)
        delta = np.empty(n + 1)
        mu[:n] = belief.mean(X)
        mu_grid = belief.mean(grid)
        cross = belief.cov(X, grid)
        var_grid = belief.var(grid)
        scores = np.empty(len(grid))
        for j, x in enumerate(grid):
            denom = float(var_grid[j]) + float(noise_at(x))
            if denom <= 0:
                raise ZeroDivisionError(
                    "posterior variance plus noise at the candidate is not positive"
                )
            delta[:n] = cross[:, j]
            delta[n] = var_grid[j]
            delta /= np.sqrt(denom)
            if not delta.any():
                scores[j] = 0.0
                continue
            mu[n] = mu_grid[j]
            scores[j] = expected_max_affine(mu, delta) - float(mu.max())
        idx = _top_indices(scores, batch)
        return idx, scores[idx]


class KgSaaCriterion(SequentialCriterion):
    """Sample-average knowledge gradient over the shared candidate grid,
    with common innovations across candidates."""

    name = "kg_saa"

    def __init__(self, samples: int = 256):
        self.samples = int(samples)

    def fit(self, prior, data, noise_floor):
        return posterior(prior, data, noise_floor=noise_floor)

    def select(self, belief, grid, batch, rng, noise_at, incumbent_estimate):
        z = rng.standard_normal(self.samples)
        scores = np.array(
            [
                kg_score_saa_with_draws(belief, x, z, grid=grid, noise_var=noise_at(x))
                for x in grid
            ]
        )
        idx = _top_indices(scores, batch)
        return idx, scores[idx]


class UcbCriterion(SequentialCriterion):
    """Posterior mean plus a growing multiple of the posterior deviation."""

    name = "ucb"

    def __init__(self, a: float = 2.0):
        self.a = float(a)

    def fit(self, prior, data, noise_floor):
        return posterior(prior, data, noise_floor=noise_floor)

    def select(self, belief, grid, batch, rng, noise_at, incumbent_estimate):
        gamma = ucb_schedule(belief.n, a=self.a)
        scores = np.array([ucb_score(belief, x, gamma) for x in grid])
        idx = _top_indices(scores, batch)
        return idx, scores[idx]


class GpsCriterion(SequentialCriterion):
    """Samples the batch from the tail-probability density built on the
    inversion-free surrogate; selection never factorizes a matrix."""

    name = "gps"

    def __init__(self, sampler: str = "acceptance_rejection", power=None):
        self.sampler = sampler
        self.power = power

    def fit(self, prior, data, noise_floor):
        from .gps import InverseDistanceWeights

        family = None
        if self.power is not None:
            family = InverseDistanceWeights(data.points(), power=self.power)
        return gps_build_model(
            prior.cov, data, weight_family=family, noise_floor=noise_floor,
            validate=False,
        )

    def select(self, belief, grid, batch, rng, noise_at, incumbent_estimate):
        from .gps import _sample_indices_ar, _sample_indices_mcmc

        weights = gps_density(belief, incumbent_estimate, grid)
        if self.sampler == "acceptance_rejection":
            idx = _sample_indices_ar(weights, batch, rng)
        else:
            idx = _sample_indices_mcmc(weights, batch, rng)
        return idx, weights[idx]


def make_criterion(kind: str, **options) -> SequentialCriterion:
    table = {
        "kg_discrete": KgDiscreteCriterion,
        "kg_saa": KgSaaCriterion,
        "ucb": UcbCriterion,
        "gps": GpsCriterion,
    }
    if kind not in table:
        raise ValueError(f"unknown criterion {kind!r}; choose from {sorted(table)}")
    return table[kind](**options)


def _noise_lookup(model: SimulationModel, data: Dataset, reps_per_point: int):
    """Variance of the next aggregated observation at a candidate point."""

    def noise_at(x) -> float:
        known = model.noise_var(np.atleast_1d(np.asarray(x, float)))
        if known is not None:
            return float(known) / reps_per_point
        sig = data.noise_variances(floor=0.0)
        positive = sig[sig > 0]
        if positive.size:
            return float(np.median(positive))
        return 0.0

    return noise_at


def sequential_template(
    model: SimulationModel,
    prior: GpPrior,
    criterion: SequentialCriterion,
    batch: int,
    budget,
    rng,
    initial_points=None,
    reps_per_point: int = 1,
    noise_floor: float | None = None,
    candidates_per_dim: int = CANDIDATES_PER_DIM,
) -> OptimizationTrace:
    """Run the sequential loop to budget exhaustion.

    Steps: fix the prior, simulate an initial design, then repeatedly
    select a batch with the criterion over a refreshed candidate grid,
    simulate it, and refit; finally maximize the belief mean over a fresh
    grid and return that point as the recommendation. Each replication
    costs one unit of budget; identical seeds reproduce identical runs.
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    if not isinstance(budget, Budget):
        budget = Budget(budget)
    box = model.box
    d = box.dimension

    if initial_points is None:
        initial_points = max(2 * d + 2, 4)
    if isinstance(initial_points, (int, np.integer)):
        X0 = box.latin_hypercube(rng, int(initial_points))
    else:
        X0 = np.atleast_2d(np.asarray(initial_points, dtype=float))
    init_cost = X0.shape[0] * reps_per_point
    if not budget.can_afford(init_cost):
        raise BudgetError(
            f"initial design needs {init_cost} replications, budget has "
            f"{budget.remaining}"
        )

    trace = OptimizationTrace(dimension=d)
    data = Dataset()
    t0 = time.perf_counter()
    for x in X0:
        budget.spend(reps_per_point)
        data.append(observe(model, x, reps_per_point, rng))
    best0 = argmax_lowest_index(data.means())
    elapsed = (time.perf_counter() - t0) * 1000.0
    for obs in data:
        trace.append(
            TraceRecord(
                0, obs.point, obs.reps, data[best0].point,
                float(data.means()[best0]), np.nan, elapsed / len(data),
            )
        )

    noise_at = _noise_lookup(model, data, reps_per_point)
    belief = criterion.fit(prior, data, noise_floor)
    iteration = 0
    step_cost = batch * reps_per_point
    while budget.can_afford(step_cost):
        iteration += 1
        t0 = time.perf_counter()
        inc_idx = argmax_lowest_index(belief.mean(data.points()))
        incumbent = data.points()[inc_idx]
        incumbent_est = float(belief.mean(data.points())[inc_idx])
        grid = candidate_grid(box, data.points(), rng, per_dim=candidates_per_dim)
        idx, scores = criterion.select(
            belief, grid, batch, rng, noise_at, incumbent_est
        )
        elapsed = (time.perf_counter() - t0) * 1000.0
        for i, score in zip(idx, scores):
            budget.spend(reps_per_point)
            obs = observe(model, grid[i], reps_per_point, rng)
            data.append(obs)
            trace.append(
                TraceRecord(
                    iteration, obs.point, obs.reps, incumbent, incumbent_est,
                    float(score), elapsed / len(idx),
                )
            )
        belief = criterion.fit(prior, data, noise_floor)

    final_grid = candidate_grid(box, data.points(), rng, per_dim=candidates_per_dim)
    final_means = belief.mean(final_grid)
    best = argmax_lowest_index(final_means)
    trace.recommendation = final_grid[best]
    trace.recommendation_estimate = float(final_means[best])
    return trace
