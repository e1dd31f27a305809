"""Trust-region polynomial search with statistical move acceptance.

Each iteration fits a first- or second-order model in the trust region
(chosen by comparing the radius against a switch threshold), maximizes it
over the ball, and accepts the candidate only if fresh simulations show a
statistically significant improvement; the observed-to-predicted
improvement ratio then drives the move/stay and expand/keep/shrink update.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import t as t_dist

from ..simcore.data import Dataset
from ..simcore.models import SimulationModel, aggregate, run_replications
from .designs import central_composite, two_level_factorial
from .local_fit import fit_linear_model, fit_quadratic_model
from .trace import Budget, OptimizationTrace, TraceRecord
from .trs import maximize_quadratic_in_ball

PREDICTED_TOL = 1e-14


@dataclass(frozen=True)
class TrustRegionState:
    """Center, radius, and the constants steering the radius updates."""

    center: np.ndarray
    delta: float
    delta_switch: float
    gamma_shrink: float = 0.5
    gamma_expand: float = 1.5
    eta0: float = 0.25
    eta1: float = 0.75
    alpha: float = 0.05
    k: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, "center", np.atleast_1d(np.asarray(self.center, dtype=float))
        )
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if not 0 < self.gamma_shrink < 1:
            raise ValueError("gamma_shrink must lie in (0, 1)")
        if self.gamma_expand <= 1:
            raise ValueError("gamma_expand must exceed 1")
        if not 0 < self.eta0 < self.eta1 < 1:
            raise ValueError("need 0 < eta0 < eta1 < 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")

    @property
    def order(self) -> int:
        return 1 if self.delta >= self.delta_switch else 2


def trust_region_update(
    rho: float,
    passed_reduction_test: bool,
    eta0: float,
    eta1: float,
    gamma_shrink: float,
    gamma_expand: float,
) -> tuple[bool, float]:
    """(move?, radius factor) from the ratio test; a failed reduction test
    always stays and shrinks, otherwise the three-way comparison applies."""
    if not passed_reduction_test:
        return False, gamma_shrink
    if rho >= eta1:
        return True, gamma_expand
    if rho >= eta0:
        return True, 1.0
    return False, gamma_shrink


def default_delta_switch(box) -> float:
    """Radius below which the local model upgrades to second order."""
    return 0.2 * box.diagonal() / np.sqrt(box.dimension)


def _reduction_test(out_new: np.ndarray, out_old: np.ndarray, alpha: float) -> bool:
    """One-sided two-sample test that the candidate beats the incumbent."""
    m1, m0 = float(out_new.mean()), float(out_old.mean())
    v1 = float(out_new.var(ddof=1)) if out_new.size > 1 else 0.0
    v0 = float(out_old.var(ddof=1)) if out_old.size > 1 else 0.0
    se2 = v1 / out_new.size + v0 / out_old.size
    if se2 <= 0:
        return m1 > m0
    t_stat = (m1 - m0) / np.sqrt(se2)
    df = se2**2 / (
        (v1 / out_new.size) ** 2 / max(out_new.size - 1, 1)
        + (v0 / out_old.size) ** 2 / max(out_old.size - 1, 1)
    )
    return t_stat > t_dist.ppf(1.0 - alpha, df)


def step_cost(state: TrustRegionState, dimension: int, design_reps: int,
              test_reps: int) -> int:
    n_design = 2**dimension + 1 if state.order == 1 else 2**dimension + 2 * dimension + 1
    return n_design * design_reps + 2 * test_reps


def strong_step(
    model: SimulationModel,
    state: TrustRegionState,
    budget: Budget,
    rng,
    design_reps: int = 2,
    test_reps: int = 4,
) -> tuple[TrustRegionState, list[TraceRecord], float]:
    """One full iteration; returns the new state, its run records, and the
    center estimate from the test stage."""
    box = model.box
    d = box.dimension
    x = state.center
    t0 = time.perf_counter()
    records: list[TraceRecord] = []

    half = state.delta / np.sqrt(d)
    if state.order == 1:
        design = np.vstack([two_level_factorial(x, half), x[None, :]])
    else:
        design = central_composite(x, half)
    design = np.array([box.project(p) for p in design])

    data = Dataset()
    for p in design:
        budget.spend(design_reps)
        rs = run_replications(model, p, design_reps, rng)
        data.append(aggregate(rs, known_noise_var=model.noise_var(rs.point)))

    if state.order == 1:
        fit, _, grad = fit_linear_model(data)
        gnorm = float(np.linalg.norm(grad))
        step = state.delta * grad / gnorm if gnorm > 0 else np.zeros(d)
    else:
        fit, beta0, lin, B = fit_quadratic_model(data)
        step = maximize_quadratic_in_ball(lin + 2.0 * B @ x, 2.0 * B, state.delta)
    candidate = box.project(x + step)
    predicted = float(fit.predict_one(candidate) - fit.predict_one(x))

    def record(point, reps, inc, est, crit):
        records.append(
            TraceRecord(
                state.k + 1, point, reps, inc, est,
                crit, (time.perf_counter() - t0) * 1000.0,
            )
        )

    if predicted <= PREDICTED_TOL * max(1.0, abs(float(fit.predict_one(x)))):
        # nothing to gain according to the model: failed iteration
        new_state = replace(
            state, delta=state.delta * state.gamma_shrink, k=state.k + 1
        )
        est = float(fit.predict_one(x))
        for p in design:
            record(p, design_reps, x, est, np.nan)
        return new_state, records, est

    budget.spend(2 * test_reps)
    out_new = run_replications(model, candidate, test_reps, rng).outputs
    out_old = run_replications(model, x, test_reps, rng).outputs
    passed = _reduction_test(out_new, out_old, state.alpha)
    rho = (float(out_new.mean()) - float(out_old.mean())) / predicted
    move, factor = trust_region_update(
        rho, passed, state.eta0, state.eta1, state.gamma_shrink, state.gamma_expand
    )
    new_center = candidate if move else x
    center_est = float(out_new.mean()) if move else float(out_old.mean())
    new_state = replace(
        state, center=new_center, delta=state.delta * factor, k=state.k + 1
    )
    for p in design:
        record(p, design_reps, new_center, center_est, np.nan)
    record(candidate, test_reps, new_center, center_est, rho)
    record(x, test_reps, new_center, center_est, rho)
    return new_state, records, center_est


def strong_run(
    model: SimulationModel,
    start,
    budget,
    rng,
    delta0: float | None = None,
    delta_switch: float | None = None,
    design_reps: int = 2,
    test_reps: int = 4,
    min_delta: float = 1e-9,
    gamma_shrink: float = 0.5,
    gamma_expand: float = 1.5,
    eta0: float = 0.25,
    eta1: float = 0.75,
    alpha: float = 0.05,
    escalate: float = 2.0,
    max_design_reps: int = 32,
    max_test_reps: int = 256,
) -> OptimizationTrace:
    """Iterate trust-region steps until the budget or the radius runs out.

    After a failed iteration the replication counts are multiplied by
    `escalate` (capped), so the acceptance test gains the power it needs
    once true improvements shrink toward the noise level; a successful
    move resets them to the base values.
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    if not isinstance(budget, Budget):
        budget = Budget(budget)
    if escalate < 1.0:
        raise ValueError("escalate must be at least 1")
    box = model.box
    x0 = box.require(np.asarray(start, dtype=float))
    switch = delta_switch if delta_switch is not None else default_delta_switch(box)
    state = TrustRegionState(
        center=x0,
        delta=delta0 if delta0 is not None else 2.0 * switch,
        delta_switch=switch,
        gamma_shrink=gamma_shrink,
        gamma_expand=gamma_expand,
        eta0=eta0,
        eta1=eta1,
        alpha=alpha,
    )
    trace = OptimizationTrace(dimension=box.dimension)
    estimate = np.nan
    cur_design, cur_test = float(design_reps), float(test_reps)
    while state.delta >= min_delta:
        rd, rt = int(round(cur_design)), int(round(cur_test))
        if not budget.can_afford(step_cost(state, box.dimension, rd, rt)):
            break
        prev_center = state.center
        state, records, estimate = strong_step(
            model, state, budget, rng, design_reps=rd, test_reps=rt
        )
        for r in records:
            trace.append(r)
        if np.array_equal(state.center, prev_center):
            cur_design = min(cur_design * escalate, float(max_design_reps))
            cur_test = min(cur_test * escalate, float(max_test_reps))
        else:
            cur_design, cur_test = float(design_reps), float(test_reps)
    trace.converged = state.delta < min_delta
    trace.recommendation = state.center
    trace.recommendation_estimate = float(estimate)
    return trace
