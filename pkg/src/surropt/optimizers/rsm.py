"""Two-stage polynomial response-surface optimization.

Stage one fits a first-order model on a two-level factorial around the
incumbent and line-searches along its gradient until a lack-of-fit test
says the plane no longer explains the local response; stage two fits a
quadratic on a central composite design and returns its maximizing point
projected to the feasible box.
"""

from __future__ import annotations

import time

import numpy as np
from scipy.stats import f as f_dist

from ..simcore.data import Dataset
from ..simcore.models import SimulationModel, aggregate, run_replications
from .designs import central_composite, two_level_factorial
from .local_fit import fit_linear_model, fit_quadratic_model, residual_mean_square
from .trace import Budget, OptimizationTrace, TraceRecord
from .trs import maximize_quadratic_in_ball

GRADIENT_TOL = 1e-12


def _lack_of_fit_f(ms_resid: float, pure_var_of_mean: float, y_scale: float):
    """F ratio of model residual variance to replication variance; the
    degenerate zero-noise cases resolve to 0 or infinity by the sign of
    the residual."""
    if pure_var_of_mean > 0:
        return ms_resid / pure_var_of_mean
    return np.inf if ms_resid > 1e-14 * (1.0 + y_scale**2) else 0.0


class _Run:
    """Bookkeeping shared by the two stages."""

    def __init__(self, model, budget, rng, trace):
        self.model = model
        self.budget = budget
        self.rng = rng
        self.trace = trace
        self.iteration = 0

    def afford(self, reps: int) -> bool:
        return self.budget.can_afford(reps)

    def simulate(self, point, reps, incumbent, incumbent_est, criterion):
        t0 = time.perf_counter()
        self.budget.spend(reps)
        rs = run_replications(self.model, point, reps, self.rng)
        known = self.model.noise_var(rs.point)
        obs = aggregate(rs, known_noise_var=known)
        self.trace.append(
            TraceRecord(
                self.iteration, rs.point, reps, incumbent, incumbent_est,
                criterion, (time.perf_counter() - t0) * 1000.0,
            )
        )
        return rs, obs


def rsm_run(
    model: SimulationModel,
    start,
    step: float,
    budget,
    rng,
    half_widths=None,
    reps: int = 4,
    center_reps: int = 8,
    alpha: float = 0.05,
    max_line_steps: int = 20,
    max_stage1_rounds: int = 25,
) -> OptimizationTrace:
    """Run both stages to completion or budget exhaustion.

    step is the stage-one line-search stride; the local design half-width
    defaults to step/2. Budget exhaustion mid-stage returns the best point
    so far with the truncation flag set.
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    if not isinstance(budget, Budget):
        budget = Budget(budget)
    box = model.box
    d = box.dimension
    x = box.require(np.asarray(start, dtype=float))
    step = float(step)
    if step <= 0:
        raise ValueError("step must be positive")
    if center_reps < 2:
        raise ValueError("center_reps must be at least 2 for the adequacy test")
    h = np.broadcast_to(
        np.asarray(half_widths if half_widths is not None else 0.5 * step, float),
        (d,),
    ).copy()

    trace = OptimizationTrace(dimension=d)
    run = _Run(model, budget, rng, trace)
    center_est = None

    stage1_cost = (2**d) * reps + center_reps
    if not run.afford(stage1_cost):
        raise ValueError(
            f"stage-one design needs {stage1_cost} replications, budget has "
            f"{budget.remaining}"
        )

    def finish(point, estimate, truncated):
        trace.recommendation = np.asarray(point, dtype=float)
        trace.recommendation_estimate = (
            float(estimate) if estimate is not None else np.nan
        )
        trace.truncated = truncated
        return trace

    # stage one: planar fits plus gradient line search
    for _ in range(max_stage1_rounds):
        run.iteration += 1
        if not run.afford(stage1_cost):
            return finish(x, center_est, True)
        corners = [box.project(p) for p in two_level_factorial(x, h)]
        data = Dataset()
        est0 = center_est if center_est is not None else np.nan
        for p in corners:
            _, obs = run.simulate(p, reps, x, est0, np.nan)
            data.append(obs)
        center_rs, center_obs = run.simulate(x, center_reps, x, est0, np.nan)
        data.append(center_obs)
        center_est = center_obs.mean

        fit, _, grad = fit_linear_model(data)
        ms_resid, df_resid = residual_mean_square(fit, data)
        pure_var = float(center_rs.outputs.var(ddof=1)) / center_reps
        y_scale = float(np.max(np.abs(data.means())))
        f_stat = _lack_of_fit_f(ms_resid, pure_var, y_scale)
        if df_resid > 0 and np.isfinite(f_stat):
            critical = f_dist.ppf(1.0 - alpha, df_resid, center_reps - 1)
            inadequate = f_stat > critical
        else:
            inadequate = f_stat == np.inf

        gnorm = float(np.linalg.norm(grad))
        if gnorm <= GRADIENT_TOL * max(1.0, abs(center_est)):
            break
        if inadequate:
            break

        direction = grad / gnorm
        best_x, best_est = x, center_est
        moved = False
        for t in range(1, max_line_steps + 1):
            candidate = box.project(x + t * step * direction)
            if not run.afford(reps):
                return finish(best_x, best_est, True)
            run.iteration += 1
            _, obs = run.simulate(candidate, reps, best_x, best_est, np.nan)
            if obs.mean > best_est:
                best_x, best_est, moved = candidate, obs.mean, True
            else:
                break
        if not moved:
            break
        x, center_est = best_x, best_est

    # stage two: quadratic fit on a central composite design
    ccd = [box.project(p) for p in central_composite(x, h)]
    need = len(ccd) * reps
    if not run.afford(need):
        return finish(x, center_est, True)
    run.iteration += 1
    data = Dataset()
    for p in ccd:
        _, obs = run.simulate(p, reps, x, center_est, np.nan)
        data.append(obs)
    fit, beta0, lin, B = fit_quadratic_model(data)
    eigs = np.linalg.eigvalsh(B)
    if np.all(eigs < 0):
        stationary = np.linalg.solve(-2.0 * B, lin)
    else:
        grad_center = lin + 2.0 * B @ x
        s = maximize_quadratic_in_ball(grad_center, 2.0 * B, float(np.linalg.norm(h)))
        stationary = x + s
    final = box.project(stationary)
    final_est = float(beta0 + lin @ final + final @ B @ final)
    return finish(final, final_est, False)
