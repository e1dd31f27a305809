"""Budget/trace bookkeeping, local designs and fits, ball-constrained
quadratic steps, and the two trust-region style optimizers."""

import numpy as np
import pytest

from surropt.exceptions import BudgetError
from surropt.optimizers import (
    Budget,
    OptimizationTrace,
    TraceRecord,
    TrustRegionState,
    central_composite,
    default_delta_switch,
    fit_linear_model,
    fit_quadratic_model,
    maximize_quadratic_in_ball,
    residual_mean_square,
    rsm_run,
    step_cost,
    strong_run,
    strong_step,
    trust_region_update,
    two_level_factorial,
)
from surropt.simcore import (
    AggregatedObservation,
    Box,
    ConcaveQuadraticModel,
    Dataset,
)


def _quad_model(noise_sd=0.0):
    return ConcaveQuadraticModel(
        center=[0.4, -0.2],
        curvatures=[1.0, 2.0],
        box=Box([-2.0, -2.0], [2.0, 2.0]),
        peak=1.0,
        noise_sd=noise_sd,
    )


# -- budget ------------------------------------------------------------------


def test_budget_accounting():
    b = Budget(10)
    assert b.remaining == 10
    b.spend(3)
    assert b.consumed == 3 and b.remaining == 7
    assert b.can_afford(7) and not b.can_afford(8)
    b.spend(7)
    with pytest.raises(BudgetError):
        b.spend(1)
    assert b.consumed == 10


def test_budget_validation():
    with pytest.raises(ValueError):
        Budget(0)
    b = Budget(5)
    with pytest.raises(ValueError):
        b.spend(-1)


# -- trace -------------------------------------------------------------------


def _record(it, x, reps=2, inc=None, est=1.5, crit=0.25, ms=3.5):
    return TraceRecord(it, x, reps, inc if inc is not None else x, est, crit, ms)


def test_trace_append_validation():
    t = OptimizationTrace(dimension=2)
    t.append(_record(1, [0.0, 0.0]))
    with pytest.raises(ValueError):
        t.append(_record(1, [0.0]))
    with pytest.raises(ValueError):
        t.append(_record(0, [1.0, 1.0]))
    t.append(_record(1, [1.0, 1.0], reps=3))
    assert t.total_replications() == 5
    assert t.incumbents().shape == (2, 2)


def test_trace_dsv_round_trip():
    t = OptimizationTrace(dimension=2)
    t.append(_record(1, [0.25, -1.0], reps=4, inc=[0.0, 0.5], est=2.0, crit=0.1))
    t.append(_record(2, [1.0 / 3.0, 0.7], reps=2, inc=[1.0 / 3.0, 0.7], est=2.5,
                     crit=np.nan))
    text = t.to_dsv()
    assert text.splitlines()[0] == (
        "iter,x_1,x_2,reps,incumbent_1,incumbent_2,incumbent_est,"
        "criterion,elapsed_ms"
    )
    back = OptimizationTrace.from_dsv(text)
    assert back.dimension == 2
    assert len(back.records) == 2
    np.testing.assert_allclose(back.records[0].point, [0.25, -1.0])
    np.testing.assert_allclose(back.records[1].point, [1.0 / 3.0, 0.7])
    assert back.records[1].reps == 2
    assert np.isnan(back.records[1].criterion)
    np.testing.assert_allclose(back.recommendation, [1.0 / 3.0, 0.7])
    assert back.recommendation_estimate == 2.5
    # a second round trip is the identity on the text
    assert OptimizationTrace.from_dsv(text).to_dsv() == text


def test_trace_dsv_without_elapsed_column():
    t = OptimizationTrace(dimension=1)
    t.append(_record(1, [0.5]))
    text = t.to_dsv(include_elapsed=False)
    assert "elapsed_ms" not in text
    back = OptimizationTrace.from_dsv(text)
    assert back.records[0].elapsed_ms == 0.0
    np.testing.assert_allclose(back.records[0].point, [0.5])


def test_trace_save_load(tmp_path):
    t = OptimizationTrace(dimension=1)
    t.append(_record(1, [0.125]))
    path = tmp_path / "trace.csv"
    t.save(path)
    back = OptimizationTrace.load(path)
    np.testing.assert_allclose(back.records[0].point, [0.125])


# -- designs -----------------------------------------------------------------


def test_two_level_factorial_corners():
    pts = two_level_factorial([1.0, 2.0], [0.5, 0.25])
    assert pts.shape == (4, 2)
    want = {(0.5, 1.75), (0.5, 2.25), (1.5, 1.75), (1.5, 2.25)}
    assert {tuple(p) for p in pts} == want


def test_two_level_factorial_half_fraction():
    pts = two_level_factorial(np.zeros(3), 1.0, max_full_dimension=2)
    assert pts.shape == (4, 3)
    # even-parity half fraction: the product of signs is +1 on every row
    assert np.all(np.prod(np.sign(pts), axis=1) > 0)


def test_central_composite_layout():
    c = np.array([0.0, 1.0])
    pts = central_composite(c, [1.0, 2.0])
    assert pts.shape == (4 + 4 + 1, 2)
    np.testing.assert_array_equal(pts[-1], c)
    axial = pts[4:8]
    # one coordinate offset at a time, scaled by that axis half-width
    for row in axial:
        off = row - c
        assert np.sum(off != 0) == 1
    assert {tuple(r) for r in axial} == {
        (-1.0, 1.0), (1.0, 1.0), (0.0, -1.0), (0.0, 3.0)
    }


# -- local fits ----------------------------------------------------------------


def _exact_dataset(points, func):
    return Dataset(
        [AggregatedObservation(p, func(np.asarray(p)), 1, 0.0) for p in points]
    )


def test_fit_linear_model_recovers_plane():
    def plane(x):
        return 2.0 + 3.0 * x[0] - 1.5 * x[1]

    pts = two_level_factorial([0.0, 0.0], 1.0)
    data = _exact_dataset(np.vstack([pts, [[0.0, 0.0]]]), plane)
    fit, b0, grad = fit_linear_model(data)
    assert b0 == pytest.approx(2.0, abs=1e-10)
    np.testing.assert_allclose(grad, [3.0, -1.5], atol=1e-10)
    ms, df = residual_mean_square(fit, data)
    assert df == 2
    assert ms == pytest.approx(0.0, abs=1e-18)


def test_fit_quadratic_model_recovers_coefficients():
    B_true = np.array([[-1.0, 0.3], [0.3, -2.0]])
    lin_true = np.array([0.5, -0.25])

    def quad(x):
        return 1.5 + lin_true @ x + x @ B_true @ x

    data = _exact_dataset(central_composite([0.2, -0.1], 0.8), quad)
    fit, b0, lin, B = fit_quadratic_model(data)
    assert b0 == pytest.approx(1.5, abs=1e-9)
    np.testing.assert_allclose(lin, lin_true, atol=1e-9)
    np.testing.assert_allclose(B, B_true, atol=1e-9)
    np.testing.assert_array_equal(B, B.T)


def test_fit_survives_collapsed_design():
    # duplicated rows (as left by box projection) rank-deficient for OLS;
    # the ridge fallback still produces a usable plane
    pts = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    data = _exact_dataset(pts, lambda x: 1.0 + x[0] + 2.0 * x[1])
    fit, b0, grad = fit_linear_model(data)
    np.testing.assert_allclose(grad, [1.0, 2.0], atol=1e-3)


# -- ball-constrained quadratic steps ----------------------------------------------


def test_ball_step_interior_maximum():
    # strictly concave with the stationary point inside the ball
    H = np.array([[-2.0, 0.0], [0.0, -4.0]])
    g = np.array([0.4, 0.8])
    s = maximize_quadratic_in_ball(g, H, radius=5.0)
    np.testing.assert_allclose(s, -np.linalg.solve(H, g), atol=1e-10)


def test_ball_step_boundary_convex():
    # convex objective: the maximum sits on the boundary along the gradient
    H = np.array([[1.0, 0.0], [0.0, 2.0]])
    g = np.array([1.0, 0.0])
    s = maximize_quadratic_in_ball(g, H, radius=2.0)
    assert np.linalg.norm(s) == pytest.approx(2.0, rel=1e-10)


def test_ball_step_hard_case():
    # gradient orthogonal to the dominant curvature direction
    H = np.diag([4.0, 1.0])
    g = np.array([0.0, 0.5])
    r = 1.0
    s = maximize_quadratic_in_ball(g, H, radius=r)
    assert np.linalg.norm(s) == pytest.approx(r, rel=1e-8)
    val = g @ s + 0.5 * s @ H @ s
    # brute force over the circle
    theta = np.linspace(0, 2 * np.pi, 100001)
    C = r * np.vstack([np.cos(theta), np.sin(theta)]).T
    brute = np.max(C @ g + 0.5 * np.sum((C @ H) * C, axis=1))
    assert val >= brute - 1e-8


def test_ball_step_validation():
    with pytest.raises(ValueError):
        maximize_quadratic_in_ball([1.0], [[1.0]], radius=0.0)


def test_ball_step_beats_sampled_points():
    # randomized property: the exact step at least matches dense sampling
    rng = np.random.default_rng(12)
    for _ in range(20):
        d = rng.integers(1, 5)
        A = rng.standard_normal((d, d))
        H = 0.5 * (A + A.T)
        g = rng.standard_normal(d)
        r = float(rng.uniform(0.2, 3.0))
        s = maximize_quadratic_in_ball(g, H, r)
        assert np.linalg.norm(s) <= r * (1 + 1e-9)
        val = g @ s + 0.5 * s @ H @ s
        U = rng.standard_normal((4000, d))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        S = U * (r * rng.uniform(0, 1, (4000, 1)) ** (1.0 / d))
        S = np.vstack([S, U * r])
        brute = np.max(S @ g + 0.5 * np.sum((S @ H) * S, axis=1))
        assert val >= brute - 1e-7 * max(1.0, abs(brute))


# -- trust-region update rules ------------------------------------------------------


def test_trust_region_update_table():
    args = dict(eta0=0.25, eta1=0.75, gamma_shrink=0.5, gamma_expand=1.5)
    assert trust_region_update(2.0, False, **args) == (False, 0.5)
    assert trust_region_update(0.9, True, **args) == (True, 1.5)
    assert trust_region_update(0.75, True, **args) == (True, 1.5)
    assert trust_region_update(0.5, True, **args) == (True, 1.0)
    assert trust_region_update(0.25, True, **args) == (True, 1.0)
    assert trust_region_update(0.1, True, **args) == (False, 0.5)
    assert trust_region_update(-0.4, True, **args) == (False, 0.5)


def test_trust_region_state_validation_and_order():
    s = TrustRegionState(center=[0.0, 0.0], delta=1.0, delta_switch=0.5)
    assert s.order == 1
    assert TrustRegionState([0.0], 0.4, 0.5).order == 2
    assert TrustRegionState([0.0], 0.5, 0.5).order == 1
    with pytest.raises(ValueError):
        TrustRegionState([0.0], 0.0, 0.5)
    with pytest.raises(ValueError):
        TrustRegionState([0.0], 1.0, 0.5, gamma_shrink=1.0)
    with pytest.raises(ValueError):
        TrustRegionState([0.0], 1.0, 0.5, gamma_expand=1.0)
    with pytest.raises(ValueError):
        TrustRegionState([0.0], 1.0, 0.5, eta0=0.8, eta1=0.7)


def test_step_cost_matches_actual_consumption():
    model = _quad_model(noise_sd=0.1)
    for delta in (1.0, 0.2):
        state = TrustRegionState(center=[0.0, 0.0], delta=delta, delta_switch=0.5)
        want = step_cost(state, 2, design_reps=3, test_reps=5)
        budget = Budget(10_000)
        strong_step(model, state, budget, np.random.default_rng(0),
                    design_reps=3, test_reps=5)
        assert budget.consumed == want
    first = step_cost(TrustRegionState([0.0, 0.0], 1.0, 0.5), 2, 1, 1)
    second = step_cost(TrustRegionState([0.0, 0.0], 0.4, 0.5), 2, 1, 1)
    assert first == (4 + 1) + 2
    assert second == (4 + 4 + 1) + 2


def test_default_delta_switch_value():
    box = Box([-2.0, -2.0], [2.0, 2.0])
    want = 0.2 * box.diagonal() / np.sqrt(2)
    assert default_delta_switch(box) == pytest.approx(want)


# -- trust-region runs ---------------------------------------------------------------


def test_strong_run_noise_free_reaches_stationarity():
    model = _quad_model(noise_sd=0.0)
    trace = strong_run(model, [-1.5, 1.2], 200, np.random.default_rng(0),
                       design_reps=1, test_reps=1)
    g = model.true_gradient(trace.recommendation)
    assert np.linalg.norm(g) < 1e-2
    assert trace.total_replications() <= 200


def test_strong_run_budget_and_trace_consistency():
    model = _quad_model(noise_sd=0.1)
    budget = Budget(300)
    trace = strong_run(model, [1.0, 1.0], budget, np.random.default_rng(3))
    assert trace.total_replications() == budget.consumed
    assert budget.consumed <= 300
    its = [r.iteration for r in trace.records]
    assert its == sorted(its)
    assert model.box.contains(trace.recommendation)


def test_strong_run_escalates_replications_after_failures():
    # start exactly at the maximum: no iteration can significantly improve,
    # so the replication counts keep escalating to the cap
    model = _quad_model(noise_sd=0.5)
    trace = strong_run(
        model, [0.4, -0.2], 3000, np.random.default_rng(7),
        design_reps=2, test_reps=2, escalate=2.0,
        max_design_reps=8, max_test_reps=8,
    )
    reps_seen = sorted({r.reps for r in trace.records})
    assert reps_seen[0] == 2
    assert max(reps_seen) == 8
    # counts never exceed the caps
    assert all(r.reps <= 8 for r in trace.records)


def test_strong_run_seeded_reproducibility():
    model = _quad_model(noise_sd=0.2)
    t1 = strong_run(model, [1.0, -1.0], 400, 11)
    t2 = strong_run(model, [1.0, -1.0], 400, 11)
    assert t1.to_dsv(include_elapsed=False) == t2.to_dsv(include_elapsed=False)


def test_strong_run_validation():
    model = _quad_model()
    with pytest.raises(ValueError):
        strong_run(model, [0.0, 0.0], 100, 0, escalate=0.5)


# -- response-surface runs -------------------------------------------------------------


def test_rsm_run_noise_free_finds_center():
    model = _quad_model(noise_sd=0.0)
    trace = rsm_run(model, [-1.5, 1.2], step=0.25, budget=400,
                    rng=np.random.default_rng(5))
    assert not trace.truncated
    np.testing.assert_allclose(trace.recommendation, [0.4, -0.2], atol=1e-6)
    assert trace.recommendation_estimate == pytest.approx(1.0, abs=1e-6)
    assert trace.total_replications() <= 400


def test_rsm_run_noisy_improves_on_start():
    model = _quad_model(noise_sd=0.1)
    start = np.array([-1.5, 1.2])
    trace = rsm_run(model, start, step=0.4, budget=600, rng=2)
    assert model.true_value(trace.recommendation) > model.true_value(start)
    assert model.box.contains(trace.recommendation)


def test_rsm_run_truncates_when_budget_runs_out():
    model = _quad_model(noise_sd=0.0)
    # enough for stage one but never for the composite stage
    trace = rsm_run(model, [-1.5, 1.2], step=0.25, budget=26,
                    rng=np.random.default_rng(1), reps=4, center_reps=8)
    assert trace.truncated
    assert trace.total_replications() <= 26


def test_rsm_run_validation():
    model = _quad_model()
    with pytest.raises(ValueError):
        rsm_run(model, [0.0, 0.0], step=-1.0, budget=500, rng=0)
    with pytest.raises(ValueError):
        rsm_run(model, [0.0, 0.0], step=0.5, budget=500, rng=0, center_reps=1)
    with pytest.raises(ValueError):
        # below the stage-one design cost
        rsm_run(model, [0.0, 0.0], step=0.5, budget=10, rng=0)
