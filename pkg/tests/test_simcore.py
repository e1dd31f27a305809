"""Feasible regions, observation containers, models, and queue dynamics."""

import numpy as np
import pytest

from surropt.exceptions import CapabilityError, FeasibilityError, StabilityError
from surropt.simcore import (
    AggregatedObservation,
    Box,
    CallableModel,
    ConcaveQuadraticModel,
    Dataset,
    ReplicationSet,
    RippleModel,
    TandemQueueModel,
    aggregate,
    erlang_c,
    mean_length_of_stay,
    observe,
    run_replications,
    simulate_mmc_sojourn,
    simulate_tandem_sojourn,
)
from surropt.simcore import testbed_catalog as catalog_of_models


# -- Box ---------------------------------------------------------------------


def test_box_basic_geometry():
    box = Box([-1.0, 0.0], [1.0, 4.0])
    assert box.dimension == 2
    np.testing.assert_array_equal(box.widths, [2.0, 4.0])
    assert box.diagonal() == pytest.approx(np.sqrt(4 + 16))
    assert box.contains([0.0, 2.0])
    assert not box.contains([0.0, 4.5])
    assert not box.contains([0.0])  # wrong dimension


def test_box_rejects_bad_bounds():
    with pytest.raises(ValueError):
        Box([0.0, 0.0], [1.0])
    with pytest.raises(ValueError):
        Box([0.0], [0.0])
    with pytest.raises(ValueError):
        Box([0.0], [np.inf])


def test_box_require_and_project():
    box = Box([0.0], [1.0])
    np.testing.assert_array_equal(box.require([0.5]), [0.5])
    with pytest.raises(FeasibilityError):
        box.require([1.5])
    np.testing.assert_array_equal(box.project([1.5]), [1.0])
    np.testing.assert_array_equal(box.project([-2.0]), [0.0])


def test_box_sampling_stays_inside():
    rng = np.random.default_rng(0)
    box = Box([-3.0, 2.0], [-1.0, 5.0])
    for X in (box.sample(rng, 200), box.latin_hypercube(rng, 200)):
        assert X.shape == (200, 2)
        assert all(box.contains(x) for x in X)


def test_latin_hypercube_stratification():
    # exactly one point per axis-aligned cell of width 1/n
    rng = np.random.default_rng(1)
    box = Box([0.0, 0.0], [1.0, 1.0])
    n = 16
    X = box.latin_hypercube(rng, n)
    for j in range(2):
        cells = np.floor(X[:, j] * n).astype(int)
        assert sorted(cells) == list(range(n))


def test_box_grid_shape_and_corners():
    box = Box([0.0, -1.0], [1.0, 1.0])
    G = box.grid(3)
    assert G.shape == (9, 2)
    assert any(np.array_equal(g, [0.0, -1.0]) for g in G)
    assert any(np.array_equal(g, [1.0, 1.0]) for g in G)


def test_box_equality_and_hash():
    a = Box([0.0], [1.0])
    b = Box([0.0], [1.0])
    assert a == b and hash(a) == hash(b)
    assert a != Box([0.0], [2.0])


# -- observation containers ---------------------------------------------------


def test_replication_set_validation():
    rs = ReplicationSet([1.0, 2.0], [0.5, 0.7, 0.6])
    assert rs.reps == 3
    with pytest.raises(ValueError):
        ReplicationSet([1.0], [])
    with pytest.raises(ValueError):
        ReplicationSet([1.0, 2.0], [0.5, 0.7], gradients=[[1.0, 2.0]])


def test_replication_set_immutable():
    rs = ReplicationSet([1.0], [0.5])
    with pytest.raises(ValueError):
        rs.outputs[0] = 9.0


def test_aggregated_observation_validation():
    obs = AggregatedObservation([0.0], 1.5, 4, 0.25)
    assert obs.dimension == 1
    with pytest.raises(ValueError):
        AggregatedObservation([0.0], 1.5, 0)
    with pytest.raises(ValueError):
        AggregatedObservation([0.0], 1.5, 1, -0.1)
    with pytest.raises(ValueError):
        AggregatedObservation([0.0], 1.5, 1, grad_mean=[1.0, 2.0])


def test_dataset_append_and_accessors():
    data = Dataset()
    data.append(AggregatedObservation([0.0, 1.0], 2.0, 3, 0.1))
    data.append(AggregatedObservation([1.0, 0.0], -1.0, 1, 0.2))
    assert len(data) == 2 and data.dimension == 2
    np.testing.assert_array_equal(data.points(), [[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_array_equal(data.means(), [2.0, -1.0])
    np.testing.assert_array_equal(data.reps(), [3, 1])
    with pytest.raises(ValueError):
        data.append(AggregatedObservation([1.0], 0.0, 1))


def test_dataset_noise_vector_floor_semantics():
    data = Dataset([
        AggregatedObservation([0.0], 1.0, 2, 0.5),
        AggregatedObservation([1.0], 2.0, 1, None),
    ])
    assert data.has_unknown_noise()
    np.testing.assert_array_equal(data.noise_variances(floor=0.01), [0.5, 0.01])
    with pytest.raises(ValueError):
        data.noise_variances()


def test_dataset_dsv_round_trip_with_gradients():
    rng = np.random.default_rng(5)
    obs = [
        AggregatedObservation(
            rng.standard_normal(3),
            rng.standard_normal(),
            int(rng.integers(1, 5)),
            float(rng.random()),
            rng.standard_normal(3),
        )
        for _ in range(6)
    ]
    data = Dataset(obs)
    back = Dataset.from_dsv(data.to_dsv())
    np.testing.assert_array_equal(back.points(), data.points())
    np.testing.assert_array_equal(back.means(), data.means())
    np.testing.assert_array_equal(back.grad_means(), data.grad_means())
    np.testing.assert_array_equal(back.noise_variances(), data.noise_variances())


def test_dataset_dsv_unknown_noise_round_trip():
    data = Dataset([AggregatedObservation([0.5], 1.0, 1, None)])
    back = Dataset.from_dsv(data.to_dsv())
    assert back[0].noise_var is None


# -- models and replication plumbing ------------------------------------------


def _toy_model(noise_sd=0.0):
    return CallableModel(
        lambda x, rng: float(x[0] ** 2 + noise_sd * rng.standard_normal()),
        Box([-1.0], [1.0]),
        noise_var=noise_sd**2,
        true_func=lambda x: float(x[0] ** 2),
    )


def test_run_replications_reproducible_across_rng_kinds():
    model = _toy_model(noise_sd=1.0)
    a = run_replications(model, [0.5], 8, 42)
    b = run_replications(model, [0.5], 8, np.random.SeedSequence(42))
    c = run_replications(model, [0.5], 8, 42)
    np.testing.assert_array_equal(a.outputs, c.outputs)
    np.testing.assert_array_equal(a.outputs, b.outputs)


def test_run_replications_prefix_property():
    # spawned streams make the first r outputs independent of total reps
    model = _toy_model(noise_sd=1.0)
    a = run_replications(model, [0.5], 4, 7)
    b = run_replications(model, [0.5], 8, 7)
    np.testing.assert_array_equal(a.outputs, b.outputs[:4])


def test_run_replications_enforces_feasibility_and_capability():
    model = _toy_model()
    with pytest.raises(FeasibilityError):
        run_replications(model, [2.0], 1, 0)
    with pytest.raises(CapabilityError):
        run_replications(model, [0.5], 1, 0, with_gradients=True)
    with pytest.raises(ValueError):
        run_replications(model, [0.5], 0, 0)


def test_aggregate_noise_semantics():
    rs = ReplicationSet([0.0], [1.0, 3.0])
    obs = aggregate(rs)
    assert obs.mean == 2.0
    # sample var 2.0 over 2 reps
    assert obs.noise_var == pytest.approx(1.0)
    assert aggregate(ReplicationSet([0.0], [1.0])).noise_var is None
    assert aggregate(ReplicationSet([0.0], [1.0]), 4.0).noise_var == pytest.approx(4.0)


def test_observe_uses_known_noise():
    model = _toy_model(noise_sd=2.0)
    obs = observe(model, [0.5], 4, 3)
    assert obs.noise_var == pytest.approx(4.0 / 4)
    obs2 = observe(model, [0.5], 4, 3, use_known_noise=False)
    assert obs2.noise_var != obs.noise_var


# -- benchmark models ----------------------------------------------------------


def test_quadratic_model_ground_truth():
    model = ConcaveQuadraticModel(
        center=[0.4, -0.2], curvatures=[1.0, 2.0],
        box=Box([-1.0, -1.0], [1.0, 1.0]), peak=1.0, noise_sd=0.0,
    )
    np.testing.assert_array_equal(model.known_argmax, [0.4, -0.2])
    assert model.true_value([0.4, -0.2]) == pytest.approx(model.known_max)
    np.testing.assert_allclose(model.true_gradient([0.4, -0.2]), 0.0)
    # hand value: 1 - 1*(0.6)^2 - 2*(0.3)^2 at x = [1, 0.1]
    assert model.true_value([1.0, 0.1]) == pytest.approx(1 - 0.36 - 0.18)
    rng = np.random.default_rng(0)
    assert model.evaluate([1.0, 0.1], rng) == model.true_value([1.0, 0.1])


def test_quadratic_gradient_matches_finite_differences():
    model = ConcaveQuadraticModel(
        center=[0.1, -0.5], curvatures=[2.0, 0.7],
        box=Box([-1.0, -1.0], [1.0, 1.0]), noise_sd=0.0,
    )
    rng = np.random.default_rng(2)
    for _ in range(5):
        x = rng.uniform(-1, 1, 2)
        g = model.true_gradient(x)
        h = 1e-6
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            fd = (model.true_value(x + e) - model.true_value(x - e)) / (2 * h)
            assert g[j] == pytest.approx(fd, abs=1e-5)


def test_quadratic_joint_noise_covariance():
    cov = np.array([[0.25, 0.05, 0.0], [0.05, 0.09, 0.01], [0.0, 0.01, 0.04]])
    model = ConcaveQuadraticModel(
        center=[0.0, 0.0], curvatures=[1.0, 1.0],
        box=Box([-1.0, -1.0], [1.0, 1.0]), noise_cov=cov,
    )
    np.testing.assert_allclose(model.noise_covariance(), cov, atol=1e-9)
    # noise on both the output and the gradient, correlated per draw
    draws = []
    rng = np.random.default_rng(11)
    for _ in range(4000):
        y, g = model.evaluate_with_gradient([0.3, 0.3], rng)
        draws.append([y - model.true_value([0.3, 0.3]),
                      *(g - model.true_gradient([0.3, 0.3]))])
    sample_cov = np.cov(np.array(draws).T)
    np.testing.assert_allclose(sample_cov, cov, atol=0.03)


def test_ripple_model_global_structure():
    model = RippleModel(center=[0.31], box=Box([-1.0], [1.0]),
                        amp=1.0, freq=2.0, curv=0.8, noise_sd=0.0)
    assert model.true_value([0.31]) == pytest.approx(model.known_max)
    np.testing.assert_allclose(model.true_gradient([0.31]), 0.0, atol=1e-12)
    # neighboring crest one period away sits strictly below the global peak
    crest = 0.31 + 1.0 / 2.0
    assert model.true_value([crest]) < model.known_max - 0.1
    # grid maximum agrees with the stated argmax
    xs = np.linspace(-1, 1, 20001)[:, None]
    vals = np.array([model.true_value(x) for x in xs])
    assert abs(xs[np.argmax(vals)][0] - 0.31) < 1e-3


def test_testbed_catalog_names_and_truth():
    cat = catalog_of_models()
    assert set(cat) == {
        "quadratic-2d", "quadratic-5d", "ripple-1d", "ripple-2d", "tandem-queue",
    }
    for name, model in cat.items():
        assert model.name == name
        if model.known_argmax is not None:
            assert model.box.contains(model.known_argmax)
            assert model.true_value(model.known_argmax) == pytest.approx(
                model.known_max
            )


# -- queueing ------------------------------------------------------------------


def test_erlang_c_single_server_closed_form():
    # c=1: waiting probability equals the load
    for rho in (0.1, 0.5, 0.9):
        assert erlang_c(rho, 1) == pytest.approx(rho)


def test_erlang_c_two_server_closed_form():
    # c=2: C = 2 rho^2 / (1 + rho) with rho = a/2
    for a in (0.4, 1.0, 1.8):
        rho = a / 2
        expected = 2 * rho**2 / (1 + rho)
        assert erlang_c(a, 2) == pytest.approx(expected)


def test_erlang_c_stability_guard():
    with pytest.raises(StabilityError):
        erlang_c(1.0, 1)
    with pytest.raises(StabilityError):
        mean_length_of_stay(2.0, 1.0, 2)


def test_mm1_sojourn_closed_form():
    # M/M/1: W = 1 / (mu - lam)
    assert mean_length_of_stay(0.5, 1.0, 1) == pytest.approx(2.0)
    assert mean_length_of_stay(1.0, 3.0, 1) == pytest.approx(0.5)


def test_mmc_simulation_matches_formula():
    rng = np.random.default_rng(123)
    sim = simulate_mmc_sojourn(0.8, 1.0, 2, n_arrivals=60000, rng=rng, warmup=5000)
    assert sim == pytest.approx(mean_length_of_stay(0.8, 1.0, 2), rel=0.05)


def test_tandem_simulation_matches_product_form():
    # unbounded buffers: stations decouple, so mean sojourn is the sum of
    # per-station M/M/1 sojourns
    rng = np.random.default_rng(7)
    lam, rates = 0.5, [1.2, 1.5]
    sim = simulate_tandem_sojourn(lam, rates, [1, 1], n_arrivals=60000,
                                  rng=rng, warmup=5000)
    expected = sum(mean_length_of_stay(lam, mu, 1) for mu in rates)
    assert sim == pytest.approx(expected, rel=0.05)


def test_tandem_blocking_increases_sojourn():
    lam, rates = 0.5, [1.2, 1.5]
    free = simulate_tandem_sojourn(lam, rates, [1, 1], n_arrivals=20000,
                                   rng=np.random.default_rng(9), warmup=2000)
    tight = simulate_tandem_sojourn(lam, rates, [1, 1], capacity=[None, 1],
                                    n_arrivals=20000,
                                    rng=np.random.default_rng(9), warmup=2000)
    assert tight > free


def test_tandem_queue_model_contract():
    model = TandemQueueModel()
    assert model.dimension == 2
    assert model.known_argmax is None
    assert model.has_stylized
    # stylized form equals the product-form value
    x = np.array([1.2, 1.5])
    want = -sum(mean_length_of_stay(0.5, mu, 1) for mu in x)
    assert model.stylized(x) == pytest.approx(want)
    # reproducibility under a fixed seed
    a = model.evaluate(x, np.random.default_rng(3))
    b = model.evaluate(x, np.random.default_rng(3))
    assert a == b and a < 0


def test_tandem_queue_model_rejects_unstable_bounds():
    with pytest.raises(ValueError):
        TandemQueueModel(arrival_rate=1.0, rate_bounds=(0.9, 3.0))
