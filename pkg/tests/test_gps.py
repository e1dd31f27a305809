"""Inversion-free weight-combination surrogate: weights, model identities,
sampling densities, and the two index samplers."""

import warnings

import numpy as np
import pytest

from surropt.exceptions import EnvelopeError
from surropt.gp import GaussianKernel
from surropt.linalg import factorization_count
from surropt.optimizers import (
    GpsModel,
    InverseDistanceWeights,
    gps_build_model,
    gps_density,
    gps_sample,
    validate_weight_family,
)
from surropt.simcore import AggregatedObservation, Box, Dataset


def _data(rng, n=8, noise=0.04):
    X = rng.uniform(-1, 1, (n, 2))
    y = np.sin(2.0 * X[:, 0]) + 0.5 * X[:, 1]
    return Dataset([AggregatedObservation(X[i], y[i], 1, noise) for i in range(n)])


# -- weights ------------------------------------------------------------------


def test_inverse_distance_weights_basics():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    w = InverseDistanceWeights(pts)
    assert w.power == 3.0
    lam = w([0.3, 0.4])
    assert lam.shape == (3,)
    assert np.all(lam >= 0)
    assert lam.sum() == pytest.approx(1.0, abs=1e-12)
    # closer points get more of the weight
    assert lam[0] > lam[1] and lam[0] > lam[2]


def test_inverse_distance_weights_interpolate():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    w = InverseDistanceWeights(pts)
    np.testing.assert_array_equal(w([1.0, 0.0]), [0.0, 1.0, 0.0])
    # exact duplicates split the unit weight equally
    w2 = InverseDistanceWeights(np.array([[0.5, 0.5], [0.5, 0.5], [1.0, 1.0]]))
    np.testing.assert_allclose(w2([0.5, 0.5]), [0.5, 0.5, 0.0])


def test_inverse_distance_weights_near_hit_underflow():
    # so close that the inverse power overflows: treated as an exact hit
    pts = np.array([[0.0], [1.0]])
    w = InverseDistanceWeights(pts, power=400.0)
    lam = w([1e-8])
    assert lam.sum() == pytest.approx(1.0)
    assert np.all(np.isfinite(lam))
    with pytest.raises(ValueError):
        InverseDistanceWeights(pts, power=0.0)


def test_validate_weight_family_accepts_and_rejects():
    pts = np.array([[0.0, 0.0], [1.0, 1.0]])
    validate_weight_family(InverseDistanceWeights(pts), pts, [[0.5, 0.5]])

    def bad_sum(x):
        return np.array([0.7, 0.7])

    with pytest.raises(ValueError, match="sum"):
        validate_weight_family(bad_sum, pts, [[0.5, 0.5]])

    def negative(x):
        return np.array([1.5, -0.5])

    with pytest.raises(ValueError, match="negative"):
        validate_weight_family(negative, pts, [[0.5, 0.5]])

    def uniform(x):
        return np.array([0.5, 0.5])

    with pytest.raises(ValueError, match="interpolate"):
        validate_weight_family(uniform, pts, [[0.5, 0.5]])


# -- model ---------------------------------------------------------------------


def test_model_interpolates_sample_means_exactly():
    rng = np.random.default_rng(0)
    data = _data(rng)
    model = gps_build_model(GaussianKernel(1.0, 0.4), data)
    for obs in data:
        assert model.mean_at(obs.point) == obs.mean


def test_model_variance_identities():
    rng = np.random.default_rng(1)
    data = _data(rng, noise=0.09)
    model = gps_build_model(GaussianKernel(1.0, 0.4), data)
    # at a data point the weights collapse, leaving exactly the noise term
    for obs in data:
        assert model.var_at(obs.point) == pytest.approx(obs.noise_var, abs=1e-12)
    # everywhere else the quadratic form stays nonnegative
    for q in rng.uniform(-1, 1, (50, 2)):
        assert model.var_at(q) >= 0.0


def test_model_build_and_query_do_not_factorize():
    rng = np.random.default_rng(2)
    data = _data(rng, n=12)
    before = factorization_count()
    model = gps_build_model(GaussianKernel(1.0, 0.5), data)
    model.mean(rng.uniform(-1, 1, (30, 2)))
    model.var(rng.uniform(-1, 1, (30, 2)))
    gps_density(model, 0.0, rng.uniform(-1, 1, (40, 2)))
    assert factorization_count() == before


def test_model_vector_queries_match_scalar():
    rng = np.random.default_rng(3)
    data = _data(rng)
    model = gps_build_model(GaussianKernel(1.0, 0.4), data)
    Q = rng.uniform(-1, 1, (6, 2))
    np.testing.assert_array_equal(model.mean(Q), [model.mean_at(q) for q in Q])
    np.testing.assert_array_equal(model.var(Q), [model.var_at(q) for q in Q])
    assert model.n == len(data)


def test_build_model_substitutes_noise_floor_for_unknowns():
    rng = np.random.default_rng(4)
    X = rng.uniform(-1, 1, (5, 2))
    data = Dataset(
        [AggregatedObservation(X[i], float(i), 1, None) for i in range(5)]
    )
    with pytest.raises(ValueError, match="unknown noise"):
        gps_build_model(GaussianKernel(1.0, 0.4), data)
    model = gps_build_model(GaussianKernel(1.0, 0.4), data, noise_floor=0.25)
    assert model.var_at(X[0]) == pytest.approx(0.25, abs=1e-12)


# -- density --------------------------------------------------------------------


def test_density_normalizes_and_orders_by_mean():
    rng = np.random.default_rng(5)
    data = _data(rng)
    model = gps_build_model(GaussianKernel(1.0, 0.4), data)
    grid = rng.uniform(-1, 1, (64, 2))
    h = gps_density(model, float(np.median(data.means())), grid)
    assert h.shape == (64,)
    assert np.all(h >= 0)
    assert h.sum() == pytest.approx(1.0, abs=1e-12)


def test_density_degenerate_variance_becomes_indicator():
    pts = np.array([[0.0], [1.0], [2.0]])
    data = Dataset([
        AggregatedObservation(pts[0], 2.0, 1, 0.0),
        AggregatedObservation(pts[1], -1.0, 1, 0.0),
        AggregatedObservation(pts[2], 0.5, 1, 0.0),
    ])
    model = gps_build_model(GaussianKernel(1.0, 0.5), data)
    # variance vanishes exactly at the data points, so the tail probability
    # is the indicator mean > c (one half at equality)
    h = gps_density(model, 0.5, pts)
    np.testing.assert_allclose(h * h.sum() / h[0], [1.0, 0.0, 0.5] / h[0] * h[0])
    np.testing.assert_allclose(h, np.array([1.0, 0.0, 0.5]) / 1.5)


def test_density_underflow_falls_back_to_uniform():
    rng = np.random.default_rng(6)
    data = _data(rng, noise=1e-6)
    model = gps_build_model(GaussianKernel(1.0, 0.4), data)
    grid = rng.uniform(-1, 1, (10, 2))
    with pytest.warns(RuntimeWarning, match="underflow"):
        h = gps_density(model, 1e6, grid)
    np.testing.assert_allclose(h, np.full(10, 0.1))


def test_density_validates_grid():
    rng = np.random.default_rng(7)
    model = gps_build_model(GaussianKernel(1.0, 0.4), _data(rng))
    with pytest.raises(ValueError):
        gps_density(model, 0.0, np.empty((0, 2)))


# -- samplers --------------------------------------------------------------------


def test_acceptance_rejection_matches_weights():
    rng = np.random.default_rng(8)
    grid = np.linspace(0.0, 1.0, 5)[:, None]
    w = np.array([0.4, 0.1, 0.2, 0.05, 0.25])
    draws = gps_sample(grid, w, "acceptance_rejection", 40_000, rng)
    freq = np.array([(draws[:, 0] == g).mean() for g in grid[:, 0]])
    np.testing.assert_allclose(freq, w, atol=0.01)


def test_mcmc_matches_weights():
    rng = np.random.default_rng(9)
    grid = np.linspace(0.0, 1.0, 5)[:, None]
    w = np.array([0.4, 0.1, 0.2, 0.05, 0.25])
    draws = gps_sample(grid, w, "mcmc", 60_000, rng, proposal_width=4)
    freq = np.array([(draws[:, 0] == g).mean() for g in grid[:, 0]])
    np.testing.assert_allclose(freq, w, atol=0.02)


def test_sampler_validation():
    grid = np.zeros((3, 1))
    w = np.array([0.5, 0.3, 0.2])
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError, match="unknown sampler"):
        gps_sample(grid, w, "bogus", 5, rng)
    with pytest.raises(ValueError):
        gps_sample(grid, w[:2], "mcmc", 5, rng)
    with pytest.raises(ValueError):
        gps_sample(grid, np.array([0.5, -0.1, 0.6]), "mcmc", 5, rng)
    with pytest.raises(ValueError):
        gps_sample(grid, w, "mcmc", 0, rng)
    with pytest.raises(ValueError):
        gps_sample(grid, np.zeros(3), "acceptance_rejection", 5, rng)


def test_acceptance_rejection_envelope_guard():
    # one spike among a sea of zeros: the uniform proposal would almost
    # never hit it, so the sampler refuses instead of spinning
    w = np.zeros(2_000_001)
    w[0] = 1.0
    with pytest.raises(EnvelopeError):
        gps_sample(np.zeros((w.size, 1)), w, "acceptance_rejection", 1,
                   np.random.default_rng(0))


def test_sample_smoothing_stays_in_box():
    rng = np.random.default_rng(10)
    box = Box([0.0], [1.0])
    grid = np.linspace(0.0, 1.0, 9)[:, None]
    w = np.full(9, 1.0 / 9.0)
    pts = gps_sample(grid, w, "acceptance_rejection", 500, rng,
                     smoothing_bandwidth=0.3, box=box)
    assert pts.shape == (500, 1)
    assert np.all((pts >= 0.0) & (pts <= 1.0))
    # smoothing actually moved points off the grid
    assert np.mean(np.isin(pts[:, 0], grid[:, 0])) < 0.5


def test_sampler_deterministic_given_seed():
    grid = np.linspace(0.0, 1.0, 7)[:, None]
    w = np.linspace(1.0, 2.0, 7)
    a = gps_sample(grid, w, "mcmc", 100, np.random.default_rng(5))
    b = gps_sample(grid, w, "mcmc", 100, np.random.default_rng(5))
    np.testing.assert_array_equal(a, b)
