"""Kernels, mean functions, exact GP posterior, rank-one update, likelihood."""

import math

import numpy as np
import pytest
from scipy import stats

from surropt.exceptions import StabilityError
from surropt.gp import (
    BasisMean,
    ConstantMean,
    GaussianKernel,
    GibfKernel,
    GpPrior,
    HyperBound,
    InnerProductKernel,
    MaternKernel,
    StylizedMean,
    fit_hyperparameters,
    kernel_from_doc,
    kg_update,
    log_marginal_likelihood,
    matern_limit_check,
    mean_from_doc,
    posterior,
    standard_family,
)
from surropt.gp.io import deserialize_prior, serialize_prior
from surropt.simcore import AggregatedObservation, Dataset
from surropt.surrogates import PolynomialFeatures


def _dataset(X, y, noise=0.0, reps=1):
    return Dataset([
        AggregatedObservation(X[i], float(y[i]), reps, noise)
        for i in range(len(X))
    ])


# -- kernels -------------------------------------------------------------------


def test_gaussian_kernel_closed_form():
    k = GaussianKernel(tau=2.0, eta=0.5)
    x, x2 = np.array([0.1, 0.2]), np.array([0.4, -0.2])
    d2 = 0.09 + 0.16
    assert k(x, x2) == pytest.approx(4.0 * math.exp(-d2 / (2 * 0.25)))
    assert k(x, x) == pytest.approx(4.0)
    assert k.is_stationary


def test_matern_closed_forms():
    x, x2 = np.array([0.0]), np.array([0.7])
    r = 0.7
    k1 = MaternKernel(1.0, 0.4, nu=0.5)
    assert k1(x, x2) == pytest.approx(math.exp(-r / 0.4))
    k3 = MaternKernel(1.0, 0.4, nu=1.5)
    q = math.sqrt(3) * r / 0.4
    assert k3(x, x2) == pytest.approx((1 + q) * math.exp(-q))
    k5 = MaternKernel(1.0, 0.4, nu=2.5)
    q = math.sqrt(5) * r / 0.4
    assert k5(x, x2) == pytest.approx((1 + q + q * q / 3) * math.exp(-q))
    with pytest.raises(ValueError):
        MaternKernel(1.0, 1.0, nu=2.0)


@pytest.mark.parametrize("kernel", [
    GaussianKernel(1.3, 0.6),
    MaternKernel(0.9, 0.8, nu=1.5),
    InnerProductKernel(PolynomialFeatures(2, 2)),
])
def test_gram_symmetry_and_positive_semidefiniteness(kernel):
    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, (12, 2))
    K = kernel.gram(X)
    np.testing.assert_allclose(K, K.T, atol=1e-12)
    eigvals = np.linalg.eigvalsh(K)
    assert eigvals.min() > -1e-9
    # cross-gram agrees with pointwise evaluation
    X2 = rng.uniform(-1, 1, (4, 2))
    C = kernel.gram(X, X2)
    for i in range(3):
        for j in range(2):
            assert C[i, j] == pytest.approx(kernel(X[i], X2[j]))


def test_kernel_param_updates():
    k = GaussianKernel(1.0, 0.5)
    k2 = k.with_params(eta=0.7)
    assert (k2.tau, k2.eta) == (1.0, 0.7) and k.eta == 0.5
    with pytest.raises(KeyError):
        k.with_params(rho=1.0)
    with pytest.raises(ValueError):
        GaussianKernel(0.0, 1.0)


def test_brownian_special_case_of_integrated_field():
    # order 0 reduces to theta0 + theta1 * min(x, x')
    k = GibfKernel([0], [np.array([0.3, 2.0])])
    assert k([0.4], [0.9]) == pytest.approx(0.3 + 2.0 * 0.4)
    assert k([0.9], [0.4]) == pytest.approx(0.3 + 2.0 * 0.4)
    with pytest.raises(ValueError):
        k([-0.1], [0.5])


@pytest.mark.parametrize("order", [0, 1, 2])
def test_integrated_field_kernel_is_psd(order):
    rng = np.random.default_rng(order)
    theta = rng.uniform(0.2, 1.0, order + 2)
    k = GibfKernel([order, order], [theta, theta])
    X = rng.uniform(0.0, 1.0, (15, 2))
    eigvals = np.linalg.eigvalsh(k.gram(X))
    assert eigvals.min() > -1e-8


def test_integrated_field_numeric_oracle():
    # compare the closed-form order-1 factor against numerical quadrature of
    # theta0 + theta1 x x' + theta2 int_0^min (x-u)(x'-u) du
    from scipy.integrate import quad
    theta = np.array([0.5, 0.8, 1.7])
    k = GibfKernel([1], [theta])
    for x, x2 in [(0.3, 0.9), (0.7, 0.7), (1.0, 0.2)]:
        integral, _ = quad(lambda u: (x - u) * (x2 - u), 0.0, min(x, x2))
        want = theta[0] + theta[1] * x * x2 + theta[2] * integral
        assert k([x], [x2]) == pytest.approx(want, rel=1e-10)


def test_matern_gap_report():
    rep = matern_limit_check(1.0, 0.5, [0.0, 0.25, 0.5, 1.0])
    assert rep["max_gap"] == pytest.approx(max(rep["gap"]))
    assert rep["gap"][0] == pytest.approx(0.0, abs=1e-12)
    assert rep["max_gap"] > 0


def test_kernel_doc_round_trip():
    rng = np.random.default_rng(1)
    kernels = [
        GaussianKernel(1.5, 0.3),
        MaternKernel(0.7, 1.1, nu=0.5),
        GibfKernel([1], [np.array([0.5, 0.8, 1.7])]),
        InnerProductKernel(PolynomialFeatures(2, 1)),
    ]
    for k in kernels:
        back = kernel_from_doc(k.to_doc())
        x, x2 = rng.uniform(0.0, 1.0, 2), rng.uniform(0.0, 1.0, 2)
        assert back(x, x2) == pytest.approx(k(x, x2), rel=1e-12)
    with pytest.raises(ValueError):
        kernel_from_doc({"kind": "sombrero"})


# -- means ---------------------------------------------------------------------


def test_mean_functions_and_docs():
    rng = np.random.default_rng(2)
    feats = PolynomialFeatures(2, 1)
    beta = rng.standard_normal(3)
    means = [ConstantMean(1.5), BasisMean(beta, feats)]
    X = rng.uniform(-1, 1, (5, 2))
    for m in means:
        np.testing.assert_allclose(
            m.values(X), [m.value_at(x) for x in X], atol=1e-12
        )
        back = mean_from_doc(m.to_doc())
        assert back.value_at(X[0]) == pytest.approx(m.value_at(X[0]))


def test_stylized_mean_registry():
    m = StylizedMean(lambda x: float(x[0] ** 2), scale=2.0, psi_name="sq")
    assert m.value_at([3.0]) == 18.0
    back = mean_from_doc(m.to_doc(), {"sq": lambda x: float(x[0] ** 2)})
    assert back.value_at([3.0]) == 18.0
    bare = StylizedMean(lambda x: 0.0)
    with pytest.raises(ValueError):
        bare.to_doc()


# -- exact posterior -------------------------------------------------------------


def test_posterior_interpolates_noise_free_data():
    rng = np.random.default_rng(3)
    X = rng.uniform(-1, 1, (7, 2))
    y = np.sin(2 * X[:, 0]) + X[:, 1]
    post = posterior(GpPrior(ConstantMean(0.0), GaussianKernel(1.0, 0.6)),
                     _dataset(X, y))
    np.testing.assert_allclose(post.mean(X), y, atol=1e-7)
    assert np.all(post.var(X) < 1e-7)


def test_posterior_matches_direct_linear_algebra():
    rng = np.random.default_rng(4)
    kernel = GaussianKernel(1.2, 0.5)
    mu0 = 0.7
    X = rng.uniform(-1, 1, (9, 2))
    y = rng.standard_normal(9)
    sigma = rng.uniform(0.01, 0.2, 9)
    data = Dataset([
        AggregatedObservation(X[i], y[i], 1, sigma[i]) for i in range(9)
    ])
    post = posterior(GpPrior(ConstantMean(mu0), kernel), data)
    K = kernel.gram(X)
    A = np.linalg.inv(K + np.diag(sigma))
    for x in rng.uniform(-1, 1, (6, 2)):
        k = kernel.gram(x[None, :], X)[0]
        want_mean = mu0 + k @ A @ (y - mu0)
        want_var = kernel(x, x) - k @ A @ k
        assert post.mean_at(x) == pytest.approx(want_mean, abs=1e-9)
        assert post.var_at(x) == pytest.approx(want_var, abs=1e-9)
    # vectorized paths agree with scalar ones
    Q = rng.uniform(-1, 1, (5, 2))
    np.testing.assert_allclose(post.mean(Q), [post.mean_at(q) for q in Q],
                               atol=1e-12)
    np.testing.assert_allclose(post.var(Q), [post.var_at(q) for q in Q],
                               atol=1e-12)
    C = post.cov(Q)
    np.testing.assert_allclose(np.diag(C), [post.cov_at(q, q) for q in Q],
                               atol=1e-10)


def test_posterior_reverts_to_prior_far_from_data():
    X = np.zeros((3, 1)) + np.array([[0.0], [0.1], [0.2]])
    post = posterior(
        GpPrior(ConstantMean(5.0), GaussianKernel(2.0, 0.1)),
        _dataset(X, [1.0, 2.0, 3.0], noise=0.1),
    )
    far = np.array([50.0])
    assert post.mean_at(far) == pytest.approx(5.0, abs=1e-6)
    assert post.var_at(far) == pytest.approx(4.0, abs=1e-6)


def test_posterior_variance_shrinks_with_observations():
    rng = np.random.default_rng(5)
    prior = GpPrior(ConstantMean(0.0), GaussianKernel(1.0, 0.5))
    X = rng.uniform(-1, 1, (10, 1))
    y = rng.standard_normal(10)
    x = np.array([0.05])
    small = posterior(prior, _dataset(X[:3], y[:3], noise=0.05))
    big = posterior(prior, _dataset(X, y, noise=0.05))
    assert big.var_at(x) <= small.var_at(x) + 1e-12


def test_variance_clamp_tolerates_roundoff_only():
    assert_clamp = pytest.approx(0.0)
    from surropt.gp.posterior import _clamp_variance
    assert _clamp_variance(-1e-13, 1.0) == assert_clamp
    assert _clamp_variance(0.25, 1.0) == 0.25
    with pytest.raises(StabilityError):
        _clamp_variance(-0.5, 1.0)


def test_posterior_with_noise_floor_for_unknown_noise():
    X = np.array([[0.0], [0.5]])
    data = Dataset([
        AggregatedObservation(X[0], 1.0, 1, None),
        AggregatedObservation(X[1], 2.0, 1, 0.1),
    ])
    prior = GpPrior(ConstantMean(0.0), GaussianKernel(1.0, 0.4))
    with pytest.raises(ValueError):
        posterior(prior, data)
    post = posterior(prior, data, noise_floor=1e-6)
    assert np.isfinite(post.mean_at([0.2]))


# -- rank-one update ---------------------------------------------------------------


def test_rank_one_update_equals_full_refit():
    rng = np.random.default_rng(6)
    prior = GpPrior(ConstantMean(0.3), GaussianKernel(1.1, 0.7))
    X = rng.uniform(-1, 1, (8, 2))
    y = rng.standard_normal(8)
    sigma = rng.uniform(0.02, 0.1, 8)
    obs = [AggregatedObservation(X[i], y[i], 1, sigma[i]) for i in range(8)]
    post = posterior(prior, Dataset(obs))
    x_new = rng.uniform(-1, 1, 2)
    y_new = 0.8
    nv = 0.05
    upd = kg_update(post, x_new, y_new, nv)
    refit = posterior(prior, Dataset(
        obs + [AggregatedObservation(x_new, y_new, 1, nv)]
    ))
    for q in rng.uniform(-1, 1, (12, 2)):
        assert upd.mean_at(q) == pytest.approx(refit.mean_at(q), abs=1e-9)
        assert upd.var_at(q) == pytest.approx(refit.var_at(q), abs=1e-9)
    q2 = rng.uniform(-1, 1, 2)
    q3 = rng.uniform(-1, 1, 2)
    assert upd.cov_at(q2, q3) == pytest.approx(refit.cov_at(q2, q3), abs=1e-9)


def test_chained_updates_match_batch_refit():
    rng = np.random.default_rng(7)
    prior = GpPrior(ConstantMean(0.0), MaternKernel(1.0, 0.6, nu=2.5))
    X = rng.uniform(-1, 1, (5, 1))
    y = rng.standard_normal(5)
    obs = [AggregatedObservation(X[i], y[i], 1, 0.04) for i in range(5)]
    cur = posterior(prior, Dataset(obs))
    extra = []
    for _ in range(3):
        x_new = rng.uniform(-1, 1, 1)
        y_new = float(rng.standard_normal())
        cur = kg_update(cur, x_new, y_new, 0.04)
        extra.append(AggregatedObservation(x_new, y_new, 1, 0.04))
    refit = posterior(prior, Dataset(obs + extra))
    for q in rng.uniform(-1, 1, (8, 1)):
        assert cur.mean_at(q) == pytest.approx(refit.mean_at(q), abs=1e-8)
        assert cur.var_at(q) == pytest.approx(refit.var_at(q), abs=1e-8)


def test_update_rejects_degenerate_noise():
    X = np.array([[0.0]])
    post = posterior(
        GpPrior(ConstantMean(0.0), GaussianKernel(1.0, 0.5)),
        _dataset(X, [1.0], noise=0.0),
    )
    with pytest.raises(ZeroDivisionError):
        kg_update(post, [0.0], 1.0, 0.0)  # zero variance and zero noise


# -- marginal likelihood --------------------------------------------------------


def test_log_marginal_likelihood_matches_gaussian_density():
    rng = np.random.default_rng(8)
    kernel = GaussianKernel(0.9, 0.5)
    mu0 = -0.2
    X = rng.uniform(-1, 1, (6, 2))
    y = rng.standard_normal(6)
    sigma = rng.uniform(0.05, 0.2, 6)
    data = Dataset([
        AggregatedObservation(X[i], y[i], 1, sigma[i]) for i in range(6)
    ])
    value = log_marginal_likelihood(GpPrior(ConstantMean(mu0), kernel), data)
    want = stats.multivariate_normal.logpdf(
        y, mean=np.full(6, mu0), cov=kernel.gram(X) + np.diag(sigma)
    )
    assert value == pytest.approx(float(want), rel=1e-10)


def test_hyperparameter_fit_improves_likelihood():
    rng = np.random.default_rng(9)
    true_kernel = GaussianKernel(1.0, 0.3)
    X = rng.uniform(-1, 1, (25, 1))
    L = np.linalg.cholesky(true_kernel.gram(X) + 1e-10 * np.eye(25))
    y = L @ rng.standard_normal(25)
    data = _dataset(X, y, noise=1e-4)
    build, bounds = standard_family("gaussian", data)
    fit = fit_hyperparameters(build, data, bounds, restarts=3,
                              rng=np.random.default_rng(0))
    assert fit.value >= max(fit.start_values)
    bad = log_marginal_likelihood(
        build({"tau": 1.0, "eta": 5.0, "c": 0.0}), data
    )
    assert fit.value > bad
    assert 0.05 < fit.params["eta"] < 1.5


def test_hyperparameter_fit_is_seeded():
    rng = np.random.default_rng(10)
    X = rng.uniform(-1, 1, (12, 1))
    y = np.sin(3 * X[:, 0])
    data = _dataset(X, y, noise=1e-4)
    build, bounds = standard_family("matern", data)
    a = fit_hyperparameters(build, data, bounds, restarts=2,
                            rng=np.random.default_rng(5))
    b = fit_hyperparameters(build, data, bounds, restarts=2,
                            rng=np.random.default_rng(5))
    assert a.params == b.params and a.value == b.value


def test_hyperbound_validation():
    with pytest.raises(ValueError):
        HyperBound("tau", -1.0, 2.0)  # log scale needs positive bounds
    with pytest.raises(ValueError):
        HyperBound("tau", 2.0, 1.0)


# -- prior serialization -----------------------------------------------------------


def test_prior_text_round_trip():
    rng = np.random.default_rng(11)
    priors = [
        GpPrior(ConstantMean(0.5), GaussianKernel(1.2, 0.4)),
        GpPrior(
            BasisMean(rng.standard_normal(3), PolynomialFeatures(2, 1)),
            MaternKernel(0.8, 0.9, nu=1.5),
        ),
    ]
    for prior in priors:
        back = deserialize_prior(serialize_prior(prior))
        x, x2 = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
        assert back.mean.value_at(x) == pytest.approx(prior.mean.value_at(x))
        assert back.cov(x, x2) == pytest.approx(prior.cov(x, x2))
