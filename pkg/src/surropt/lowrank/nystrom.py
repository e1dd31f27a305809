"""Nystrom approximations of the GP posterior, in both published variants."""

from __future__ import annotations

import abc

import numpy as np

from ..linalg import cholesky_factor
from ..simcore.data import Dataset
from ..gp.posterior import GpPrior, _clamp_variance
from .guard import guard
from .woodbury import ActiveSet


class ApproxPosterior(abc.ABC):
    """Query interface shared by the low-rank posterior approximations."""

    variant: str

    @property
    @abc.abstractmethod
    def n(self) -> int: ...

    @property
    @abc.abstractmethod
    def m(self) -> int: ...

    @abc.abstractmethod
    def mean_at(self, x) -> float: ...

    @abc.abstractmethod
    def cov_at(self, x, x2) -> float: ...

    @abc.abstractmethod
    def var_at(self, x) -> float: ...

    def mean(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.mean_at(x) for x in X])

    def var(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.var_at(x) for x in X])


def _noise_vector(data: Dataset) -> np.ndarray:
    sigma = data.noise_variances()
    if np.any(sigma <= 0):
        raise ValueError(
            "low-rank posteriors need strictly positive noise variances"
        )
    return sigma


def _lowrank_plus_diag_solve(K_mn, Q_factor, sigma, b):
    """(K_nm K_mm^{-1} K_mn + diag(sigma))^{-1} b by the Woodbury expansion.

    Q_factor holds the Cholesky of Q = K_mm + K_mn Sigma^{-1} K_nm, which is
    the expansion's inner matrix with C = K_mm^{-1} substituted exactly.
    """
    s_inv_b = b / sigma
    return s_inv_b - (K_mn.T @ Q_factor.solve(K_mn @ s_inv_b)) / sigma


class NystromKernelPosterior(ApproxPosterior):
    """Posterior of the GP whose kernel is the induced low-rank one.

    mean(x) = mu(x) + k_m(x)' Q^{-1} K_mn Sigma^{-1} (ybar - mu)
    cov(x,x') = K(x,x') - k_m(x)' Q^{-1} k_m(x')
    with Q = K_mm + K_mn Sigma^{-1} K_nm; construction touches nothing
    larger than m x n.
    """

    variant = "nystrom_kernel"

    def __init__(self, prior: GpPrior, data: Dataset, active: ActiveSet):
        if active.n != len(data):
            raise ValueError("active set was drawn for a different dataset size")
        self.prior = prior
        self.active = active
        X = data.points()
        self._anchors = X[active.indices]
        sigma = _noise_vector(data)
        resid = data.means() - prior.mean.values(X)
        K_mn = guard(prior.cov.gram(self._anchors, X))
        K_mm = prior.cov.gram(self._anchors)
        Q = K_mm + (K_mn / sigma[None, :]) @ K_mn.T
        self._factor = cholesky_factor(Q)
        self._weights = self._factor.solve(K_mn @ (resid / sigma))
        # pieces the appendix-identity check needs
        self._K_mn = K_mn
        self._sigma = sigma
        self._n = len(data)

    @property
    def n(self):
        return self._n

    @property
    def m(self):
        return self.active.m

    def _k_m(self, x) -> np.ndarray:
        return self.prior.cov.gram(
            np.atleast_2d(np.asarray(x, dtype=float)), self._anchors
        )[0]

    def mean_at(self, x) -> float:
        return float(self.prior.mean.value_at(x) + self._k_m(x) @ self._weights)

    def cov_at(self, x, x2) -> float:
        km = self._k_m(x)
        km2 = km if x2 is x else self._k_m(x2)
        return float(self.prior.cov(x, x2) - km @ self._factor.solve(km2))

    def var_at(self, x) -> float:
        return _clamp_variance(self.cov_at(x, x), float(self.prior.cov(x, x)))

    def mean(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Km = self.prior.cov.gram(X, self._anchors)
        return self.prior.mean.values(X) + Km @ self._weights

    def var(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Km = self.prior.cov.gram(X, self._anchors)
        raw = self.prior.cov.diag(X) - np.einsum(
            "ij,ji->i", Km, self._factor.solve(Km.T)
        )
        prior_diag = self.prior.cov.diag(X)
        return np.array(
            [_clamp_variance(float(r), float(p)) for r, p in zip(raw, prior_diag)]
        )

    def induced_weight_row(self, x) -> np.ndarray:
        """k_m(x)' Q^{-1} K_mn Sigma^{-1}, this route's n-row of data
        weights; feeds the identity checks."""
        return (self._factor.solve(self._k_m(x)) @ self._K_mn) / self._sigma


class NystromNaivePosterior(ApproxPosterior):
    """Substitutes Ktilde = K_nm K_mm^{-1} K_mn for the covariance MATRIX in
    the exact posterior formulas, keeping the cross-covariance vector k(x)
    and the leading K(x,x') exact as published.

    Because k(x) is no longer the cross-covariance of the approximating
    kernel, the substituted covariance is not a proper Schur complement and
    the variance can go negative; such values are returned as-is with a
    flag raised.
    """

    variant = "nystrom_naive"

    def __init__(self, prior: GpPrior, data: Dataset, active: ActiveSet):
        if active.n != len(data):
            raise ValueError("active set was drawn for a different dataset size")
        self.prior = prior
        self.active = active
        X = data.points()
        self._X = X
        self._anchors = X[active.indices]
        self._sigma = _noise_vector(data)
        resid = data.means() - prior.mean.values(X)
        self._K_mn = guard(prior.cov.gram(self._anchors, X))
        self._K_mm = prior.cov.gram(self._anchors)
        self._K_mm_factor = cholesky_factor(self._K_mm)
        Q = self._K_mm + (self._K_mn / self._sigma[None, :]) @ self._K_mn.T
        self._Q_factor = cholesky_factor(Q)
        # (Ktilde + Sigma)^{-1} r via Woodbury with U = K_nm, C = K_mm^{-1}
        self._weights = self._apply_inverse(resid)
        self._n = len(data)
        self.negative_variance_seen = False
        self.min_raw_variance = np.inf

    @property
    def n(self):
        return self._n

    @property
    def m(self):
        return self.active.m

    def _apply_inverse(self, b) -> np.ndarray:
        return _lowrank_plus_diag_solve(self._K_mn, self._Q_factor, self._sigma, b)

    def _k_vec(self, x) -> np.ndarray:
        """Exact cross-covariances K(x, x_i) over the full dataset."""
        return self.prior.cov.gram(
            np.atleast_2d(np.asarray(x, dtype=float)), self._X
        )[0]

    def _k_tilde(self, x) -> np.ndarray:
        """Ktilde(x, data) = k_m(x)' K_mm^{-1} K_mn as an n-vector."""
        km = self.prior.cov.gram(
            np.atleast_2d(np.asarray(x, dtype=float)), self._anchors
        )[0]
        return self._K_mm_factor.solve(km) @ self._K_mn

    def induced_weight_row(self, x) -> np.ndarray:
        """ktilde(x)' (Ktilde + Sigma)^{-1}, computed by this route's
        expanded Woodbury machinery; feeds the identity checks."""
        return self._apply_inverse(self._k_tilde(x))

    def mean_at(self, x) -> float:
        return float(self.prior.mean.value_at(x) + self._k_vec(x) @ self._weights)

    def cov_at(self, x, x2) -> float:
        k = self._k_vec(x)
        k2 = k if x2 is x else self._k_vec(x2)
        return float(self.prior.cov(x, x2) - k @ self._apply_inverse(k2))

    def var_at(self, x) -> float:
        raw = self.cov_at(x, x)
        if raw < self.min_raw_variance:
            self.min_raw_variance = raw
        if raw < 0:
            self.negative_variance_seen = True
        return raw

    def mean(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty(X.shape[0])
        for i, x in enumerate(X):
            out[i] = self.mean_at(x)
        return out


def nystrom_kernel_posterior(
    prior: GpPrior, data: Dataset, active: ActiveSet
) -> NystromKernelPosterior:
    return NystromKernelPosterior(prior, data, active)


def nystrom_naive_posterior(
    prior: GpPrior, data: Dataset, active: ActiveSet
) -> NystromNaivePosterior:
    return NystromNaivePosterior(prior, data, active)
