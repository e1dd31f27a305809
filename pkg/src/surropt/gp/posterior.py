"""Exact GP posterior under heteroscedastic observation noise, plus the
rank-one posterior update used by lookahead acquisition scores."""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np

from ..exceptions import StabilityError
from ..linalg import cholesky_factor
from ..simcore.data import Dataset
from .kernels import Kernel
from .means import ConstantMean, MeanFunction

VAR_CLAMP_REL = 1e-8


@dataclass(frozen=True)
class GpPrior:
    """Mean function plus covariance function."""

    mean: MeanFunction
    cov: Kernel

    @staticmethod
    def with_constant_mean(cov: Kernel, c: float = 0.0) -> "GpPrior":
        return GpPrior(ConstantMean(c), cov)


def _clamp_variance(raw: float, prior_var: float) -> float:
    """Treat tiny negative posterior variances as rounding noise."""
    if raw >= 0.0:
        return raw
    tol = VAR_CLAMP_REL * max(abs(prior_var), np.finfo(float).tiny)
    if raw >= -tol:
        return 0.0
    raise StabilityError(
        f"posterior variance {raw} below the rounding tolerance -{tol}; "
        "the model is numerically inconsistent"
    )


class PosteriorBase(abc.ABC):
    """Common query interface for exact and updated posteriors."""

    @abc.abstractmethod
    def mean_at(self, x) -> float: ...

    @abc.abstractmethod
    def cov_at(self, x, x2) -> float: ...

    def var_at(self, x) -> float:
        return _clamp_variance(self.cov_at(x, x), self.prior_var_at(x))

    @abc.abstractmethod
    def prior_var_at(self, x) -> float: ...

    # vectorized conveniences; subclasses override with faster paths

    def mean(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.mean_at(x) for x in X])

    def var(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.var_at(x) for x in X])


class GpPosterior(PosteriorBase):
    """Exact posterior of a GP prior given noisy aggregated observations.

    Caches the Cholesky factor of K + Sigma and the weight vector
    (K + Sigma)^{-1} (ybar - mu); queries never refactorize. Immutable.
    """

    def __init__(
        self, prior: GpPrior, data: Dataset, noise_floor: float | None = None
    ):
        self.prior = prior
        self.data = data
        self._X = data.points()
        self._y = data.means()
        self._sigma = data.noise_variances(floor=noise_floor)
        if np.any(self._sigma < 0):
            raise ValueError("noise variances must be nonnegative")
        K = prior.cov.gram(self._X)
        self._mu_data = prior.mean.values(self._X)
        self._factor = cholesky_factor(K + np.diag(self._sigma))
        self._weights = self._factor.solve(self._y - self._mu_data)

    @property
    def n(self) -> int:
        return self._y.size

    @property
    def points(self) -> np.ndarray:
        return self._X

    def _k_vec(self, x) -> np.ndarray:
        return self.prior.cov.gram(np.atleast_2d(np.asarray(x, float)), self._X)[0]

    def prior_var_at(self, x) -> float:
        return float(self.prior.cov(x, x))

    def mean_at(self, x) -> float:
        return float(self.prior.mean.value_at(x) + self._k_vec(x) @ self._weights)

    def cov_at(self, x, x2) -> float:
        kx = self._k_vec(x)
        kz = kx if x2 is x else self._k_vec(x2)
        return float(self.prior.cov(x, x2) - kx @ self._factor.solve(kz))

    # vectorized paths

    def mean(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Kq = self.prior.cov.gram(X, self._X)
        return self.prior.mean.values(X) + Kq @ self._weights

    def var(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Kq = self.prior.cov.gram(X, self._X)
        solved = self._factor.solve(Kq.T)
        raw = self.prior.cov.diag(X) - np.einsum("ij,ji->i", Kq, solved)
        prior_diag = self.prior.cov.diag(X)
        return np.array(
            [_clamp_variance(float(r), float(p)) for r, p in zip(raw, prior_diag)]
        )

    def cov(self, X, X2=None) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        X2m = X if X2 is None else np.atleast_2d(np.asarray(X2, dtype=float))
        K12 = self.prior.cov.gram(X, X2m)
        Kq1 = self.prior.cov.gram(X, self._X)
        Kq2 = Kq1 if X2 is None else self.prior.cov.gram(X2m, self._X)
        return K12 - Kq1 @ self._factor.solve(Kq2.T)

    def mean_cov_at_data(self) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean vector and covariance matrix at the design points."""
        return self.mean(self._X), self.cov(self._X)


def posterior(
    prior: GpPrior, data: Dataset, noise_floor: float | None = None
) -> GpPosterior:
    """Condition the prior on the dataset; Sigma comes from the noise_var
    fields (variance of each mean), with an optional floor for unknowns."""
    return GpPosterior(prior, data, noise_floor=noise_floor)


class UpdatedGpPosterior(PosteriorBase):
    """Posterior after one more single-replication observation at x_next.

    Mean and covariance follow the rank-one update
        mu'(x) = mu_n(x) + delta(x) * z
        K'(x, x') = K_n(x, x') - delta(x) delta(x')
    with delta(x) = K_n(x, x_next) / sqrt(K_n(x_next, x_next) + noise_var)
    and z = (y_next - mu_n(x_next)) / sqrt(K_n(x_next, x_next) + noise_var).
    """

    def __init__(self, base: PosteriorBase, x_next, y_next: float, noise_var: float):
        self.base = base
        self.x_next = np.atleast_1d(np.asarray(x_next, dtype=float)).copy()
        self.y_next = float(y_next)
        self.noise_var = float(noise_var)
        denom = base.cov_at(self.x_next, self.x_next) + self.noise_var
        if denom <= 0:
            raise ZeroDivisionError(
                "posterior variance plus noise at the new point is not positive"
            )
        self._sqrt_denom = float(np.sqrt(denom))
        self._z = (self.y_next - base.mean_at(self.x_next)) / self._sqrt_denom

    def delta(self, x) -> float:
        return self.base.cov_at(x, self.x_next) / self._sqrt_denom

    def prior_var_at(self, x) -> float:
        return self.base.prior_var_at(x)

    def mean_at(self, x) -> float:
        return self.base.mean_at(x) + self.delta(x) * self._z

    def cov_at(self, x, x2) -> float:
        return self.base.cov_at(x, x2) - self.delta(x) * self.delta(x2)


def kg_update(
    post_n: PosteriorBase, x_next, y_next: float, noise_var: float
) -> UpdatedGpPosterior:
    """One-step posterior update from a single new observation.

    Agrees with a full refit on the extended dataset; noise_var is the
    observation's variance and must be known up front.
    """
    return UpdatedGpPosterior(post_n, x_next, y_next, noise_var)
