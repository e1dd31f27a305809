"""Linear-in-features surrogates: ordinary, ridge, and gradient-augmented
generalized least squares."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import CapabilityError, RankDeficiencyError
from ..linalg import cholesky_factor
from ..simcore.data import Dataset
from .features import FeatureMap


@dataclass(frozen=True)
class LinearSurrogate:
    """Prediction rule phi(x)' beta with provenance of the fit."""

    features: FeatureMap
    beta: np.ndarray
    fit_kind: str  # "ols" | "rls" | "gls"
    regularization: float = 0.0
    extras: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float).copy()
        if beta.shape != (self.features.size,):
            raise ValueError(
                f"beta has shape {beta.shape}, features count {self.features.size}"
            )
        beta.flags.writeable = False
        object.__setattr__(self, "beta", beta)

    def predict_one(self, x) -> float:
        return float(self.features.value(x) @ self.beta)

    def predict(self, X) -> np.ndarray:
        return self.features.matrix(X) @ self.beta

    def gradient(self, x) -> np.ndarray:
        return self.features.jacobian(x).T @ self.beta


def _design(features: FeatureMap, data: Dataset) -> tuple[np.ndarray, np.ndarray]:
    return features.matrix(data.points()), data.means()


def fit_ols(features: FeatureMap, data: Dataset) -> LinearSurrogate:
    """Least squares with a full-column-rank design.

    Rank deficiency (including p > n) is surfaced rather than silently
    resolved; ridge regression handles those regimes.
    """
    phi, y = _design(features, data)
    n, p = phi.shape
    rank = np.linalg.matrix_rank(phi)
    if rank < p:
        raise RankDeficiencyError(
            f"design matrix has rank {rank} < {p} columns "
            f"(n={n}); fit_rls with lam > 0 handles this regime"
        )
    beta, *_ = np.linalg.lstsq(phi, y, rcond=None)
    return LinearSurrogate(features, beta, "ols")


def fit_rls(features: FeatureMap, data: Dataset, lam: float) -> LinearSurrogate:
    """Ridge regression solved through the n-by-n kernel-side system
    beta = Phi' (Phi Phi' + n lam I)^{-1} ybar.

    lam = 0 reduces to plain least squares, with its rank requirement.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if lam == 0.0:
        fit = fit_ols(features, data)
        return LinearSurrogate(features, fit.beta, "rls", regularization=0.0)
    phi, y = _design(features, data)
    n = phi.shape[0]
    gram = phi @ phi.T + n * lam * np.eye(n)
    alpha = cholesky_factor(gram).solve(y)
    return LinearSurrogate(features, phi.T @ alpha, "rls", regularization=float(lam))


@dataclass(frozen=True)
class KrrModel:
    """Kernel ridge predictor k(x)'(K + n lam I)^{-1} ybar."""

    kernel: object
    points: np.ndarray
    alpha: np.ndarray
    regularization: float

    def predict_one(self, x) -> float:
        k = self.kernel.gram(np.atleast_2d(np.asarray(x, dtype=float)), self.points)
        return float(k[0] @ self.alpha)

    def predict(self, X) -> np.ndarray:
        return self.kernel.gram(np.atleast_2d(np.asarray(X, dtype=float)), self.points) @ self.alpha


def fit_krr(kernel, data: Dataset, lam: float) -> KrrModel:
    if lam <= 0:
        raise ValueError("lam must be positive")
    X = data.points()
    y = data.means()
    n = len(data)
    K = kernel.gram(X) + n * lam * np.eye(n)
    alpha = cholesky_factor(K).solve(y)
    return KrrModel(kernel, X, alpha, float(lam))


def krr_predict(kernel, data: Dataset, lam: float, x) -> float:
    """One-shot kernel ridge prediction at a single point."""
    return fit_krr(kernel, data, lam).predict_one(x)


def validate_noise_covariance(V: np.ndarray, dimension: int) -> np.ndarray:
    """Check the per-replication (value, gradient) noise covariance."""
    V = np.asarray(V, dtype=float)
    want = dimension + 1
    if V.shape != (want, want):
        raise ValueError(f"noise covariance must be {want}x{want}, got {V.shape}")
    if not np.allclose(V, V.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(V).max())):
        raise ValueError("noise covariance must be symmetric")
    eigvals = np.linalg.eigvalsh(0.5 * (V + V.T))
    if eigvals.min() <= 0:
        raise ValueError(
            f"noise covariance must be positive definite; min eigenvalue "
            f"{eigvals.min()}"
        )
    return 0.5 * (V + V.T)


def _stacked_system(features: FeatureMap, data: Dataset):
    """Augmented target and design: per point, the mean value row followed
    by the d gradient-mean rows (jacobian columns).
    """
    if not data.has_gradients():
        raise CapabilityError("every observation needs a gradient mean")
    d = data.dimension
    p = features.size
    n = len(data)
    y_aug = np.empty(n * (d + 1))
    phi_aug = np.empty((n * (d + 1), p))
    for i, obs in enumerate(data):
        base = i * (d + 1)
        y_aug[base] = obs.mean
        y_aug[base + 1 : base + d + 1] = obs.grad_mean
        phi_aug[base] = features.value(obs.point)
        try:
            jac = features.jacobian(obs.point)
        except NotImplementedError:
            raise CapabilityError(
                f"feature map {type(features).__name__} provides no jacobian"
            ) from None
        phi_aug[base + 1 : base + d + 1] = jac.T
    return phi_aug, y_aug


def fit_gls_with_gradients(
    features: FeatureMap, data: Dataset, V: np.ndarray
) -> LinearSurrogate:
    """Generalized least squares on values and gradient means jointly.

    The stacked system has one (d+1)-block per point with covariance V/r_i,
    independent across points; the estimator is
    (Phi+' W^{-1} Phi+)^{-1} Phi+' W^{-1} y+ with W that block diagonal.
    """
    d = data.dimension
    V = validate_noise_covariance(V, d)
    phi_aug, y_aug = _stacked_system(features, data)
    V_inv = np.linalg.inv(V)
    p = features.size
    normal = np.zeros((p, p))
    moment = np.zeros(p)
    for i, obs in enumerate(data):
        sl = slice(i * (d + 1), (i + 1) * (d + 1))
        B = phi_aug[sl]
        w_inv = obs.reps * V_inv  # (V / r_i)^{-1}
        normal += B.T @ w_inv @ B
        moment += B.T @ (w_inv @ y_aug[sl])
    try:
        factor = cholesky_factor(normal)
    except Exception as exc:
        raise RankDeficiencyError(
            f"gradient-augmented normal matrix is singular: {exc}"
        ) from exc
    beta = factor.solve(moment)
    cov_beta = factor.solve(np.eye(p))
    return LinearSurrogate(
        features,
        beta,
        "gls",
        extras={"coefficient_cov": cov_beta, "noise_cov": V},
    )


def fit_ols_with_gradients(features: FeatureMap, data: Dataset) -> LinearSurrogate:
    """Unweighted least squares on the same stacked value/gradient system."""
    phi_aug, y_aug = _stacked_system(features, data)
    rank = np.linalg.matrix_rank(phi_aug)
    if rank < features.size:
        raise RankDeficiencyError(
            f"augmented design has rank {rank} < {features.size} columns"
        )
    beta, *_ = np.linalg.lstsq(phi_aug, y_aug, rcond=None)
    return LinearSurrogate(features, beta, "ols", extras={"augmented": True})


def estimate_noise_covariance(replication_sets) -> np.ndarray:
    """Pooled sample covariance of per-replication (output, gradient) draws.

    Pools (r_i - 1)-weighted sample covariances across points with r_i >= 2.
    """
    total = None
    weight = 0
    for rs in replication_sets:
        if rs.gradients is None:
            raise CapabilityError("replication sets must carry gradients")
        if rs.reps < 2:
            continue
        joint = np.column_stack([rs.outputs, rs.gradients])
        S = np.cov(joint, rowvar=False, ddof=1)
        if total is None:
            total = (rs.reps - 1) * S
        else:
            total += (rs.reps - 1) * S
        weight += rs.reps - 1
    if total is None or weight == 0:
        raise ValueError("need at least one point with two or more replications")
    return total / weight
