"""Shared helpers for the local polynomial-model optimizers."""

from __future__ import annotations

import numpy as np

from ..exceptions import RankDeficiencyError
from ..simcore.data import Dataset
from ..surrogates.features import polynomial_features
from ..surrogates.linear import LinearSurrogate, fit_ols, fit_rls


def _fit(features, data: Dataset) -> LinearSurrogate:
    """Least squares, with a tiny ridge fallback when box projection has
    collapsed design points and left the design matrix rank deficient."""
    try:
        return fit_ols(features, data)
    except RankDeficiencyError:
        scale = float(np.var(data.means())) + 1.0
        return fit_rls(features, data, 1e-10 * scale)


def fit_linear_model(data: Dataset) -> tuple[LinearSurrogate, float, np.ndarray]:
    """First-order fit on the aggregated means: (model, intercept, gradient)."""
    d = data.dimension
    fit = _fit(polynomial_features(d, 1), data)
    return fit, float(fit.beta[0]), fit.beta[1 : d + 1].copy()


def fit_quadratic_model(
    data: Dataset,
) -> tuple[LinearSurrogate, float, np.ndarray, np.ndarray]:
    """Second-order fit: (model, intercept, linear part, symmetric matrix B)
    so that the prediction is b0 + lin'x + x'Bx."""
    d = data.dimension
    feats = polynomial_features(d, 2)
    fit = _fit(feats, data)
    beta0 = float(fit.beta[0])
    lin = fit.beta[1 : d + 1].copy()
    B = np.zeros((d, d))
    idx = d + 1
    for j in range(d):
        for k in range(j, d):
            coef = fit.beta[idx]
            if j == k:
                B[j, j] = coef
            else:
                B[j, k] = B[k, j] = 0.5 * coef
            idx += 1
    return fit, beta0, lin, B


def residual_mean_square(fit: LinearSurrogate, data: Dataset) -> tuple[float, int]:
    """Residual variance of the fit on the aggregated means and its df."""
    X = data.points()
    resid = data.means() - fit.predict(X)
    df = len(data) - fit.beta.size
    if df <= 0:
        return 0.0, 0
    return float(resid @ resid) / df, df
