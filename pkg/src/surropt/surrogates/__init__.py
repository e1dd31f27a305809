"""Frequentist surrogates: basis features, least-squares fits, kernel ridge."""

from .features import (
    FeatureMap,
    PolynomialFeatures,
    RbfFeatures,
    StylizedAugmentedFeatures,
    augment_with_stylized,
    feature_map_from_doc,
    polynomial_features,
    rbf_features,
)
from .io import (
    load_surrogate,
    save_surrogate,
    surrogate_from_doc,
    surrogate_to_doc,
)
from .linear import (
    KrrModel,
    LinearSurrogate,
    estimate_noise_covariance,
    fit_gls_with_gradients,
    fit_krr,
    fit_ols,
    fit_ols_with_gradients,
    fit_rls,
    krr_predict,
    validate_noise_covariance,
)

__all__ = [
    "FeatureMap",
    "KrrModel",
    "LinearSurrogate",
    "PolynomialFeatures",
    "RbfFeatures",
    "StylizedAugmentedFeatures",
    "augment_with_stylized",
    "estimate_noise_covariance",
    "feature_map_from_doc",
    "fit_gls_with_gradients",
    "fit_krr",
    "fit_ols",
    "fit_ols_with_gradients",
    "fit_rls",
    "krr_predict",
    "load_surrogate",
    "polynomial_features",
    "rbf_features",
    "save_surrogate",
    "surrogate_from_doc",
    "surrogate_to_doc",
    "validate_noise_covariance",
]
