"""Gaussian-process surrogates: kernels, means, exact posterior, likelihood
fitting, and the one-step posterior update."""

from .kernels import (
    GaussianKernel,
    GibfKernel,
    InnerProductKernel,
    Kernel,
    MaternKernel,
    kernel_from_doc,
    kernel_gaussian,
    kernel_gibf,
    kernel_matern,
    matern_limit_check,
)
from .likelihood import (
    FitResult,
    HyperBound,
    fit_hyperparameters,
    log_marginal_likelihood,
    standard_family,
)
from .means import (
    BasisMean,
    ConstantMean,
    MeanFunction,
    StylizedMean,
    mean_from_doc,
)
from .posterior import (
    GpPosterior,
    GpPrior,
    PosteriorBase,
    UpdatedGpPosterior,
    kg_update,
    posterior,
)

__all__ = [
    "BasisMean",
    "ConstantMean",
    "FitResult",
    "GaussianKernel",
    "GibfKernel",
    "GpPosterior",
    "GpPrior",
    "HyperBound",
    "InnerProductKernel",
    "Kernel",
    "MaternKernel",
    "MeanFunction",
    "PosteriorBase",
    "StylizedMean",
    "UpdatedGpPosterior",
    "fit_hyperparameters",
    "kernel_from_doc",
    "kernel_gaussian",
    "kernel_gibf",
    "kernel_matern",
    "kg_update",
    "log_marginal_likelihood",
    "matern_limit_check",
    "mean_from_doc",
    "posterior",
    "standard_family",
]
