"""Low-rank GP posterior approximations for large datasets."""

from .guard import forbid_square
from .nystrom import (
    ApproxPosterior,
    NystromKernelPosterior,
    NystromNaivePosterior,
    nystrom_kernel_posterior,
    nystrom_naive_posterior,
)
from .rff import (
    RffBasis,
    RffPosterior,
    choose_feature_count,
    rff_kernel_estimate,
    rff_posterior,
    spectral_sample,
)
from .scaling import ScalingReport, scaling_report
from .woodbury import ActiveSet, select_active_set, woodbury_solve

__all__ = [
    "ActiveSet",
    "ApproxPosterior",
    "NystromKernelPosterior",
    "NystromNaivePosterior",
    "RffBasis",
    "RffPosterior",
    "ScalingReport",
    "choose_feature_count",
    "forbid_square",
    "nystrom_kernel_posterior",
    "nystrom_naive_posterior",
    "rff_kernel_estimate",
    "rff_posterior",
    "scaling_report",
    "select_active_set",
    "spectral_sample",
    "woodbury_solve",
]
