"""Optimization routines driven by simulation output.

Sequential surrogate strategies (knowledge gradient, upper confidence
bound, probabilistic point selection), classical response surface
ascent, a trust-region method with statistical acceptance tests, and a
promising-area search with shrinking-ball estimates. All routines share
the Budget / OptimizationTrace bookkeeping.
"""

from .acquisition import (
    expected_max_affine,
    kg_score_discrete,
    kg_score_saa,
    kg_score_saa_with_draws,
    ucb_schedule,
    ucb_score,
)
from .designs import central_composite, two_level_factorial
from .gps import (
    GpsModel,
    InverseDistanceWeights,
    gps_build_model,
    gps_density,
    gps_sample,
    validate_weight_family,
)
from .local_fit import fit_linear_model, fit_quadratic_model, residual_mean_square
from .rsm import rsm_run
from .sequential import (
    GpsCriterion,
    KgDiscreteCriterion,
    KgSaaCriterion,
    SequentialCriterion,
    UcbCriterion,
    argmax_lowest_index,
    candidate_grid,
    make_criterion,
    sequential_template,
)
from .spas import shrinking_ball_estimates, spas_run
from .strong import (
    TrustRegionState,
    default_delta_switch,
    step_cost,
    strong_run,
    strong_step,
    trust_region_update,
)
from .trace import Budget, OptimizationTrace, TraceRecord
from .trs import maximize_quadratic_in_ball

__all__ = [
    "Budget",
    "GpsCriterion",
    "GpsModel",
    "InverseDistanceWeights",
    "KgDiscreteCriterion",
    "KgSaaCriterion",
    "OptimizationTrace",
    "SequentialCriterion",
    "TraceRecord",
    "TrustRegionState",
    "UcbCriterion",
    "argmax_lowest_index",
    "candidate_grid",
    "central_composite",
    "default_delta_switch",
    "expected_max_affine",
    "fit_linear_model",
    "fit_quadratic_model",
    "gps_build_model",
    "gps_density",
    "gps_sample",
    "kg_score_discrete",
    "kg_score_saa",
    "kg_score_saa_with_draws",
    "make_criterion",
    "maximize_quadratic_in_ball",
    "residual_mean_square",
    "rsm_run",
    "sequential_template",
    "shrinking_ball_estimates",
    "spas_run",
    "step_cost",
    "strong_run",
    "strong_step",
    "trust_region_update",
    "two_level_factorial",
    "ucb_schedule",
    "ucb_score",
    "validate_weight_family",
]
