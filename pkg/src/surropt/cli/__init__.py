"""Benchmark harness: configs, registries, experiment runner, reports."""

from .approx import ApproxReport, ApproxRow, approx_compare, approx_compare_from_doc, synthetic_dataset
from .config import ExperimentSpec, apply_overrides, load_spec, spec_from_doc
from .main import build_parser, main
from .registries import build_model, build_prior, list_algorithms, list_models, run_algorithm
from .runner import CellResult, ResultBundle, run_experiment
from .selfcheck import CheckResult, format_report, run_selfcheck

__all__ = [
    "ApproxReport",
    "ApproxRow",
    "CellResult",
    "CheckResult",
    "ExperimentSpec",
    "ResultBundle",
    "approx_compare",
    "approx_compare_from_doc",
    "apply_overrides",
    "build_model",
    "build_parser",
    "build_prior",
    "format_report",
    "list_algorithms",
    "list_models",
    "load_spec",
    "main",
    "run_algorithm",
    "run_experiment",
    "run_selfcheck",
    "spec_from_doc",
    "synthetic_dataset",
]
