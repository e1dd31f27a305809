"""Model and algorithm registries resolving experiment configuration ids.

Every entry is a factory taking a flat parameter mapping; unknown ids or
parameters raise ConfigError naming the offending key so configs fail
loudly and precisely.
"""

from __future__ import annotations

import inspect

import numpy as np

from ..exceptions import ConfigError
from ..gp.kernels import GaussianKernel, MaternKernel
from ..gp.means import ConstantMean
from ..gp.posterior import GpPrior
from ..optimizers import make_criterion, rsm_run, sequential_template, spas_run, strong_run
from ..simcore.box import Box
from ..simcore.testbed import ConcaveQuadraticModel, RippleModel, TandemQueueModel


def _call_with_params(factory, params: dict, what: str):
    sig = inspect.signature(factory)
    for key in params:
        if key not in sig.parameters:
            raise ConfigError(f"unknown parameter {what}.{key!r}")
    return factory(**params)


def _quadratic_2d(**params):
    defaults = dict(
        center=[0.4, -0.2],
        curvatures=[1.0, 2.0],
        lower=[-2.0, -2.0],
        upper=[2.0, 2.0],
        peak=1.0,
        noise_sd=0.5,
    )
    defaults.update(params)
    lower, upper = defaults.pop("lower"), defaults.pop("upper")
    return ConcaveQuadraticModel(box=Box(lower, upper), **defaults)


def _quadratic_5d(**params):
    defaults = dict(
        center=[0.3, -0.3, 0.0, 0.5, -0.5],
        curvatures=[1.0, 1.5, 2.0, 0.8, 1.2],
        lower=[-1.0] * 5,
        upper=[1.0] * 5,
        peak=2.0,
        noise_sd=0.5,
        name="quadratic-5d",
    )
    defaults.update(params)
    lower, upper = defaults.pop("lower"), defaults.pop("upper")
    return ConcaveQuadraticModel(box=Box(lower, upper), **defaults)


def _ripple_1d(**params):
    defaults = dict(
        center=[0.31], lower=[-1.0], upper=[1.0],
        amp=1.0, freq=2.0, curv=0.8, noise_sd=0.3,
    )
    defaults.update(params)
    lower, upper = defaults.pop("lower"), defaults.pop("upper")
    return RippleModel(box=Box(lower, upper), **defaults)


def _ripple_2d(**params):
    defaults = dict(
        center=[0.31, -0.17], lower=[-1.0, -1.0], upper=[1.0, 1.0],
        amp=1.0, freq=1.5, curv=0.8, noise_sd=0.3, name="ripple-2d",
    )
    defaults.update(params)
    lower, upper = defaults.pop("lower"), defaults.pop("upper")
    return RippleModel(box=Box(lower, upper), **defaults)


MODEL_FACTORIES = {
    "quadratic-2d": _quadratic_2d,
    "quadratic-5d": _quadratic_5d,
    "ripple-1d": _ripple_1d,
    "ripple-2d": _ripple_2d,
    "tandem-queue": TandemQueueModel,
}

KERNEL_FACTORIES = {
    "gaussian": GaussianKernel,
    "matern": MaternKernel,
}


def build_model(model_id: str, params: dict | None = None):
    if model_id not in MODEL_FACTORIES:
        raise ConfigError(f"unknown model id {model_id!r}")
    params = dict(params or {})
    factory = MODEL_FACTORIES[model_id]
    if factory in (_quadratic_2d, _quadratic_5d, _ripple_1d, _ripple_2d):
        allowed = {"center", "curvatures", "lower", "upper", "peak",
                   "noise_sd", "amp", "freq", "curv", "name"}
        for key in params:
            if key not in allowed:
                raise ConfigError(f"unknown parameter model.params.{key!r}")
        return factory(**params)
    return _call_with_params(factory, params, "model.params")


def build_prior(config: dict | None, box: Box) -> GpPrior:
    """GP prior from a config mapping; scaled to the box when unspecified."""
    config = dict(config or {})
    kernel_id = config.pop("kernel", "gaussian")
    if kernel_id not in KERNEL_FACTORIES:
        raise ConfigError(f"unknown kernel id {kernel_id!r}")
    mean = float(config.pop("mean", 0.0))
    tau = float(config.pop("tau", 1.0))
    eta = float(config.pop("eta", 0.1 * float(np.max(box.widths))))
    extra = {}
    if kernel_id == "matern":
        extra["nu"] = float(config.pop("nu", 2.5))
    if config:
        key = sorted(config)[0]
        raise ConfigError(f"unknown parameter prior.{key!r}")
    return GpPrior(ConstantMean(mean), KERNEL_FACTORIES[kernel_id](tau=tau, eta=eta, **extra))


def _run_sequential(kind):
    def runner(model, prior_cfg, budget, seed, cfg):
        cfg = dict(cfg or {})
        options = {}
        if kind == "kg_saa" and "samples" in cfg:
            options["samples"] = int(cfg.pop("samples"))
        if kind == "ucb" and "a" in cfg:
            options["a"] = float(cfg.pop("a"))
        if kind == "gps":
            if "sampler" in cfg:
                options["sampler"] = str(cfg.pop("sampler"))
            if "power" in cfg:
                options["power"] = float(cfg.pop("power"))
        criterion = make_criterion(kind, **options)
        prior = build_prior(prior_cfg, model.box)
        kwargs = {}
        for key, cast in (
            ("batch", int), ("reps_per_point", int), ("noise_floor", float),
            ("candidates_per_dim", int),
        ):
            if key in cfg:
                kwargs[key] = cast(cfg.pop(key))
        if cfg:
            key = sorted(cfg)[0]
            raise ConfigError(f"unknown parameter algorithm.config.{key!r}")
        batch = kwargs.pop("batch", 1)
        return sequential_template(
            model, prior, criterion, batch, budget,
            np.random.default_rng(seed), **kwargs,
        )

    return runner


def _run_rsm(model, prior_cfg, budget, seed, cfg):
    cfg = dict(cfg or {})
    box = model.box
    start = np.asarray(cfg.pop("start", 0.5 * (box.lower + box.upper)), dtype=float)
    step = float(cfg.pop("step", 0.1 * float(np.max(box.widths))))
    kwargs = {}
    for key, cast in (
        ("reps", int), ("center_reps", int), ("alpha", float),
        ("max_line_steps", int), ("max_stage1_rounds", int),
    ):
        if key in cfg:
            kwargs[key] = cast(cfg.pop(key))
    if cfg:
        raise ConfigError(f"unknown parameter algorithm.config.{sorted(cfg)[0]!r}")
    return rsm_run(model, start, step, budget, np.random.default_rng(seed), **kwargs)


def _run_strong(model, prior_cfg, budget, seed, cfg):
    cfg = dict(cfg or {})
    box = model.box
    start = np.asarray(cfg.pop("start", 0.5 * (box.lower + box.upper)), dtype=float)
    kwargs = {}
    for key, cast in (
        ("delta0", float), ("delta_switch", float), ("design_reps", int),
        ("test_reps", int), ("alpha", float), ("escalate", float),
        ("max_design_reps", int), ("max_test_reps", int),
    ):
        if key in cfg:
            kwargs[key] = cast(cfg.pop(key))
    if cfg:
        raise ConfigError(f"unknown parameter algorithm.config.{sorted(cfg)[0]!r}")
    return strong_run(model, start, budget, np.random.default_rng(seed), **kwargs)


def _run_spas(model, prior_cfg, budget, seed, cfg):
    cfg = dict(cfg or {})
    kwargs = {}
    for key, cast in (
        ("candidates_per_iter", int), ("reps", int), ("ball_gamma", float),
        ("mpa_floor_rel", float), ("surrogate_grid_per_dim", int),
    ):
        if key in cfg:
            kwargs[key] = cast(cfg.pop(key))
    start = cfg.pop("start", None)
    if cfg:
        raise ConfigError(f"unknown parameter algorithm.config.{sorted(cfg)[0]!r}")
    return spas_run(
        model, model.box, budget, np.random.default_rng(seed),
        start=None if start is None else np.asarray(start, dtype=float), **kwargs,
    )


ALGORITHM_RUNNERS = {
    "kg_discrete": _run_sequential("kg_discrete"),
    "kg_saa": _run_sequential("kg_saa"),
    "ucb": _run_sequential("ucb"),
    "gps": _run_sequential("gps"),
    "rsm": _run_rsm,
    "strong": _run_strong,
    "spas": _run_spas,
}


def run_algorithm(algorithm_id: str, model, prior_cfg, budget: int, seed: int, cfg):
    if algorithm_id not in ALGORITHM_RUNNERS:
        raise ConfigError(f"unknown algorithm id {algorithm_id!r}")
    return ALGORITHM_RUNNERS[algorithm_id](model, prior_cfg, budget, seed, cfg)


def list_models() -> list[str]:
    return sorted(MODEL_FACTORIES)


def list_algorithms() -> list[str]:
    return sorted(ALGORITHM_RUNNERS)
