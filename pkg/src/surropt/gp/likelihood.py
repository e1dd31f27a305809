"""Marginal likelihood and multi-start hyperparameter selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ..exceptions import FactorizationError, FittingError
from ..linalg import cholesky_factor
from ..simcore.data import Dataset
from .kernels import GaussianKernel, MaternKernel
from .means import ConstantMean
from .posterior import GpPrior

_FAIL = 1e12


def log_marginal_likelihood(
    prior: GpPrior, data: Dataset, noise_floor: float | None = None
) -> float:
    """Log density of the observed means under the prior plus noise.

    Equals -1/2 r'(K+Sigma)^{-1}r - 1/2 ln|K+Sigma| - n/2 ln(2 pi) with
    r = ybar - mu; the determinant is of the full K + Sigma matrix, taken
    from its Cholesky factor.
    """
    X = data.points()
    resid = data.means() - prior.mean.values(X)
    sigma = data.noise_variances(floor=noise_floor)
    factor = cholesky_factor(prior.cov.gram(X) + np.diag(sigma))
    quad = float(resid @ factor.solve(resid))
    return -0.5 * quad - 0.5 * factor.log_det() - 0.5 * len(data) * math.log(
        2.0 * math.pi
    )


@dataclass(frozen=True)
class HyperBound:
    """Search interval for one named hyperparameter.

    log_scale parameters are optimized in ln units and must have positive
    bounds; equal bounds pin the parameter.
    """

    name: str
    lower: float
    upper: float
    log_scale: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise ValueError(f"bounds for {self.name} must be finite")
        if self.lower > self.upper:
            raise ValueError(f"lower > upper for {self.name}")
        if self.log_scale and self.lower <= 0:
            raise ValueError(f"log-scale parameter {self.name} needs positive bounds")

    def to_internal(self, v: float) -> float:
        return math.log(v) if self.log_scale else v

    def from_internal(self, z: float) -> float:
        return math.exp(z) if self.log_scale else z

    @property
    def internal_interval(self) -> tuple[float, float]:
        return self.to_internal(self.lower), self.to_internal(self.upper)


@dataclass
class FitResult:
    """Outcome of multi-start likelihood maximization."""

    params: dict
    value: float
    start_values: list = field(default_factory=list)
    optimum_values: list = field(default_factory=list)
    prior: GpPrior | None = None


def _start_matrix(bounds: list[HyperBound], restarts: int, rng) -> np.ndarray:
    """Latin-hypercube starts in internal coordinates, one row per restart."""
    q = len(bounds)
    Z = np.empty((restarts, q))
    for j, b in enumerate(bounds):
        lo, hi = b.internal_interval
        if hi == lo:
            Z[:, j] = lo
            continue
        strata = (rng.permutation(restarts) + rng.random(restarts)) / restarts
        Z[:, j] = lo + strata * (hi - lo)
    return Z


def fit_hyperparameters(
    build_prior,
    data: Dataset,
    bounds: list[HyperBound],
    restarts: int = 8,
    rng=None,
    initial: dict | None = None,
    noise_floor: float | None = None,
) -> FitResult:
    """Maximize the log marginal likelihood by multi-start bounded
    quasi-Newton search in internal (log where positive) coordinates.

    build_prior maps a {name: value} dict to a GpPrior. Starts come from a
    Latin-hypercube over the bounds (plus `initial` when given, which
    replaces the first start). The reported value is the max over all start
    and optimum evaluations, so it can never fall below any start.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    if rng is None:
        rng = np.random.default_rng()
    names = [b.name for b in bounds]

    def objective(z):
        params = {b.name: b.from_internal(float(v)) for b, v in zip(bounds, z)}
        try:
            return -log_marginal_likelihood(
                build_prior(params), data, noise_floor=noise_floor
            )
        except (FactorizationError, FloatingPointError, np.linalg.LinAlgError):
            return _FAIL

    Z0 = _start_matrix(bounds, restarts, rng)
    if initial is not None:
        Z0[0] = [b.to_internal(float(initial[b.name])) for b in bounds]
    zbounds = [b.internal_interval for b in bounds]

    best_value = -np.inf
    best_z = None
    start_values = []
    optimum_values = []
    for z0 in Z0:
        f0 = objective(z0)
        start_values.append(-f0 if f0 < _FAIL else -np.inf)
        if f0 < _FAIL and -f0 > best_value:
            best_value, best_z = -f0, z0.copy()
        res = minimize(objective, z0, method="L-BFGS-B", bounds=zbounds)
        fopt = float(res.fun)
        optimum_values.append(-fopt if fopt < _FAIL else -np.inf)
        if fopt < _FAIL and -fopt > best_value:
            best_value, best_z = -fopt, np.asarray(res.x, dtype=float)
    if best_z is None:
        raise FittingError("every start failed to factorize; widen the bounds")
    params = {b.name: b.from_internal(float(v)) for b, v in zip(bounds, best_z)}
    return FitResult(
        params=params,
        value=float(best_value),
        start_values=start_values,
        optimum_values=optimum_values,
        prior=build_prior(params),
    )


def standard_family(kind: str, data: Dataset, nu: float = 2.5):
    """(build_prior, bounds) for a constant-mean stationary-kernel family.

    Bounds are derived from the data spread: tau spans the output standard
    deviation scale, eta spans the design diameter scale, and the constant
    mean ranges over the observed outputs.
    """
    y = data.means()
    X = data.points()
    sd = float(np.std(y))
    sd = sd if sd > 0 else 1.0
    span = float(np.linalg.norm(X.max(axis=0) - X.min(axis=0)))
    span = span if span > 0 else 1.0
    bounds = [
        HyperBound("tau", 0.05 * sd, 20.0 * sd),
        HyperBound("eta", 0.02 * span, 2.0 * span),
        HyperBound(
            "c", float(y.min()) - 3.0 * sd, float(y.max()) + 3.0 * sd, log_scale=False
        ),
    ]
    if kind == "gaussian":

        def build(params):
            return GpPrior(
                ConstantMean(params["c"]),
                GaussianKernel(params["tau"], params["eta"]),
            )

    elif kind == "matern":

        def build(params):
            return GpPrior(
                ConstantMean(params["c"]),
                MaternKernel(params["tau"], params["eta"], nu),
            )

    else:
        raise ValueError(f"no standard family for kernel kind {kind!r}")
    return build, bounds
