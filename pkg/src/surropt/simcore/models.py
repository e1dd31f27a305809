"""Simulation model interface and replication drivers."""

from __future__ import annotations

import abc

import numpy as np

from ..exceptions import CapabilityError
from .box import Box
from .data import AggregatedObservation, ReplicationSet


class SimulationModel(abc.ABC):
    """A stochastic model of a real system, evaluated by running replications.

    One replication at point x returns an unbiased draw of the objective
    F(x); the target of optimization is f(x) = E[F(x)]. Models are immutable
    once constructed and must be deterministic given the generator passed in,
    so that identical (model, point, reps, seed) reproduce identical output.
    """

    name: str = "model"

    @property
    @abc.abstractmethod
    def box(self) -> Box:
        """Feasible region."""

    @property
    def dimension(self) -> int:
        return self.box.dimension

    @abc.abstractmethod
    def evaluate(self, point: np.ndarray, rng: np.random.Generator) -> float:
        """One replication of the objective at a feasible point."""

    # -- optional capabilities ----------------------------------------------

    @property
    def has_gradients(self) -> bool:
        return False

    def evaluate_with_gradient(
        self, point: np.ndarray, rng: np.random.Generator
    ) -> tuple[float, np.ndarray]:
        """One replication returning (output, gradient estimate)."""
        raise CapabilityError(f"model {self.name!r} provides no gradient estimates")

    @property
    def has_stylized(self) -> bool:
        return False

    def stylized(self, point: np.ndarray) -> float:
        """Cheap deterministic approximation of f, when the model has one."""
        raise CapabilityError(f"model {self.name!r} provides no stylized form")

    def noise_var(self, point: np.ndarray) -> float | None:
        """Known per-replication output variance at a point, or None."""
        return None

    def true_value(self, point: np.ndarray) -> float | None:
        """f(point) when known in closed form, else None."""
        return None

    @property
    def known_argmax(self) -> np.ndarray | None:
        """Global argmax of f over the box, when known."""
        return None

    @property
    def known_max(self) -> float | None:
        """Global maximum of f over the box, when known."""
        return None

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r}, dimension={self.dimension})"


class CallableModel(SimulationModel):
    """Wrap f(point, rng) -> float as a model; mainly for tests and demos."""

    def __init__(
        self,
        func,
        box: Box,
        name: str = "callable",
        noise_var=None,
        true_func=None,
        gradient_func=None,
        stylized_func=None,
        argmax=None,
        max_value=None,
    ):
        self._func = func
        self._box = box
        self.name = name
        self._noise_var = noise_var
        self._true_func = true_func
        self._gradient_func = gradient_func
        self._stylized_func = stylized_func
        self._argmax = None if argmax is None else np.asarray(argmax, dtype=float)
        self._max_value = None if max_value is None else float(max_value)

    @property
    def box(self) -> Box:
        return self._box

    def evaluate(self, point, rng):
        return float(self._func(np.asarray(point, dtype=float), rng))

    @property
    def has_gradients(self) -> bool:
        return self._gradient_func is not None

    def evaluate_with_gradient(self, point, rng):
        if self._gradient_func is None:
            return super().evaluate_with_gradient(point, rng)
        y, g = self._gradient_func(np.asarray(point, dtype=float), rng)
        return float(y), np.asarray(g, dtype=float)

    @property
    def has_stylized(self) -> bool:
        return self._stylized_func is not None

    def stylized(self, point):
        if self._stylized_func is None:
            return super().stylized(point)
        return float(self._stylized_func(np.asarray(point, dtype=float)))

    def noise_var(self, point):
        if self._noise_var is None:
            return None
        if callable(self._noise_var):
            return float(self._noise_var(np.asarray(point, dtype=float)))
        return float(self._noise_var)

    def true_value(self, point):
        if self._true_func is None:
            return None
        return float(self._true_func(np.asarray(point, dtype=float)))

    @property
    def known_argmax(self):
        return self._argmax

    @property
    def known_max(self):
        return self._max_value


def _child_generators(rng, n: int) -> list[np.random.Generator]:
    """Spawn n independent child generators from a seed-like input."""
    if isinstance(rng, (int, np.integer)):
        seq = np.random.SeedSequence(int(rng))
        return [np.random.default_rng(s) for s in seq.spawn(n)]
    if isinstance(rng, np.random.SeedSequence):
        return [np.random.default_rng(s) for s in rng.spawn(n)]
    if isinstance(rng, np.random.Generator):
        return list(rng.spawn(n))
    raise TypeError(f"cannot derive generators from {type(rng).__name__}")


def run_replications(
    model: SimulationModel,
    point,
    reps: int,
    rng,
    with_gradients: bool = False,
) -> ReplicationSet:
    """Run reps independent replications of the model at one feasible point.

    rng may be an int seed, a SeedSequence, or a Generator; each replication
    gets its own spawned stream, so results are reproducible and independent
    of evaluation order.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    x = model.box.require(point)
    if with_gradients and not model.has_gradients:
        raise CapabilityError(f"model {model.name!r} provides no gradient estimates")
    streams = _child_generators(rng, reps)
    outputs = np.empty(reps)
    gradients = np.empty((reps, model.dimension)) if with_gradients else None
    for i, stream in enumerate(streams):
        if with_gradients:
            y, g = model.evaluate_with_gradient(x, stream)
            outputs[i] = y
            gradients[i] = g
        else:
            outputs[i] = model.evaluate(x, stream)
    return ReplicationSet(x, outputs, gradients)


def aggregate(
    reps: ReplicationSet, known_noise_var: float | None = None
) -> AggregatedObservation:
    """Collapse a replication set to (mean, reps, variance-of-mean).

    With r >= 2 the noise variance is the sample variance over r; with a
    single replication it is unknown unless the caller passes the model's
    known per-replication variance.
    """
    r = reps.reps
    mean = float(reps.outputs.mean())
    if known_noise_var is not None:
        noise_var = float(known_noise_var) / r
    elif r >= 2:
        noise_var = float(reps.outputs.var(ddof=1)) / r
    else:
        noise_var = None
    grad_mean = None
    if reps.gradients is not None:
        grad_mean = reps.gradients.mean(axis=0)
    return AggregatedObservation(reps.point, mean, r, noise_var, grad_mean)


def observe(
    model: SimulationModel,
    point,
    reps: int,
    rng,
    with_gradients: bool = False,
    use_known_noise: bool = True,
) -> AggregatedObservation:
    """run_replications followed by aggregate, preferring known noise levels."""
    rs = run_replications(model, point, reps, rng, with_gradients=with_gradients)
    known = model.noise_var(rs.point) if use_known_noise else None
    return aggregate(rs, known_noise_var=known)
