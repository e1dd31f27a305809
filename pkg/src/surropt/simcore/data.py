"""Observation containers and their delimited text serialization."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

FLOAT_FORMAT = "%.17g"


def format_float(value: float) -> str:
    """Render a float with enough digits to round-trip exactly."""
    return FLOAT_FORMAT % float(value)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float).copy()
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ReplicationSet:
    """Raw outputs of r simulation replications at one design point.

    gradients, when present, holds one gradient estimate per replication
    (shape (r, d)).
    """

    point: np.ndarray
    outputs: np.ndarray
    gradients: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "point", _readonly(np.atleast_1d(self.point)))
        object.__setattr__(self, "outputs", _readonly(np.atleast_1d(self.outputs)))
        if self.outputs.ndim != 1 or self.outputs.size == 0:
            raise ValueError("outputs must be a nonempty 1-d array")
        if self.gradients is not None:
            g = _readonly(np.atleast_2d(self.gradients))
            if g.shape != (self.outputs.size, self.point.size):
                raise ValueError(
                    f"gradients shape {g.shape} incompatible with "
                    f"{self.outputs.size} replications in {self.point.size} dims"
                )
            object.__setattr__(self, "gradients", g)

    @property
    def reps(self) -> int:
        return int(self.outputs.size)


@dataclass(frozen=True)
class AggregatedObservation:
    """Summary of replications at one point: sample mean, count, noise level.

    noise_var is the variance of the *mean* (per-replication variance divided
    by reps); None marks it unknown, which happens with a single replication
    and no external noise information.
    """

    point: np.ndarray
    mean: float
    reps: int
    noise_var: float | None = None
    grad_mean: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "point", _readonly(np.atleast_1d(self.point)))
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "reps", int(self.reps))
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if self.noise_var is not None:
            nv = float(self.noise_var)
            if nv < 0:
                raise ValueError("noise_var must be nonnegative")
            object.__setattr__(self, "noise_var", nv)
        if self.grad_mean is not None:
            g = _readonly(np.atleast_1d(self.grad_mean))
            if g.shape != self.point.shape:
                raise ValueError("grad_mean must match the point dimension")
            object.__setattr__(self, "grad_mean", g)

    @property
    def dimension(self) -> int:
        return int(self.point.size)


@dataclass
class Dataset:
    """Ordered collection of aggregated observations of equal dimension."""

    observations: list[AggregatedObservation] = field(default_factory=list)

    def __post_init__(self):
        dims = {obs.dimension for obs in self.observations}
        if len(dims) > 1:
            raise ValueError(f"mixed dimensions in dataset: {sorted(dims)}")

    def __len__(self):
        return len(self.observations)

    def __iter__(self):
        return iter(self.observations)

    def __getitem__(self, i):
        return self.observations[i]

    @property
    def dimension(self) -> int:
        if not self.observations:
            raise ValueError("empty dataset has no dimension")
        return self.observations[0].dimension

    def append(self, obs: AggregatedObservation) -> None:
        if self.observations and obs.dimension != self.dimension:
            raise ValueError(
                f"observation dimension {obs.dimension} != dataset "
                f"dimension {self.dimension}"
            )
        self.observations.append(obs)

    def points(self) -> np.ndarray:
        """Design matrix, shape (n, d)."""
        return np.array([obs.point for obs in self.observations], dtype=float)

    def means(self) -> np.ndarray:
        return np.array([obs.mean for obs in self.observations], dtype=float)

    def reps(self) -> np.ndarray:
        return np.array([obs.reps for obs in self.observations], dtype=int)

    def has_unknown_noise(self) -> bool:
        return any(obs.noise_var is None for obs in self.observations)

    def noise_variances(self, floor: float | None = None) -> np.ndarray:
        """Per-observation variance of the mean.

        Unknown entries are replaced by `floor` when given; otherwise they
        raise, since downstream solvers need a full noise vector.
        """
        out = np.empty(len(self.observations))
        for i, obs in enumerate(self.observations):
            if obs.noise_var is not None:
                out[i] = obs.noise_var
            elif floor is not None:
                out[i] = float(floor)
            else:
                raise ValueError(
                    f"observation {i} has unknown noise variance; rerun with "
                    "reps >= 2 or supply a floor"
                )
        return out

    def has_gradients(self) -> bool:
        return bool(self.observations) and all(
            obs.grad_mean is not None for obs in self.observations
        )

    def grad_means(self) -> np.ndarray:
        """Gradient-mean matrix, shape (n, d)."""
        if not self.has_gradients():
            raise ValueError("not every observation carries a gradient mean")
        return np.array([obs.grad_mean for obs in self.observations], dtype=float)

    # -- delimited text round-trip ------------------------------------------

    def to_dsv(self) -> str:
        """Comma-separated text with header; floats keep full precision.

        Unknown noise variances are written as nan and read back as unknown.
        A gradient block is appended only when every row has one.
        """
        if not self.observations:
            raise ValueError("refusing to serialize an empty dataset")
        d = self.dimension
        with_grad = self.has_gradients()
        cols = [f"x_{j + 1}" for j in range(d)] + ["mean", "reps", "noise_var"]
        if with_grad:
            cols += [f"g_{j + 1}" for j in range(d)]
        buf = io.StringIO()
        buf.write(",".join(cols) + "\n")
        for obs in self.observations:
            fields = [format_float(v) for v in obs.point]
            fields.append(format_float(obs.mean))
            fields.append(str(obs.reps))
            nv = float("nan") if obs.noise_var is None else obs.noise_var
            fields.append(format_float(nv))
            if with_grad:
                fields.extend(format_float(v) for v in obs.grad_mean)
            buf.write(",".join(fields) + "\n")
        return buf.getvalue()

    @classmethod
    def from_dsv(cls, text: str) -> "Dataset":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty dataset text")
        header = [h.strip() for h in lines[0].split(",")]
        try:
            mean_idx = header.index("mean")
        except ValueError:
            raise ValueError("header must contain a 'mean' column") from None
        d = mean_idx
        expected = [f"x_{j + 1}" for j in range(d)] + ["mean", "reps", "noise_var"]
        with_grad = len(header) > len(expected)
        if with_grad:
            expected += [f"g_{j + 1}" for j in range(d)]
        if header != expected:
            raise ValueError(f"unexpected header {header}, want {expected}")
        observations = []
        for ln in lines[1:]:
            fields = ln.split(",")
            if len(fields) != len(header):
                raise ValueError(f"row has {len(fields)} fields, want {len(header)}")
            point = np.array([float(v) for v in fields[:d]])
            mean = float(fields[d])
            reps = int(fields[d + 1])
            nv_raw = float(fields[d + 2])
            noise_var = None if np.isnan(nv_raw) else nv_raw
            grad = None
            if with_grad:
                grad = np.array([float(v) for v in fields[d + 3 : 2 * d + 3]])
            observations.append(
                AggregatedObservation(point, mean, reps, noise_var, grad)
            )
        return cls(observations)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_dsv())

    @classmethod
    def load(cls, path) -> "Dataset":
        with open(path) as fh:
            return cls.from_dsv(fh.read())
