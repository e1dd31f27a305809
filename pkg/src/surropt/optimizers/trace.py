"""Budget accounting and per-iteration run records shared by all optimizers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import BudgetError
from ..simcore.data import format_float


class Budget:
    """Counts simulation replications against a hard cap.

    Every replication costs exactly 1; spend refuses to overdraw, so the
    consumed count can never exceed max_evaluations.
    """

    def __init__(self, max_evaluations: int):
        max_evaluations = int(max_evaluations)
        if max_evaluations < 1:
            raise ValueError("max_evaluations must be positive")
        self.max_evaluations = max_evaluations
        self.consumed = 0

    @property
    def remaining(self) -> int:
        return self.max_evaluations - self.consumed

    def can_afford(self, reps: int) -> bool:
        return reps <= self.remaining

    def spend(self, reps: int) -> None:
        reps = int(reps)
        if reps < 0:
            raise ValueError("cannot spend a negative number of replications")
        if reps > self.remaining:
            raise BudgetError(
                f"requested {reps} replications with only {self.remaining} "
                f"of {self.max_evaluations} left"
            )
        self.consumed += reps

    def __repr__(self):
        return f"Budget(consumed={self.consumed}, max={self.max_evaluations})"


@dataclass(frozen=True)
class TraceRecord:
    """One sampled point: where, how many replications, and the incumbent
    (current best guess and its estimate) right after the sample."""

    iteration: int
    point: np.ndarray
    reps: int
    incumbent: np.ndarray
    incumbent_estimate: float
    criterion: float
    elapsed_ms: float

    def __post_init__(self):
        object.__setattr__(
            self, "point", np.atleast_1d(np.asarray(self.point, dtype=float))
        )
        object.__setattr__(
            self, "incumbent", np.atleast_1d(np.asarray(self.incumbent, dtype=float))
        )


@dataclass
class OptimizationTrace:
    """Ordered run records plus the final recommendation.

    Total replications are reconstructable as the sum of the reps column,
    which equals the budget the run consumed.
    """

    dimension: int
    records: list[TraceRecord] = field(default_factory=list)
    recommendation: np.ndarray | None = None
    recommendation_estimate: float | None = None
    truncated: bool = False
    converged: bool = False

    def append(self, record: TraceRecord) -> None:
        if record.point.size != self.dimension:
            raise ValueError("record dimension does not match trace dimension")
        if self.records and record.iteration < self.records[-1].iteration:
            raise ValueError("iteration index must be nondecreasing")
        self.records.append(record)

    def total_replications(self) -> int:
        return int(sum(r.reps for r in self.records))

    def incumbents(self) -> np.ndarray:
        return np.array([r.incumbent for r in self.records])

    def header(self, include_elapsed: bool = True) -> list[str]:
        d = self.dimension
        cols = (
            ["iter"]
            + [f"x_{j + 1}" for j in range(d)]
            + ["reps"]
            + [f"incumbent_{j + 1}" for j in range(d)]
            + ["incumbent_est", "criterion"]
        )
        if include_elapsed:
            cols.append("elapsed_ms")
        return cols

    def to_dsv(self, include_elapsed: bool = True) -> str:
        """Render as a delimiter-separated table; wall-clock timings are
        dropped when include_elapsed is false, making reruns byte-identical."""
        lines = [",".join(self.header(include_elapsed))]
        for r in self.records:
            cells = (
                [str(r.iteration)]
                + [format_float(v) for v in r.point]
                + [str(r.reps)]
                + [format_float(v) for v in r.incumbent]
                + [
                    format_float(r.incumbent_estimate),
                    format_float(r.criterion),
                ]
            )
            if include_elapsed:
                cells.append(format_float(r.elapsed_ms))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dsv(cls, text: str) -> "OptimizationTrace":
        lines = [ln for ln in text.strip().splitlines() if ln]
        header = lines[0].split(",")
        d = sum(1 for h in header if h.startswith("x_"))
        has_elapsed = header[-1] == "elapsed_ms"
        trace = cls(dimension=d)
        for ln in lines[1:]:
            cells = ln.split(",")
            it = int(cells[0])
            point = np.array([float(c) for c in cells[1 : 1 + d]])
            reps = int(cells[1 + d])
            inc = np.array([float(c) for c in cells[2 + d : 2 + 2 * d]])
            rest = [float(c) for c in cells[2 + 2 * d :]]
            ms = rest[2] if has_elapsed else 0.0
            trace.append(TraceRecord(it, point, reps, inc, rest[0], rest[1], ms))
        if trace.records:
            last = trace.records[-1]
            trace.recommendation = last.incumbent
            trace.recommendation_estimate = last.incumbent_estimate
        return trace

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_dsv())

    @classmethod
    def load(cls, path) -> "OptimizationTrace":
        with open(path) as fh:
            return cls.from_dsv(fh.read())
