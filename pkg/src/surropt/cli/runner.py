"""Seeded experiment execution and on-disk result bundles.

Each (algorithm, seed) cell runs independently, so cells execute on a
thread pool and write their own trace files; a cell failure never
discards completed cells, it only flips the batch exit status.
"""

from __future__ import annotations

import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..simcore.data import format_float
from .config import ExperimentSpec
from .registries import build_model, run_algorithm

SUMMARY_COLUMNS = [
    "seed",
    "model",
    "algorithm",
    "budget",
    "replications",
    "recommendation",
    "estimate",
    "optimality_gap",
    "truncated",
    "converged",
    "error",
]


@dataclass
class CellResult:
    seed: int
    trace: object | None = None
    gap: float | None = None
    error: str | None = None
    seconds: float = 0.0


@dataclass
class ResultBundle:
    """Everything one experiment run produced, plus where it lives."""

    spec: ExperimentSpec
    spec_hash: str
    directory: Path
    cells: list[CellResult] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return any(c.error is not None for c in self.cells)

    def summary_rows(self) -> list[list[str]]:
        rows = []
        for c in sorted(self.cells, key=lambda c: c.seed):
            if c.trace is not None:
                rec = "|".join(format_float(v) for v in c.trace.recommendation)
                est = format_float(c.trace.recommendation_estimate)
                reps = str(c.trace.total_replications())
                trunc = "true" if c.trace.truncated else "false"
                conv = "true" if c.trace.converged else "false"
            else:
                rec = est = reps = trunc = conv = ""
            rows.append(
                [
                    str(c.seed),
                    self.spec.model_id,
                    self.spec.algorithm_id,
                    str(self.spec.budget),
                    reps,
                    rec,
                    est,
                    "" if c.gap is None else format_float(c.gap),
                    trunc,
                    conv,
                    c.error or "",
                ]
            )
        return rows

    def summary_table(self) -> str:
        lines = [",".join(SUMMARY_COLUMNS)]
        lines += [",".join(row) for row in self.summary_rows()]
        return "\n".join(lines) + "\n"


def _run_cell(spec: ExperimentSpec, seed: int, traces_dir: Path) -> CellResult:
    t0 = time.perf_counter()
    cell = CellResult(seed=seed)
    try:
        model = build_model(spec.model_id, spec.model_params)
        trace = run_algorithm(
            spec.algorithm_id, model, spec.prior, spec.budget, seed,
            spec.algorithm_config,
        )
        cell.trace = trace
        argmax = getattr(model, "known_argmax", None)
        if argmax is not None and trace.recommendation is not None:
            cell.gap = float(np.linalg.norm(trace.recommendation - argmax))
        path = traces_dir / f"seed-{seed}.csv"
        with open(path, "w") as fh:
            fh.write(trace.to_dsv(include_elapsed=False))
    except Exception:
        cell.error = traceback.format_exc(limit=3).strip().splitlines()[-1]
    cell.seconds = time.perf_counter() - t0
    return cell


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> ResultBundle:
    """Run all seeds, write spec/traces/summary under the spec-hash dir."""
    spec.validate()
    spec_hash = spec.spec_hash()
    directory = Path(spec.out_dir) / spec_hash
    traces_dir = directory / "traces"
    traces_dir.mkdir(parents=True, exist_ok=True)
    (directory / "spec").write_text(spec.canonical())

    bundle = ResultBundle(spec=spec, spec_hash=spec_hash, directory=directory)
    workers = max(1, int(workers))
    if workers == 1:
        for seed in spec.seeds:
            bundle.cells.append(_run_cell(spec, seed, traces_dir))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_cell, spec, seed, traces_dir)
                for seed in spec.seeds
            ]
            bundle.cells = [f.result() for f in futures]

    (directory / "summary.csv").write_text(bundle.summary_table())
    return bundle
