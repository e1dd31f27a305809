"""Approximation-error comparison across low-rank posterior variants.

Builds each requested variant at each rank m on a synthetic dataset,
compares mean and variance against the exact posterior on a held-out
query grid, times construction, and emits a delimiter-separated table.
When n exceeds the exact-baseline limit the error columns stay empty and
the row is flagged, never silently imputed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ConfigError
from ..gp.posterior import GpPrior, posterior
from ..lowrank import (
    nystrom_kernel_posterior,
    nystrom_naive_posterior,
    rff_posterior,
    select_active_set,
    spectral_sample,
)
from ..simcore.box import Box
from ..simcore.data import AggregatedObservation, Dataset, format_float
from .registries import build_prior

VARIANTS = ("nystrom_naive", "nystrom_kernel", "rff")

TABLE_COLUMNS = [
    "variant",
    "m",
    "n",
    "build_seconds",
    "max_mean_err",
    "max_var_err",
    "baseline",
]


def synthetic_dataset(n: int, d: int, rng, noise_var: float = 0.01) -> Dataset:
    """Smooth multimodal target plus homoscedastic noise, for benchmarks."""
    X = rng.uniform(-1.0, 1.0, size=(n, d))
    f = np.sin(3.0 * X[:, 0])
    if d > 1:
        f = f * np.cos(2.0 * X[:, 1])
    y = f + np.sqrt(noise_var) * rng.standard_normal(n)
    return Dataset(
        [AggregatedObservation(x, float(v), 1, noise_var) for x, v in zip(X, y)]
    )


def build_variant(variant: str, prior: GpPrior, data: Dataset, m: int, seed: int):
    if variant == "nystrom_kernel":
        return nystrom_kernel_posterior(
            prior, data, select_active_set(len(data), m, seed)
        )
    if variant == "nystrom_naive":
        return nystrom_naive_posterior(
            prior, data, select_active_set(len(data), m, seed)
        )
    if variant == "rff":
        basis = spectral_sample(prior.cov, m, seed, data.dimension)
        return rff_posterior(prior, data, basis)
    raise ConfigError(f"unknown variant {variant!r}; options: {VARIANTS}")


@dataclass
class ApproxRow:
    variant: str
    m: int
    n: int
    build_seconds: float
    max_mean_err: float | None
    max_var_err: float | None
    baseline: str

    def cells(self) -> list[str]:
        return [
            self.variant,
            str(self.m),
            str(self.n),
            format_float(self.build_seconds),
            "" if self.max_mean_err is None else format_float(self.max_mean_err),
            "" if self.max_var_err is None else format_float(self.max_var_err),
            self.baseline,
        ]


@dataclass
class ApproxReport:
    rows: list[ApproxRow] = field(default_factory=list)

    def table(self) -> str:
        lines = [",".join(TABLE_COLUMNS)]
        lines += [",".join(r.cells()) for r in self.rows]
        return "\n".join(lines) + "\n"


def approx_compare(
    n: int = 300,
    d: int = 2,
    ranks=(10, 30, 100),
    variants=VARIANTS,
    prior_cfg: dict | None = None,
    noise_var: float = 0.01,
    seed: int = 0,
    queries: int = 200,
    exact_limit: int = 4000,
) -> ApproxReport:
    rng = np.random.default_rng(int(seed))
    data = synthetic_dataset(int(n), int(d), rng, noise_var=float(noise_var))
    box = Box([-1.0] * int(d), [1.0] * int(d))
    prior = build_prior(prior_cfg, box)
    grid = box.sample(rng, int(queries))

    have_baseline = int(n) <= int(exact_limit)
    if have_baseline:
        exact = posterior(prior, data)
        mean0 = exact.mean(grid)
        var0 = exact.var(grid)

    report = ApproxReport()
    for variant in variants:
        if variant not in VARIANTS:
            raise ConfigError(f"unknown variant {variant!r}; options: {VARIANTS}")
        for m in ranks:
            m = int(m)
            if m > int(n):
                raise ConfigError(f"rank m={m} exceeds n={n}")
            t0 = time.perf_counter()
            approx = build_variant(variant, prior, data, m, int(seed))
            build_seconds = time.perf_counter() - t0
            if have_baseline:
                mean_err = float(np.max(np.abs(approx.mean(grid) - mean0)))
                var_err = float(
                    np.max(np.abs(np.array([approx.var_at(x) for x in grid]) - var0))
                )
                row = ApproxRow(variant, m, int(n), build_seconds,
                                mean_err, var_err, "ok")
            else:
                row = ApproxRow(variant, m, int(n), build_seconds,
                                None, None, "skipped")
            report.rows.append(row)
    return report


def approx_compare_from_doc(doc: dict) -> ApproxReport:
    known = {
        "n", "d", "ranks", "variants", "prior", "noise_var", "seed",
        "queries", "exact_limit",
    }
    for key in doc:
        if key not in known:
            raise ConfigError(f"unknown configuration key {key!r}")
    ranks = doc.get("ranks", [10, 30, 100])
    if isinstance(ranks, (int, float)):
        ranks = [int(ranks)]
    variants = doc.get("variants", list(VARIANTS))
    if isinstance(variants, str):
        variants = [variants]
    return approx_compare(
        n=int(doc.get("n", 300)),
        d=int(doc.get("d", 2)),
        ranks=[int(m) for m in ranks],
        variants=[str(v) for v in variants],
        prior_cfg=doc.get("prior"),
        noise_var=float(doc.get("noise_var", 0.01)),
        seed=int(doc.get("seed", 0)),
        queries=int(doc.get("queries", 200)),
        exact_limit=int(doc.get("exact_limit", 4000)),
    )
