"""Empirical build-time scaling of posterior constructions."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..simcore.data import AggregatedObservation, Dataset, format_float
from ..gp.kernels import GaussianKernel
from ..gp.posterior import GpPrior, posterior
from .nystrom import nystrom_kernel_posterior, nystrom_naive_posterior
from .rff import rff_posterior, spectral_sample
from .woodbury import select_active_set

VARIANTS = ("exact", "nystrom_kernel", "nystrom_naive", "rff")


def _synthetic_dataset(n: int, d: int, rng) -> Dataset:
    X = rng.uniform(0.0, 1.0, size=(n, d))
    y = np.sin(3.0 * X[:, 0]) + 0.2 * rng.standard_normal(n)
    return Dataset(
        [AggregatedObservation(X[i], y[i], 1, 0.04) for i in range(n)]
    )


def _build(variant: str, prior: GpPrior, data: Dataset, m: int, seed: int):
    if variant == "exact":
        return posterior(prior, data)
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
    raise ValueError(f"unknown variant {variant!r}; options: {VARIANTS}")


@dataclass
class ScalingReport:
    variant: str
    m: int
    rows: list  # dicts with n, build_ms, query_ms
    slope: float

    def to_dsv(self) -> str:
        lines = ["variant,n,m,build_ms,query_ms"]
        for row in self.rows:
            lines.append(
                ",".join(
                    [
                        self.variant,
                        str(row["n"]),
                        str(self.m),
                        format_float(row["build_ms"]),
                        format_float(row["query_ms"]),
                    ]
                )
            )
        return "\n".join(lines) + "\n"


def scaling_report(
    variant: str,
    n_grid=(2000, 4000, 8000),
    m: int = 50,
    d: int = 2,
    repeats: int = 3,
    n_queries: int = 50,
    seed: int = 0,
) -> ScalingReport:
    """Time posterior construction across n and fit a log-log slope.

    Low-rank variants at fixed m should scale near-linearly in n; the exact
    posterior picks up the cubic factorization cost. Each cell reports the
    best of `repeats` runs to suppress scheduler noise.
    """
    rng = np.random.default_rng(seed)
    prior = GpPrior.with_constant_mean(GaussianKernel(1.0, 0.3), 0.0)
    rows = []
    for n in n_grid:
        data = _synthetic_dataset(int(n), d, rng)
        queries = rng.uniform(0.0, 1.0, size=(n_queries, d))
        best_build = np.inf
        best_query = np.inf
        post = None
        for _ in range(repeats):
            t0 = time.perf_counter()
            post = _build(variant, prior, data, m, seed)
            build_ms = 1e3 * (time.perf_counter() - t0)
            t0 = time.perf_counter()
            post.mean(queries)
            query_ms = 1e3 * (time.perf_counter() - t0)
            best_build = min(best_build, build_ms)
            best_query = min(best_query, query_ms)
        rows.append({"n": int(n), "build_ms": best_build, "query_ms": best_query})
    logs_n = np.log([r["n"] for r in rows])
    logs_t = np.log([max(r["build_ms"], 1e-6) for r in rows])
    slope = float(np.polyfit(logs_n, logs_t, 1)[0])
    return ScalingReport(variant=variant, m=m, rows=rows, slope=slope)
