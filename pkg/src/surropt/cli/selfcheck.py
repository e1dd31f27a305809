"""Fast invariant battery wiring the core identities end to end.

Each check builds a small random instance and verifies an exact identity:
ridge regression against kernel ridge with the inner-product kernel, the
rank-one posterior update against a full refit, the low-rank linear solve
against a dense solve, the rank-n subset approximation against the exact
posterior, and the random-feature cosine identity against its matched
Monte Carlo form. `inject` perturbs one named check to prove the battery
can fail; it exists for negative-control tests only.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..gp.kernels import GaussianKernel, InnerProductKernel
from ..gp.means import ConstantMean
from ..gp.posterior import GpPrior, kg_update, posterior
from ..lowrank import (
    nystrom_naive_posterior,
    select_active_set,
    spectral_sample,
    woodbury_solve,
)
from ..simcore.data import AggregatedObservation, Dataset
from ..surrogates.features import polynomial_features
from ..surrogates.linear import fit_rls, krr_predict

CHECK_NAMES = (
    "ridge_vs_kernel_ridge",
    "rank_one_update_vs_refit",
    "lowrank_solve_vs_dense",
    "subset_full_rank_vs_exact",
    "cosine_identity",
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _dataset(rng, n=20, d=2, noise=0.05) -> Dataset:
    X = rng.uniform(-1, 1, size=(n, d))
    y = np.sin(2 * X[:, 0]) + 0.5 * X[:, 1] + noise * rng.standard_normal(n)
    return Dataset(
        [AggregatedObservation(x, float(v), 1, noise**2) for x, v in zip(X, y)]
    )


def _check_ridge_vs_krr(rng, bump: float) -> tuple[bool, str]:
    data = _dataset(rng, n=18, d=2)
    feats = polynomial_features(2, 2)
    lam = 0.1
    ridge = fit_rls(feats, data, lam)
    queries = rng.uniform(-1, 1, size=(40, 2))
    kernel = InnerProductKernel(feats)
    errs = [
        abs(ridge.predict_one(x) + bump - krr_predict(kernel, data, lam, x))
        for x in queries
    ]
    worst = max(errs)
    return worst < 1e-7, f"max |ridge - krr| = {worst:.3e}"


def _check_kg_update(rng, bump: float) -> tuple[bool, str]:
    data = _dataset(rng, n=15, d=2)
    prior = GpPrior(ConstantMean(0.0), GaussianKernel(tau=1.0, eta=0.4))
    post = posterior(prior, data)
    x_next = rng.uniform(-1, 1, size=2)
    y_next = float(rng.normal())
    noise_var = 0.05**2
    updated = kg_update(post, x_next, y_next + bump, noise_var)
    refit = posterior(
        prior,
        Dataset(
            list(data.observations)
            + [AggregatedObservation(x_next, y_next, 1, noise_var)]
        ),
    )
    queries = rng.uniform(-1, 1, size=(20, 2))
    worst = max(abs(updated.mean_at(x) - refit.mean_at(x)) for x in queries)
    return worst < 1e-7, f"max |update - refit| = {worst:.3e}"


def _check_woodbury(rng, bump: float) -> tuple[bool, str]:
    n, m = 40, 6
    U = rng.standard_normal((n, m))
    C = np.eye(m) + 0.1 * rng.standard_normal((m, m))
    C = C @ C.T
    sigma = rng.uniform(0.5, 2.0, size=n)
    b = rng.standard_normal(n)
    z = woodbury_solve(sigma, U, C, U.T, b)
    dense = np.linalg.solve(U @ C @ U.T + np.diag(sigma), b) + bump
    worst = float(np.max(np.abs(z - dense)))
    return worst < 1e-8, f"max |lowrank - dense| = {worst:.3e}"


def _check_subset_full_rank(rng, bump: float) -> tuple[bool, str]:
    data = _dataset(rng, n=25, d=2)
    prior = GpPrior(ConstantMean(0.0), GaussianKernel(tau=1.0, eta=0.5))
    exact = posterior(prior, data)
    approx = nystrom_naive_posterior(
        prior, data, select_active_set(len(data), len(data), 3)
    )
    queries = rng.uniform(-1, 1, size=(30, 2))
    worst = max(
        max(
            abs(approx.mean_at(x) + bump - exact.mean_at(x)),
            abs(approx.var_at(x) - exact.var_at(x)),
        )
        for x in queries
    )
    return worst < 1e-6, f"max |subset(m=n) - exact| = {worst:.3e}"


def _check_cosine_identity(rng, bump: float) -> tuple[bool, str]:
    kernel = GaussianKernel(tau=1.0, eta=1.0)
    basis = spectral_sample(kernel, 20_000, rng, 2)
    x = rng.uniform(-1, 1, size=2)
    x2 = rng.uniform(-1, 1, size=2)
    direct = np.cos(basis.omegas @ (x - x2))
    matched = 2.0 * np.cos(basis.omegas @ x + basis.phases) * np.cos(
        basis.omegas @ x2 + basis.phases
    )
    diff = direct - matched
    se = float(np.std(diff, ddof=1) / np.sqrt(diff.size))
    gap = abs(float(np.mean(diff))) + bump
    return gap <= 3.0 * se, f"|mean diff| = {gap:.3e} vs 3 se = {3 * se:.3e}"


_CHECKS = {
    "ridge_vs_kernel_ridge": _check_ridge_vs_krr,
    "rank_one_update_vs_refit": _check_kg_update,
    "lowrank_solve_vs_dense": _check_woodbury,
    "subset_full_rank_vs_exact": _check_subset_full_rank,
    "cosine_identity": _check_cosine_identity,
}

# Injected fault per check, sized to clear that check's own tolerance.
_FAULT_SIZES = {
    "ridge_vs_kernel_ridge": 1e-3,
    "rank_one_update_vs_refit": 1e-3,
    "lowrank_solve_vs_dense": 1e-3,
    "subset_full_rank_vs_exact": 1e-3,
    "cosine_identity": 0.25,
}


def run_selfcheck(seed: int = 0, inject: str | None = None) -> list[CheckResult]:
    """Run the battery; `inject` forces the named check to fail."""
    if inject is not None and inject not in _CHECKS:
        raise ValueError(f"unknown check {inject!r}; options: {CHECK_NAMES}")
    results = []
    for name in CHECK_NAMES:
        rng = np.random.default_rng(int(seed))
        bump = _FAULT_SIZES[name] if inject == name else 0.0
        t0 = time.perf_counter()
        passed, detail = _CHECKS[name](rng, bump)
        results.append(CheckResult(name, passed, detail, time.perf_counter() - t0))
    return results


def format_report(results: list[CheckResult]) -> str:
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"[{status}] {r.name}: {r.detail} ({r.seconds:.2f}s)")
    total = sum(r.seconds for r in results)
    ok = sum(r.passed for r in results)
    lines.append(f"{ok}/{len(results)} checks passed in {total:.2f}s")
    return "\n".join(lines)
