"""Random cosine features: spectral sampling, kernel estimation, posterior."""

from __future__ import annotations

import numpy as np

from ..exceptions import CapabilityError
from ..linalg import cholesky_factor
from ..simcore.data import Dataset
from ..gp.kernels import GaussianKernel, MaternKernel, kernel_from_doc
from ..gp.posterior import GpPrior
from .guard import guard
from .nystrom import ApproxPosterior, _noise_vector


class RffBasis:
    """m random cosine features approximating a stationary kernel.

    Feature t is sqrt(2 k0 / m) * cos(omega_t' x + b_t) with omega drawn
    from the kernel's spectral measure, b uniform on (0, 2 pi), and
    k0 = K(0, 0).
    """

    def __init__(self, omegas, phases, k0: float, kernel_doc=None, seed=None):
        self.omegas = np.atleast_2d(np.asarray(omegas, dtype=float))
        self.phases = np.atleast_1d(np.asarray(phases, dtype=float))
        if self.phases.shape != (self.omegas.shape[0],):
            raise ValueError("need one phase per frequency row")
        if np.any(self.phases <= 0) or np.any(self.phases >= 2 * np.pi):
            raise ValueError("phases must lie strictly inside (0, 2 pi)")
        if k0 <= 0:
            raise ValueError("k0 must be positive")
        self.k0 = float(k0)
        self.kernel_doc = kernel_doc
        self.seed = seed

    @property
    def m(self) -> int:
        return self.omegas.shape[0]

    @property
    def dimension(self) -> int:
        return self.omegas.shape[1]

    def feature(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.sqrt(2.0 * self.k0 / self.m) * np.cos(
            self.omegas @ x + self.phases
        )

    def feature_matrix(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return guard(
            np.sqrt(2.0 * self.k0 / self.m)
            * np.cos(X @ self.omegas.T + self.phases[None, :])
        )

    def to_doc(self) -> dict:
        """Compact descriptor: the basis regenerates from (kernel, m, seed)."""
        if self.kernel_doc is None or self.seed is None:
            raise ValueError(
                "basis was built from raw samples; only seeded bases serialize"
            )
        return {
            "kind": "rff_basis",
            "m": self.m,
            "dimension": self.dimension,
            "seed": int(self.seed),
            "kernel": self.kernel_doc,
        }

    @staticmethod
    def from_doc(doc: dict) -> "RffBasis":
        kernel = kernel_from_doc(doc["kernel"])
        return spectral_sample(
            kernel, int(doc["m"]), int(doc["seed"]), int(doc["dimension"])
        )


def spectral_sample(kernel, m: int, rng, dimension: int) -> RffBasis:
    """Draw an m-feature basis from the kernel's spectral measure.

    Gaussian kernel: omega ~ normal(0, eta^{-2} I). Matern(nu): omega from
    the multivariate Student-t with 2 nu degrees of freedom and scale 1/eta,
    realized as normal draws scaled by sqrt(2 nu / chi2_{2 nu}).
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if dimension < 1:
        raise ValueError("dimension must be at least 1")
    seed = rng if isinstance(rng, (int, np.integer)) else None
    if seed is not None:
        rng = np.random.default_rng(int(seed))
    if isinstance(kernel, GaussianKernel):
        omegas = rng.standard_normal((m, dimension)) / kernel.eta
    elif isinstance(kernel, MaternKernel):
        z = rng.standard_normal((m, dimension)) / kernel.eta
        u = rng.chisquare(2.0 * kernel.nu, size=m)
        omegas = z * np.sqrt(2.0 * kernel.nu / u)[:, None]
    else:
        raise CapabilityError(
            f"kernel kind {getattr(kernel, 'kind', type(kernel).__name__)!r} "
            "is not stationary; no spectral measure exists"
        )
    phases = rng.uniform(0.0, 2.0 * np.pi, size=m)
    # endpoints have probability zero but the invariant is strict
    phases = np.clip(phases, np.nextafter(0.0, 1.0), np.nextafter(2 * np.pi, 0.0))
    return RffBasis(
        omegas,
        phases,
        k0=kernel.tau**2,
        kernel_doc=kernel.to_doc(),
        seed=seed,
    )


def rff_kernel_estimate(basis: RffBasis, x, x2) -> float:
    """phi_m(x)' phi_m(x'), the Monte Carlo estimate of K(x, x')."""
    return float(basis.feature(x) @ basis.feature(x2))


class RffPosterior(ApproxPosterior):
    """GP posterior with the kernel replaced by the cosine-feature estimate.

    mean(x) = mu(x) + phi(x)' (I + Phi' Sigma^{-1} Phi)^{-1} Phi' Sigma^{-1} (y - mu)
    cov(x,x') = K(x,x') - phi(x)' (I + Phi' Sigma^{-1} Phi)^{-1} phi(x')
    The leading covariance term keeps the ORIGINAL kernel, so the raw
    variance can dip below zero when the feature estimate overshoots; such
    values clamp to zero with a flag rather than raising.
    """

    variant = "rff"

    def __init__(self, prior: GpPrior, data: Dataset, basis: RffBasis):
        self.prior = prior
        self.basis = basis
        X = data.points()
        sigma = _noise_vector(data)
        resid = data.means() - prior.mean.values(X)
        Phi = basis.feature_matrix(X)
        inner = np.eye(basis.m) + Phi.T @ guard(Phi / sigma[:, None])
        self._factor = cholesky_factor(inner)
        self._weights = self._factor.solve(Phi.T @ (resid / sigma))
        self._n = len(data)
        self.negative_variance_clamped = False
        self.min_raw_variance = np.inf

    @property
    def n(self):
        return self._n

    @property
    def m(self):
        return self.basis.m

    def mean_at(self, x) -> float:
        return float(
            self.prior.mean.value_at(x) + self.basis.feature(x) @ self._weights
        )

    def cov_at(self, x, x2) -> float:
        f = self.basis.feature(x)
        f2 = f if x2 is x else self.basis.feature(x2)
        return float(self.prior.cov(x, x2) - f @ self._factor.solve(f2))

    def var_at(self, x) -> float:
        raw = self.cov_at(x, x)
        if raw < self.min_raw_variance:
            self.min_raw_variance = raw
        if raw < 0:
            tol = 1e-8 * max(float(self.prior.cov(x, x)), np.finfo(float).tiny)
            if raw < -tol:
                self.negative_variance_clamped = True
            return 0.0
        return raw

    def mean(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.prior.mean.values(X) + self.basis.feature_matrix(X) @ self._weights


def rff_posterior(prior: GpPrior, data: Dataset, basis: RffBasis) -> RffPosterior:
    return RffPosterior(prior, data, basis)


def choose_feature_count(
    prior: GpPrior,
    data: Dataset,
    rng,
    start_m: int = 64,
    max_m: int = 8192,
    threshold: float = 0.01,
    holdout_fraction: float = 0.2,
) -> dict:
    """Double m until held-out prediction error stops improving.

    Splits the dataset, fits the cosine-feature posterior on the larger
    part, and grows m geometrically until the relative drop in held-out
    root-mean-square error falls below the threshold (default 1%).
    Returns the chosen m and the error path.
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    n = len(data)
    if n < 5:
        raise ValueError("need at least 5 observations to hold some out")
    n_hold = max(1, int(round(holdout_fraction * n)))
    perm = rng.permutation(n)
    hold_idx = set(perm[:n_hold].tolist())
    train = Dataset([data[i] for i in range(n) if i not in hold_idx])
    hold = Dataset([data[i] for i in range(n) if i in hold_idx])
    hold_X = hold.points()
    hold_y = hold.means()

    path = []
    m = int(start_m)
    prev_err = None
    chosen = m
    while m <= max_m:
        basis = spectral_sample(
            prior.cov, m, int(rng.integers(2**31 - 1)), data.dimension
        )
        post = rff_posterior(prior, train, basis)
        err = float(np.sqrt(np.mean((post.mean(hold_X) - hold_y) ** 2)))
        path.append({"m": m, "holdout_rmse": err})
        chosen = m
        if prev_err is not None:
            improvement = (prev_err - err) / max(prev_err, np.finfo(float).tiny)
            if improvement < threshold:
                break
        prev_err = err
        m *= 2
    return {"m": chosen, "path": path}
