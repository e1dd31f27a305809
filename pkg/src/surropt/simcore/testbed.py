"""Benchmark models with known structure: quadratics, ripple surfaces, queues."""

from __future__ import annotations

import numpy as np

from .box import Box
from .models import SimulationModel
from .queueing import mean_length_of_stay, simulate_tandem_sojourn


class ConcaveQuadraticModel(SimulationModel):
    """f(x) = peak - sum_j curv_j (x_j - center_j)^2 plus Gaussian noise.

    Unique global maximum at `center` with value `peak`. Gradient
    estimates are available; when noise_cov is given it is the joint
    covariance of the (output, gradient) noise vector, otherwise the output
    noise is independent N(0, noise_sd^2) and gradients are exact.
    """

    def __init__(
        self,
        center,
        curvatures,
        box: Box,
        peak: float = 0.0,
        noise_sd: float = 1.0,
        noise_cov: np.ndarray | None = None,
        name: str | None = None,
    ):
        self._center = np.asarray(center, dtype=float)
        self._curv = np.broadcast_to(
            np.asarray(curvatures, dtype=float), self._center.shape
        ).copy()
        if np.any(self._curv <= 0):
            raise ValueError("curvatures must be positive for a concave surface")
        self._box = box
        if box.dimension != self._center.size:
            raise ValueError("center dimension must match the box")
        if not box.contains(self._center):
            raise ValueError("the maximum must lie inside the box")
        self._peak = float(peak)
        self._noise_sd = float(noise_sd)
        if noise_cov is not None:
            noise_cov = np.asarray(noise_cov, dtype=float)
            d = self._center.size
            if noise_cov.shape != (d + 1, d + 1):
                raise ValueError("noise_cov must be (d+1) x (d+1)")
            # cholesky of the joint noise covariance, done once
            self._noise_chol = np.linalg.cholesky(
                noise_cov + 1e-12 * np.eye(d + 1)
            )
            self._noise_sd = float(np.sqrt(noise_cov[0, 0]))
        else:
            self._noise_chol = None
        self.name = name or f"quadratic-{self._center.size}d"

    @property
    def box(self) -> Box:
        return self._box

    def _f(self, x):
        delta = x - self._center
        return self._peak - float(self._curv @ (delta * delta))

    def _grad(self, x):
        return -2.0 * self._curv * (x - self._center)

    def evaluate(self, point, rng):
        x = np.asarray(point, dtype=float)
        return self._f(x) + self._noise_sd * rng.standard_normal()

    @property
    def has_gradients(self) -> bool:
        return True

    def evaluate_with_gradient(self, point, rng):
        x = np.asarray(point, dtype=float)
        if self._noise_chol is not None:
            w = self._noise_chol @ rng.standard_normal(self._center.size + 1)
            return self._f(x) + w[0], self._grad(x) + w[1:]
        return self._f(x) + self._noise_sd * rng.standard_normal(), self._grad(x)

    def noise_var(self, point):
        return self._noise_sd**2

    def noise_covariance(self) -> np.ndarray:
        """Joint (output, gradient) noise covariance per replication."""
        if self._noise_chol is not None:
            return self._noise_chol @ self._noise_chol.T
        cov = np.zeros((self._center.size + 1, self._center.size + 1))
        cov[0, 0] = self._noise_sd**2
        return cov

    def true_value(self, point):
        return self._f(np.asarray(point, dtype=float))

    def true_gradient(self, point):
        return self._grad(np.asarray(point, dtype=float))

    @property
    def known_argmax(self):
        return self._center.copy()

    @property
    def known_max(self):
        return self._peak


class RippleModel(SimulationModel):
    """Separable multimodal surface with an exactly known global maximum.

    f(x) = amp * sum_j cos(2 pi freq (x_j - center_j)) - curv * |x - center|^2

    The cosine term peaks at 1 in every coordinate exactly at center, where
    the quadratic penalty also vanishes, so the global maximum is
    d * amp at center; the other cosine crests are pulled strictly below it
    by the penalty, leaving a grid of local maxima roughly 1/freq apart.
    """

    def __init__(
        self,
        center,
        box: Box,
        amp: float = 1.0,
        freq: float = 2.0,
        curv: float = 0.5,
        noise_sd: float = 0.5,
        name: str | None = None,
    ):
        self._center = np.asarray(center, dtype=float)
        self._box = box
        if box.dimension != self._center.size:
            raise ValueError("center dimension must match the box")
        if not box.contains(self._center):
            raise ValueError("the maximum must lie inside the box")
        if amp <= 0 or freq <= 0 or curv <= 0:
            raise ValueError("amp, freq, curv must be positive")
        self._amp = float(amp)
        self._freq = float(freq)
        self._curv = float(curv)
        self._noise_sd = float(noise_sd)
        self.name = name or f"ripple-{self._center.size}d"

    @property
    def box(self) -> Box:
        return self._box

    def _f(self, x):
        delta = x - self._center
        ripple = self._amp * np.cos(2.0 * np.pi * self._freq * delta).sum()
        return float(ripple - self._curv * (delta @ delta))

    def _grad(self, x):
        delta = x - self._center
        w = 2.0 * np.pi * self._freq
        return -self._amp * w * np.sin(w * delta) - 2.0 * self._curv * delta

    def evaluate(self, point, rng):
        x = np.asarray(point, dtype=float)
        return self._f(x) + self._noise_sd * rng.standard_normal()

    @property
    def has_gradients(self) -> bool:
        return True

    def evaluate_with_gradient(self, point, rng):
        x = np.asarray(point, dtype=float)
        return self._f(x) + self._noise_sd * rng.standard_normal(), self._grad(x)

    def noise_var(self, point):
        return self._noise_sd**2

    def true_value(self, point):
        return self._f(np.asarray(point, dtype=float))

    def true_gradient(self, point):
        return self._grad(np.asarray(point, dtype=float))

    @property
    def known_argmax(self):
        return self._center.copy()

    @property
    def known_max(self):
        return self._center.size * self._amp


class TandemQueueModel(SimulationModel):
    """Service-rate design for a tandem queue, maximizing negative sojourn.

    Decision variables are per-station service rates. Each replication
    simulates the network and returns minus the mean sojourn, so larger is
    better and the maximize-everywhere convention holds. A stylized
    approximation treats stations as independent M/M/c queues, which is
    exact (in steady state) when buffers are unbounded and a motivated guess
    when they are not.
    """

    def __init__(
        self,
        arrival_rate: float = 0.5,
        servers=(1, 1),
        capacity=None,
        rate_bounds=(0.7, 3.0),
        n_arrivals: int = 4000,
        warmup_fraction: float = 0.2,
        name: str = "tandem-queue",
    ):
        self._lam = float(arrival_rate)
        self._servers = [int(s) for s in servers]
        J = len(self._servers)
        self._capacity = list(capacity) if capacity is not None else [None] * J
        lo, hi = float(rate_bounds[0]), float(rate_bounds[1])
        for c in self._servers:
            if lo * c <= self._lam:
                raise ValueError(
                    "lower rate bound must keep every station stable"
                )
        self._box = Box([lo] * J, [hi] * J)
        self._n_arrivals = int(n_arrivals)
        self._warmup = int(warmup_fraction * self._n_arrivals)
        self.name = name

    @property
    def box(self) -> Box:
        return self._box

    @property
    def arrival_rate(self) -> float:
        return self._lam

    def evaluate(self, point, rng):
        x = np.asarray(point, dtype=float)
        mean_stay = simulate_tandem_sojourn(
            self._lam,
            x,
            self._servers,
            capacity=self._capacity,
            n_arrivals=self._n_arrivals,
            rng=rng,
            warmup=self._warmup,
        )
        return -mean_stay

    @property
    def has_stylized(self) -> bool:
        return True

    def stylized(self, point):
        x = np.asarray(point, dtype=float)
        total = sum(
            mean_length_of_stay(self._lam, x[j], self._servers[j])
            for j in range(len(self._servers))
        )
        return -total


def testbed_catalog() -> dict[str, SimulationModel]:
    """Default instances of every benchmark model, keyed by name."""
    q2 = ConcaveQuadraticModel(
        center=[0.4, -0.2],
        curvatures=[1.0, 2.0],
        box=Box([-1.0, -1.0], [1.0, 1.0]),
        peak=1.0,
        noise_sd=0.5,
    )
    q5 = ConcaveQuadraticModel(
        center=[0.3, -0.3, 0.0, 0.5, -0.5],
        curvatures=[1.0, 1.5, 2.0, 0.8, 1.2],
        box=Box([-1.0] * 5, [1.0] * 5),
        peak=2.0,
        noise_sd=0.5,
        name="quadratic-5d",
    )
    r1 = RippleModel(
        center=[0.31],
        box=Box([-1.0], [1.0]),
        amp=1.0,
        freq=2.0,
        curv=0.8,
        noise_sd=0.3,
    )
    r2 = RippleModel(
        center=[0.31, -0.17],
        box=Box([-1.0, -1.0], [1.0, 1.0]),
        amp=1.0,
        freq=1.5,
        curv=0.8,
        noise_sd=0.3,
    )
    tq = TandemQueueModel()
    return {m.name: m for m in (q2, q5, r1, r2, tq)}
