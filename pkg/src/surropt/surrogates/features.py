"""Basis-function feature maps for linear surrogates."""

from __future__ import annotations

import abc

import numpy as np
from scipy.spatial.distance import cdist


class FeatureMap(abc.ABC):
    """Maps a d-vector x to a p-vector phi(x)."""

    @property
    @abc.abstractmethod
    def dimension(self) -> int:
        """Input dimension d."""

    @property
    @abc.abstractmethod
    def size(self) -> int:
        """Feature count p."""

    @abc.abstractmethod
    def value(self, x) -> np.ndarray:
        """phi(x), shape (p,)."""

    def matrix(self, X) -> np.ndarray:
        """Design matrix with rows phi(x_i), shape (n, p)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.value(x) for x in X])

    def jacobian(self, x) -> np.ndarray:
        """d phi / d x, shape (p, d). Subclasses with analytic forms override."""
        raise NotImplementedError(f"{type(self).__name__} provides no jacobian")

    @property
    def has_jacobian(self) -> bool:
        try:
            self.jacobian(np.zeros(self.dimension))
        except NotImplementedError:
            return False
        return True

    @abc.abstractmethod
    def names(self) -> list[str]:
        """Human-readable feature labels, length p."""

    @abc.abstractmethod
    def to_doc(self) -> dict: ...


class PolynomialFeatures(FeatureMap):
    """(1, x_1..x_d) for order 1; adds products x_j x_k with j <= k for
    order 2. The j <= k restriction keeps one column per distinct monomial,
    so p = 1 + d + d(d+1)/2 at order 2.
    """

    def __init__(self, dimension: int, order: int):
        if order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {order}")
        if dimension < 1:
            raise ValueError("dimension must be positive")
        self._d = int(dimension)
        self.order = int(order)
        self._pairs = [
            (j, k) for j in range(self._d) for k in range(j, self._d)
        ] if order == 2 else []

    @property
    def dimension(self):
        return self._d

    @property
    def size(self):
        return 1 + self._d + len(self._pairs)

    def value(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        parts = [np.ones(1), x]
        if self.order == 2:
            parts.append(np.array([x[j] * x[k] for j, k in self._pairs]))
        return np.concatenate(parts)

    def matrix(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n = X.shape[0]
        cols = [np.ones((n, 1)), X]
        if self.order == 2:
            cols.append(np.stack([X[:, j] * X[:, k] for j, k in self._pairs], axis=1))
        return np.concatenate(cols, axis=1)

    def jacobian(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        J = np.zeros((self.size, self._d))
        J[1 : 1 + self._d] = np.eye(self._d)
        for t, (j, k) in enumerate(self._pairs):
            row = 1 + self._d + t
            J[row, j] += x[k]
            J[row, k] += x[j]
        return J

    def names(self):
        out = ["1"] + [f"x{j + 1}" for j in range(self._d)]
        out += [f"x{j + 1}*x{k + 1}" for j, k in self._pairs]
        return out

    def to_doc(self):
        return {"kind": "polynomial", "dimension": self._d, "order": self.order}

    def __repr__(self):
        return f"PolynomialFeatures(dimension={self._d}, order={self.order})"


class RbfFeatures(FeatureMap):
    """Radial features phi_k(x) = g(|x - c_k|) around fixed centers.

    kind "gaussian": g(r) = exp(-r^2 / (2 eta^2)).
    kind "thin_plate": g(r) = r^2 ln r, with g(0) = 0 by continuity.
    """

    KINDS = ("gaussian", "thin_plate")

    def __init__(self, centers, kind: str = "gaussian", eta: float | None = None):
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        if centers.size == 0:
            raise ValueError("need at least one center")
        if kind not in self.KINDS:
            raise ValueError(f"kind must be one of {self.KINDS}")
        if kind == "gaussian":
            if eta is None or eta <= 0:
                raise ValueError("gaussian radial features need eta > 0")
            eta = float(eta)
        else:
            eta = None
        self.centers = centers
        self.kind = kind
        self.eta = eta

    @property
    def dimension(self):
        return self.centers.shape[1]

    @property
    def size(self):
        return self.centers.shape[0]

    def _radial(self, r2):
        if self.kind == "gaussian":
            return np.exp(-r2 / (2.0 * self.eta**2))
        # r^2 ln r = r^2 * ln(r^2) / 2; zero where r == 0
        out = np.zeros_like(r2)
        pos = r2 > 0
        out[pos] = 0.5 * r2[pos] * np.log(r2[pos])
        return out

    def value(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        r2 = np.sum((self.centers - x) ** 2, axis=1)
        return self._radial(r2)

    def matrix(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self._radial(cdist(X, self.centers, "sqeuclidean"))

    def jacobian(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        diff = x - self.centers
        r2 = np.sum(diff * diff, axis=1)
        if self.kind == "gaussian":
            scale = -self._radial(r2) / self.eta**2
        else:
            # d(r^2 ln r)/dx = (2 ln r + 1)(x - c); limit 0 at r = 0
            scale = np.zeros_like(r2)
            pos = r2 > 0
            scale[pos] = np.log(r2[pos]) + 1.0
        return scale[:, None] * diff

    def names(self):
        return [f"rbf{k + 1}" for k in range(self.size)]

    def to_doc(self):
        doc = {"kind": "rbf", "radial": self.kind, "centers": self.centers.tolist()}
        if self.eta is not None:
            doc["eta"] = self.eta
        return doc

    def __repr__(self):
        return (
            f"RbfFeatures(kind={self.kind!r}, m={self.size}, eta={self.eta!r})"
        )


class StylizedAugmentedFeatures(FeatureMap):
    """A base map with one extra trailing feature psi(x).

    The jacobian needs d psi/dx; pass psi_grad for an analytic one, else a
    central finite difference fills in.
    """

    def __init__(self, base: FeatureMap, psi, psi_grad=None, psi_name=None):
        self.base = base
        self.psi = psi
        self.psi_grad = psi_grad
        self.psi_name = psi_name

    @property
    def dimension(self):
        return self.base.dimension

    @property
    def size(self):
        return self.base.size + 1

    def value(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.append(self.base.value(x), float(self.psi(x)))

    def matrix(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        extra = np.array([float(self.psi(x)) for x in X])
        return np.column_stack([self.base.matrix(X), extra])

    def _psi_grad(self, x):
        if self.psi_grad is not None:
            return np.asarray(self.psi_grad(x), dtype=float)
        g = np.empty(x.size)
        for j in range(x.size):
            h = 1e-6 * (1.0 + abs(x[j]))
            e = np.zeros(x.size)
            e[j] = h
            g[j] = (float(self.psi(x + e)) - float(self.psi(x - e))) / (2.0 * h)
        return g

    def jacobian(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.vstack([self.base.jacobian(x), self._psi_grad(x)])

    def names(self):
        return self.base.names() + [self.psi_name or "psi"]

    def to_doc(self):
        if self.psi_name is None:
            raise ValueError(
                "augmented features built from a bare callable cannot be "
                "serialized; construct with psi_name"
            )
        return {
            "kind": "stylized_augmented",
            "base": self.base.to_doc(),
            "psi_name": self.psi_name,
        }


def polynomial_features(d: int, order: int) -> PolynomialFeatures:
    return PolynomialFeatures(d, order)


def rbf_features(centers, kind: str = "gaussian", eta: float | None = None):
    return RbfFeatures(centers, kind=kind, eta=eta)


def augment_with_stylized(
    base: FeatureMap, psi, psi_grad=None, psi_name=None
) -> StylizedAugmentedFeatures:
    return StylizedAugmentedFeatures(base, psi, psi_grad=psi_grad, psi_name=psi_name)


def feature_map_from_doc(doc: dict, psi_registry: dict | None = None) -> FeatureMap:
    kind = doc["kind"]
    if kind == "polynomial":
        return PolynomialFeatures(int(doc["dimension"]), int(doc["order"]))
    if kind == "rbf":
        return RbfFeatures(doc["centers"], kind=doc["radial"], eta=doc.get("eta"))
    if kind == "stylized_augmented":
        name = doc["psi_name"]
        if not psi_registry or name not in psi_registry:
            raise ValueError(f"no stylized function registered under {name!r}")
        return StylizedAugmentedFeatures(
            feature_map_from_doc(doc["base"], psi_registry),
            psi_registry[name],
            psi_name=name,
        )
    raise ValueError(f"unknown feature-map kind {kind!r}")
