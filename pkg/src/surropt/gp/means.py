"""Prior mean functions for GP surrogates."""

from __future__ import annotations

import abc

import numpy as np


class MeanFunction(abc.ABC):
    """Deterministic prior mean mu(x)."""

    kind: str = "mean"

    @abc.abstractmethod
    def value_at(self, x) -> float: ...

    def values(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.value_at(x) for x in X])

    @abc.abstractmethod
    def to_doc(self) -> dict: ...


class ConstantMean(MeanFunction):
    kind = "constant"

    def __init__(self, c: float = 0.0):
        self.c = float(c)

    def value_at(self, x):
        return self.c

    def values(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.full(X.shape[0], self.c)

    def to_doc(self):
        return {"kind": self.kind, "c": self.c}

    def __repr__(self):
        return f"ConstantMean({self.c!r})"


class BasisMean(MeanFunction):
    """mu(x) = beta' phi(x) for a finite feature map."""

    kind = "basis"

    def __init__(self, beta, features):
        self.beta = np.asarray(beta, dtype=float).copy()
        self.features = features
        if self.beta.shape != (features.size,):
            raise ValueError("beta length must equal the feature count")

    def value_at(self, x):
        return float(self.beta @ self.features.value(x))

    def values(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.features.matrix(X) @ self.beta

    def to_doc(self):
        return {
            "kind": self.kind,
            "beta": self.beta.tolist(),
            "features": self.features.to_doc(),
        }

    def __repr__(self):
        return f"BasisMean(beta={self.beta.tolist()}, features={self.features!r})"


class StylizedMean(MeanFunction):
    """mu(x) = scale * psi(x) for a cheap deterministic model psi."""

    kind = "stylized"

    def __init__(self, psi, scale: float = 1.0, psi_name: str | None = None):
        self.psi = psi
        self.scale = float(scale)
        self.psi_name = psi_name

    def value_at(self, x):
        return self.scale * float(self.psi(np.asarray(x, dtype=float)))

    def to_doc(self):
        if self.psi_name is None:
            raise ValueError(
                "stylized mean built from a bare callable cannot be serialized; "
                "construct it with psi_name"
            )
        return {"kind": self.kind, "scale": self.scale, "psi_name": self.psi_name}

    def __repr__(self):
        return f"StylizedMean(scale={self.scale!r}, psi_name={self.psi_name!r})"


def mean_from_doc(doc: dict, psi_registry: dict | None = None) -> MeanFunction:
    """Rebuild a mean function from its descriptor mapping.

    Stylized means resolve psi_name against psi_registry, since callables
    do not serialize.
    """
    kind = doc["kind"]
    if kind == "constant":
        return ConstantMean(doc["c"])
    if kind == "basis":
        from ..surrogates.features import feature_map_from_doc

        return BasisMean(doc["beta"], feature_map_from_doc(doc["features"]))
    if kind == "stylized":
        name = doc["psi_name"]
        if not psi_registry or name not in psi_registry:
            raise ValueError(f"no stylized function registered under {name!r}")
        return StylizedMean(psi_registry[name], doc["scale"], psi_name=name)
    raise ValueError(f"unknown mean kind {kind!r}")
