"""Serialization of fitted surrogates to the key-value text format."""

from __future__ import annotations

import numpy as np

from .. import kvdoc
from ..gp.kernels import kernel_from_doc
from .features import feature_map_from_doc
from .linear import KrrModel, LinearSurrogate


def surrogate_to_doc(model) -> dict:
    if isinstance(model, LinearSurrogate):
        return {
            "model": "linear",
            "fit_kind": model.fit_kind,
            "regularization": model.regularization,
            "features": model.features.to_doc(),
            "beta": model.beta.tolist(),
        }
    if isinstance(model, KrrModel):
        return {
            "model": "krr",
            "regularization": model.regularization,
            "kernel": model.kernel.to_doc(),
            "points": kvdoc.pack_matrix(model.points),
            "alpha": model.alpha.tolist(),
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def surrogate_from_doc(doc: dict, psi_registry: dict | None = None):
    model = doc["model"]
    if model == "linear":
        return LinearSurrogate(
            feature_map_from_doc(doc["features"], psi_registry),
            np.asarray(doc["beta"], dtype=float),
            doc["fit_kind"],
            regularization=float(doc["regularization"]),
        )
    if model == "krr":
        return KrrModel(
            kernel_from_doc(doc["kernel"]),
            kvdoc.unpack_matrix(doc["points"]),
            np.asarray(doc["alpha"], dtype=float),
            float(doc["regularization"]),
        )
    raise ValueError(f"unknown model kind {model!r}")


def save_surrogate(model, path) -> None:
    with open(path, "w") as fh:
        fh.write(kvdoc.serialize(surrogate_to_doc(model)))


def load_surrogate(path, psi_registry: dict | None = None):
    with open(path) as fh:
        return surrogate_from_doc(kvdoc.parse(fh.read()), psi_registry)
