"""Descriptor round-trips for priors and hyperparameters."""

from __future__ import annotations

from .. import kvdoc
from .kernels import Kernel, kernel_from_doc
from .means import MeanFunction, mean_from_doc
from .posterior import GpPrior


def prior_to_doc(prior: GpPrior) -> dict:
    return {"mean": prior.mean.to_doc(), "cov": prior.cov.to_doc()}


def prior_from_doc(doc: dict, psi_registry: dict | None = None) -> GpPrior:
    return GpPrior(
        mean_from_doc(doc["mean"], psi_registry=psi_registry),
        kernel_from_doc(doc["cov"]),
    )


def serialize_prior(prior: GpPrior) -> str:
    return kvdoc.serialize(prior_to_doc(prior))


def deserialize_prior(text: str, psi_registry: dict | None = None) -> GpPrior:
    return prior_from_doc(kvdoc.parse(text), psi_registry=psi_registry)


__all__ = [
    "Kernel",
    "MeanFunction",
    "deserialize_prior",
    "prior_from_doc",
    "prior_to_doc",
    "serialize_prior",
]
