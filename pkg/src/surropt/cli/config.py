"""Experiment configuration: parsing, validation, canonical form, hashing.

A config is a key-value document (see kvdoc) with sections `model`,
`algorithm`, `prior`, plus `budget` and `seeds`. The experiment hash is
the SHA-256 of the canonical serialization, so identical configurations
land in the same output directory and reruns are comparable byte for
byte.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .. import kvdoc
from ..exceptions import ConfigError
from .registries import ALGORITHM_RUNNERS, MODEL_FACTORIES

SEQUENTIAL_ALGORITHMS = ("kg_discrete", "kg_saa", "ucb", "gps")


@dataclass
class ExperimentSpec:
    """Everything needed to reproduce one experiment battery."""

    model_id: str
    model_params: dict = field(default_factory=dict)
    algorithm_id: str = "ucb"
    algorithm_config: dict = field(default_factory=dict)
    prior: dict = field(default_factory=dict)
    budget: int = 100
    seeds: list[int] = field(default_factory=lambda: [0])
    out_dir: str = "results"

    def validate(self) -> None:
        if self.model_id not in MODEL_FACTORIES:
            raise ConfigError(f"unknown model id {self.model_id!r}")
        if self.algorithm_id not in ALGORITHM_RUNNERS:
            raise ConfigError(f"unknown algorithm id {self.algorithm_id!r}")
        if int(self.budget) < 1:
            raise ConfigError("budget must be positive")
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")

    def to_doc(self) -> dict:
        doc: dict = {
            "model": {"id": self.model_id},
            "algorithm": {"id": self.algorithm_id},
            "budget": int(self.budget),
            "seeds": [int(s) for s in self.seeds],
        }
        if self.model_params:
            doc["model"]["params"] = self.model_params
        if self.algorithm_config:
            doc["algorithm"]["config"] = self.algorithm_config
        if self.prior:
            doc["prior"] = self.prior
        return doc

    def canonical(self) -> str:
        return kvdoc.serialize(self.to_doc())

    def spec_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def spec_from_doc(doc: dict, out_dir: str = "results") -> ExperimentSpec:
    known = {"model", "algorithm", "prior", "budget", "seeds", "out"}
    for key in doc:
        if key not in known:
            raise ConfigError(f"unknown configuration key {key!r}")
    model = doc.get("model")
    if not isinstance(model, dict) or "id" not in model:
        raise ConfigError("missing configuration key 'model.id'")
    algorithm = doc.get("algorithm")
    if not isinstance(algorithm, dict) or "id" not in algorithm:
        raise ConfigError("missing configuration key 'algorithm.id'")
    for section, name in ((model, "model"), (algorithm, "algorithm")):
        extra = set(section) - {"id", "params", "config"}
        if extra:
            raise ConfigError(f"unknown configuration key '{name}.{sorted(extra)[0]}'")
    if "budget" not in doc:
        raise ConfigError("missing configuration key 'budget'")
    seeds = doc.get("seeds")
    if seeds is None:
        raise ConfigError("missing configuration key 'seeds'")
    if isinstance(seeds, (int, float)):
        seeds = [int(seeds)]
    spec = ExperimentSpec(
        model_id=str(model["id"]),
        model_params=dict(model.get("params", {})),
        algorithm_id=str(algorithm["id"]),
        algorithm_config=dict(algorithm.get("config", {})),
        prior=dict(doc.get("prior", {})),
        budget=int(doc["budget"]),
        seeds=[int(s) for s in seeds],
        out_dir=str(doc.get("out", out_dir)),
    )
    spec.validate()
    return spec


def load_spec(path, overrides: list[str] | None = None) -> ExperimentSpec:
    """Parse a config file, apply `key=value` overrides, validate."""
    with open(path) as fh:
        text = fh.read()
    try:
        doc = kvdoc.parse(text)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    apply_overrides(doc, overrides or [])
    return spec_from_doc(doc)


def apply_overrides(doc: dict, overrides: list[str]) -> None:
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, _, value = item.partition("=")
        key = key.strip()
        try:
            parsed = kvdoc.parse(f"{key} = {value.strip()}")
            leaf = kvdoc.get_path(parsed, key)
        except ValueError:
            # unquoted bare word: treat as a plain string for convenience
            leaf = value.strip()
        try:
            kvdoc.set_path(doc, key, leaf)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
