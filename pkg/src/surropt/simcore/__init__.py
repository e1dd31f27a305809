"""Simulation-model abstraction, replication running, and the bundled testbed."""

from .box import Box
from .data import AggregatedObservation, Dataset, ReplicationSet
from .models import (
    CallableModel,
    SimulationModel,
    aggregate,
    observe,
    run_replications,
)
from .queueing import (
    erlang_c,
    mean_length_of_stay,
    simulate_mmc_sojourn,
    simulate_tandem_sojourn,
    stylized_queue_mean_los,
)
from .testbed import (
    ConcaveQuadraticModel,
    RippleModel,
    TandemQueueModel,
    testbed_catalog,
)

__all__ = [
    "AggregatedObservation",
    "Box",
    "CallableModel",
    "ConcaveQuadraticModel",
    "Dataset",
    "ReplicationSet",
    "RippleModel",
    "SimulationModel",
    "TandemQueueModel",
    "aggregate",
    "erlang_c",
    "mean_length_of_stay",
    "observe",
    "run_replications",
    "simulate_mmc_sojourn",
    "simulate_tandem_sojourn",
    "stylized_queue_mean_los",
    "testbed_catalog",
]
