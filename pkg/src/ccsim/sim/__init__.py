"""Discrete-event simulation of one day of a multi-skill call center."""

from ccsim.sim.engine import (
    DayCalls,
    ReplicationResult,
    ReplicationSummary,
    replicate,
    run_day,
    run_day_detailed,
)
from ccsim.sim.sampling import (
    SimContext,
    generate_arrivals,
    sample_handling_time,
    sample_patience,
)

__all__ = [
    "DayCalls",
    "ReplicationResult",
    "ReplicationSummary",
    "SimContext",
    "generate_arrivals",
    "replicate",
    "run_day",
    "run_day_detailed",
    "sample_handling_time",
    "sample_patience",
]
