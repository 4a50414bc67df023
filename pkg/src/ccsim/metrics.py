"""Per-day performance metrics.

A day's outcome is summarized by the service level (fraction of all offered
calls answered within the time-to-answer), the abandonment rate (abandoned /
offered) and the ASA (mean waiting time of answered calls). Offered counts
every arriving call, answered or not.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

#: per-call outcome codes used by the simulation engine
ANSWERED = 0
ABANDONED = 1
UNRESOLVED = 2

METRIC_NAMES = ("sl", "ab", "asa")

DEFAULT_TTA = 60.0


@dataclass(frozen=True)
class DayMetrics:
    offered: int
    answered_within_tta: int
    answered_late: int
    abandoned: int
    unresolved: int
    sl: float
    ab: float
    asa: float

    def value(self, metric: str) -> float:
        if metric not in METRIC_NAMES:
            raise ValueError(f"unknown metric {metric!r}, expected one of {METRIC_NAMES}")
        return getattr(self, metric)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DayMetrics":
        return cls(**d)


def metrics_from_calls(
    status: np.ndarray,
    wait: np.ndarray,
    tta: float = DEFAULT_TTA,
    asa_scope: str = "answered",
) -> DayMetrics:
    """Aggregate per-call outcomes into day metrics.

    ``status`` holds ANSWERED / ABANDONED / UNRESOLVED codes, ``wait`` the
    time each call spent in queue (until answer or abandonment; 0 for
    unresolved calls, which are excluded from the ASA). ``asa_scope`` is
    "answered" (industry convention) or "offered", which averages the queue
    time of answered and abandoned calls alike.

    A day with zero offered calls reports sl=1, ab=0, asa=0.
    """
    status = np.asarray(status)
    wait = np.asarray(wait, dtype=float)
    offered = int(status.size)
    if offered == 0:
        return DayMetrics(0, 0, 0, 0, 0, 1.0, 0.0, 0.0)

    answered = status == ANSWERED
    abandoned = status == ABANDONED
    unresolved = status == UNRESOLVED
    within = answered & (wait <= tta)

    n_within = int(within.sum())
    n_answered = int(answered.sum())
    n_abandoned = int(abandoned.sum())
    n_unresolved = int(unresolved.sum())

    if asa_scope == "answered":
        pool = answered
    elif asa_scope == "offered":
        pool = answered | abandoned
    else:
        raise ValueError(f"asa_scope must be 'answered' or 'offered', got {asa_scope!r}")
    asa = float(wait[pool].mean()) if pool.any() else 0.0

    return DayMetrics(
        offered=offered,
        answered_within_tta=n_within,
        answered_late=n_answered - n_within,
        abandoned=n_abandoned,
        unresolved=n_unresolved,
        sl=n_within / offered,
        ab=n_abandoned / offered,
        asa=asa,
    )
