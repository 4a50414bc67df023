"""Randomness of a simulated day: arrival streams, handling times, patience.

The per-day scenario only carries day-local data; distributions that span
the whole observation period (yearly handling-time pools, patience curves,
fitted daily AHT values) live in a :class:`SimContext` shared by all days.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ccsim.errors import ConfigError
from ccsim.estimators import SurvivalEstimate, fit_exponential, kaplan_meier
from ccsim.ingest import DayScenario
from ccsim.models import ModelConfig

MIN_DAY_HT_SAMPLES = 5


@dataclass
class SimContext:
    """Period-level distribution inputs for the simulator.

    ``yearly_ht`` pools handling-time samples per skill; ``patience_curves``
    and ``patience_means`` come from the product-limit estimate of pooled
    (waiting time, answered) observations; ``fitted_aht`` maps skill ->
    ISO date -> fitted daily AHT (needed only for aht_per_day='fit').
    """

    yearly_ht: dict[str, np.ndarray] = field(default_factory=dict)
    patience_curves: dict[str, SurvivalEstimate] = field(default_factory=dict)
    patience_means: dict[str, float] = field(default_factory=dict)
    fitted_aht: dict[str, dict[str, float]] = field(default_factory=dict)

    @classmethod
    def from_scenarios(
        cls,
        scenarios: Sequence[DayScenario],
        fitted_aht: Mapping[str, Mapping[str, float]] | None = None,
    ) -> "SimContext":
        """Pool day scenarios into period-level distributions."""
        ht: dict[str, list[float]] = {}
        obs: dict[str, list[tuple[float, bool]]] = {}
        for sc in scenarios:
            for s in sc.skills:
                ht.setdefault(s, []).extend(sc.ht_samples_day.get(s, ()))
                obs.setdefault(s, []).extend(sc.patience_observations.get(s, ()))
        ctx = cls(yearly_ht={s: np.asarray(v, dtype=float) for s, v in ht.items()})
        for s, o in obs.items():
            if o and any(not c for _, c in o):
                ctx.patience_curves[s] = kaplan_meier(o)
                ctx.patience_means[s] = fit_exponential(o)
        if fitted_aht:
            ctx.fitted_aht = {s: dict(v) for s, v in fitted_aht.items()}
        return ctx

    def to_dict(self) -> dict:
        return {
            "yearly_ht": {s: [float(x) for x in v] for s, v in self.yearly_ht.items()},
            "patience_curves": {s: c.to_dict() for s, c in self.patience_curves.items()},
            "patience_means": dict(self.patience_means),
            "fitted_aht": {s: dict(v) for s, v in self.fitted_aht.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimContext":
        return cls(
            yearly_ht={s: np.asarray(v, dtype=float) for s, v in d.get("yearly_ht", {}).items()},
            patience_curves={
                s: SurvivalEstimate.from_dict(v) for s, v in d.get("patience_curves", {}).items()
            },
            patience_means={s: float(v) for s, v in d.get("patience_means", {}).items()},
            fitted_aht={s: dict(v) for s, v in d.get("fitted_aht", {}).items()},
        )


def generate_arrivals(
    scenario: DayScenario, mode: str, rng: np.random.Generator
) -> dict[str, np.ndarray]:
    """Arrival times (seconds from opening) per skill.

    'identical' replays the scenario's exact arrivals. 'ipp' draws, per
    interval, Poisson(realized count) arrivals placed uniformly within the
    interval.
    """
    if mode == "identical":
        if (all(len(scenario.arrivals_exact.get(s, ())) == 0 for s in scenario.skills)
                and any(sum(scenario.arrival_counts.get(s, ())) > 0 for s in scenario.skills)):
            raise ConfigError(
                f"scenario {scenario.date} has arrival counts but no exact arrival "
                "times; identical-arrival mode needs the realized timestamps"
            )
        return {s: np.asarray(scenario.arrivals_exact[s], dtype=float) for s in scenario.skills}
    if mode != "ipp":
        raise ConfigError(f"unknown arrival mode {mode!r}")
    ilen = float(scenario.interval_length)
    out: dict[str, np.ndarray] = {}
    for s in scenario.skills:
        counts = scenario.arrival_counts[s]
        chunks = []
        for i, a in enumerate(counts):
            n = int(rng.poisson(a)) if a > 0 else 0
            if n:
                chunks.append(i * ilen + ilen * rng.random(n))
        times = np.concatenate(chunks) if chunks else np.empty(0)
        times.sort()
        out[s] = times
    return out


def _day_ht_pool(scenario: DayScenario, context: SimContext | None, skill: str) -> np.ndarray:
    pool = np.asarray(scenario.ht_samples_day.get(skill, ()), dtype=float)
    if pool.size >= MIN_DAY_HT_SAMPLES:
        return pool
    yearly = context.yearly_ht.get(skill) if context is not None else None
    if yearly is None or len(yearly) == 0:
        if pool.size > 0:
            return pool
        raise ConfigError(
            f"no handling-time samples for skill {skill!r} on {scenario.date} "
            f"(ht_samples_day empty and no yearly pool in context)"
        )
    warnings.warn(
        f"{scenario.date}/{skill}: only {pool.size} day samples, using yearly pool"
    )
    return np.asarray(yearly, dtype=float)


def _exp_mean(config: ModelConfig, scenario: DayScenario,
              context: SimContext | None, skill: str) -> float:
    if config.aht_per_day == "fit":
        table = (context.fitted_aht if context is not None else {}).get(skill)
        key = scenario.date.isoformat()
        if not table or key not in table:
            raise ConfigError(
                f"fitted_aht missing for skill {skill!r} on {key} (required by aht_per_day='fit')"
            )
        return float(table[key])
    if config.aht_per_day == "yes":
        mean = scenario.ht_mean_day.get(skill)
        if not mean or mean <= 0:
            raise ConfigError(f"ht_mean_day missing for skill {skill!r} on {scenario.date}")
        return float(mean)
    # aht_per_day == "no": yearly mean
    yearly = context.yearly_ht.get(skill) if context is not None else None
    if yearly is None or len(yearly) == 0:
        raise ConfigError(f"yearly handling times missing for skill {skill!r}")
    return float(np.mean(yearly))


def sample_handling_times(
    config: ModelConfig,
    skill: str,
    scenario: DayScenario,
    context: SimContext | None,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """n handling-time draws for one skill under the model config; the
    scenario's mean wrap-up time is added to every draw when wrapup='yes'."""
    if config.ht == "empirical":
        if config.aht_per_day == "no":
            pool = context.yearly_ht.get(skill) if context is not None else None
            if pool is None or len(pool) == 0:
                raise ConfigError(f"yearly handling times missing for skill {skill!r}")
            pool = np.asarray(pool, dtype=float)
        else:
            pool = _day_ht_pool(scenario, context, skill)
        draws = pool[rng.integers(0, pool.size, size=n)]
    else:
        draws = rng.exponential(_exp_mean(config, scenario, context, skill), size=n)
    if config.wrapup == "yes":
        draws = draws + scenario.wrapup_mean
    return draws


def sample_handling_time(
    config: ModelConfig,
    skill: str,
    scenario: DayScenario,
    context: SimContext | None,
    rng: np.random.Generator,
) -> float:
    return float(sample_handling_times(config, skill, scenario, context, 1, rng)[0])


def sample_patiences(
    config: ModelConfig,
    skill: str,
    context: SimContext,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """n patience draws; may contain inf (callers who never abandon)."""
    if config.patience == "empirical":
        curve = context.patience_curves.get(skill)
        if curve is None:
            raise ConfigError(f"patience curve missing for skill {skill!r}")
        u = rng.random(n)
        idx = np.searchsorted(curve.cdf, u, side="left")
        out = np.full(n, np.inf)
        hit = idx < curve.event_times.size
        out[hit] = curve.event_times[idx[hit]]
        return out
    mean = context.patience_means.get(skill)
    if mean is None or mean <= 0:
        raise ConfigError(f"patience mean missing for skill {skill!r}")
    return rng.exponential(mean, size=n)


def sample_patience(
    config: ModelConfig, skill: str, context: SimContext, rng: np.random.Generator
) -> float:
    return float(sample_patiences(config, skill, context, 1, rng)[0])
