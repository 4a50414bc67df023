"""Shared scenario factories for the test suite."""

from __future__ import annotations

import datetime as dt

import numpy as np

from ccsim.ingest import DayScenario
from ccsim.estimators import SurvivalEstimate, kaplan_meier
from ccsim.models import ModelConfig
from ccsim.rng import substream
from ccsim.sim import SimContext, generate_arrivals, run_day


def make_scenario(
    counts,
    staffing,
    skills=("s1",),
    groups=None,
    ht_samples=None,
    ht_mean=None,
    wrapup_mean=0.0,
    interval_length=1800,
    date=dt.date(2014, 1, 6),
    staffing_no_breaks=None,
    patience_observations=None,
    arrivals_exact=None,
) -> DayScenario:
    """Small scenario factory; counts/staffing are dicts or single lists."""
    skills = list(skills)
    if not isinstance(counts, dict):
        counts = {skills[0]: list(counts)}
    n_intervals = len(next(iter(counts.values())))
    if groups is None:
        groups = {"g": skills}
    if not isinstance(staffing, dict):
        staffing = {next(iter(groups)): list(staffing)}
    ht_samples = ht_samples or {s: [100.0] * 10 for s in skills}
    ht_mean = ht_mean or {s: float(np.mean(ht_samples[s])) if ht_samples[s] else 0.0
                          for s in skills}
    exact = arrivals_exact or {s: [] for s in skills}
    return DayScenario(
        date=date, interval_length=interval_length, n_intervals=n_intervals,
        opening=dt.time(8, 0), skills=skills,
        arrivals_exact={s: list(exact.get(s, [])) for s in skills},
        arrival_counts={s: list(counts.get(s, [0] * n_intervals)) for s in skills},
        groups=groups,
        staffing=staffing,
        staffing_no_breaks=staffing_no_breaks or {g: list(v) for g, v in staffing.items()},
        ht_samples_day=ht_samples,
        ht_mean_day=ht_mean,
        wrapup_mean=wrapup_mean,
        patience_observations=patience_observations or {s: [] for s in skills},
    )


def never_abandon_curve() -> SurvivalEstimate:
    """Patience curve whose every draw is infinite."""
    return SurvivalEstimate(
        event_times=np.array([1.0]), survival=np.array([1.0]),
        cdf=np.array([0.0]), tail_mass=1.0,
    )


def point_patience_curve(t: float) -> SurvivalEstimate:
    """Patience curve that always yields exactly t."""
    return SurvivalEstimate(
        event_times=np.array([float(t)]), survival=np.array([0.0]),
        cdf=np.array([1.0]), tail_mass=0.0,
    )


EMPIRICAL_DAY = ModelConfig("identical", "empirical", "yes", "yes", "empirical", "yes")
ARRIVAL_DAY = ModelConfig("ipp", "empirical", "yes", "yes", "empirical", "yes")


def build_self_consistent_world(
    n_days: int,
    seed: int,
    base_rate: float = 70.0,
    n_intervals: int = 24,
    interval_length: int = 1800,
    occupancy: float = 0.88,
    ht_mean: float = 180.0,
    ht_sigma_log: float = 0.5,
    day_pool_size: int = 400,
    breaks_inflation: float = 0.0,
    day_aht_swing: float = 0.0,
    exp_day_ht: bool = False,
) -> tuple[list[DayScenario], SimContext]:
    """Days whose "reality" is one draw of the simulation model itself.

    Per day: true per-interval rates (integer); the scenario's observed
    arrivals are one Poisson realization of those rates (what a log would
    show); a fixed day handling-time pool is both what reality samples from
    and what the model sees; and the actual metrics come from an
    independent run driven by the true rates. The model error of the
    redraw-arrivals model is zero by construction, while the measured error
    still contains system noise plus the bias from feeding the realization
    back as rates, so the decomposition has real work to do.

    ``breaks_inflation`` > 0 additionally publishes an inflated
    staffing_no_breaks profile (the true staffing stays effective), and
    ``day_aht_swing`` makes day HT means alternate by that relative amount.
    """
    profile = np.array([0.6, 0.8, 1.0, 1.1, 1.1, 1.0, 0.9, 0.9, 1.0, 1.1,
                        1.0, 0.8, 0.7, 0.7, 0.8, 0.9, 1.0, 0.9, 0.8, 0.7,
                        0.6, 0.5, 0.45, 0.4][:n_intervals])
    mu_log = np.log(ht_mean) - 0.5 * ht_sigma_log ** 2

    gen_rng = substream(seed, "world")
    scenarios: list[DayScenario] = []
    patience_obs = [(float(t), False) for t in gen_rng.exponential(150.0, size=400)]
    curve = kaplan_meier(patience_obs)
    pools: list[np.ndarray] = []

    for d in range(n_days):
        rng = substream(seed, "world-day", d)
        day_factor = 0.85 + 0.3 * (d % 5) / 4.0
        rates = np.maximum(1, np.rint(base_rate * day_factor * profile)).astype(int)

        if day_aht_swing > 0:
            m_d = ht_mean * (1.0 + day_aht_swing * (1 if d % 2 == 0 else -1))
        else:
            m_d = ht_mean
        if exp_day_ht:
            pool = rng.exponential(m_d, size=day_pool_size)
        else:
            pool = rng.lognormal(np.log(m_d) - 0.5 * ht_sigma_log ** 2, ht_sigma_log,
                                 size=day_pool_size)
        pools.append(pool)

        load = rates * float(np.mean(pool)) / interval_length
        staffing = np.maximum(2, np.ceil(load / occupancy)).astype(int)
        if breaks_inflation > 0:
            extra = np.maximum(1, np.rint(staffing * breaks_inflation)).astype(int)
            staffing_nb = staffing + extra
        else:
            staffing_nb = staffing

        sc = make_scenario(
            counts=list(rates), staffing=list(staffing),
            staffing_no_breaks={"g": list(staffing_nb)},
            ht_samples={"s1": [float(x) for x in pool]},
            interval_length=interval_length,
            date=dt.date(2014, 1, 6) + dt.timedelta(days=d),
        )
        scenarios.append(sc)

    context = SimContext(
        yearly_ht={"s1": np.concatenate(pools)},
        patience_curves={"s1": curve},
        patience_means={"s1": float(np.mean([t for t, _ in patience_obs]))},
    )
    for d, sc in enumerate(scenarios):
        # reality: an independent draw driven by the true rates
        actual = run_day(sc, ARRIVAL_DAY, substream(seed, "reality", d), context)
        # the observed day: one Poisson realization of the same rates
        rng = substream(seed, "world-obs", d)
        arrivals = generate_arrivals(sc, "ipp", rng)["s1"]
        sc.arrivals_exact = {"s1": [float(t) for t in arrivals]}
        sc.arrival_counts = {"s1": [
            int(((arrivals >= i * interval_length) & (arrivals < (i + 1) * interval_length)).sum())
            for i in range(n_intervals)
        ]}
        sc.actual = actual
    return scenarios, context
