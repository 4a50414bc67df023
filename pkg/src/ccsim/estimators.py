"""Statistical estimators for call center data.

Covers the censored patience distribution (product-limit estimator),
handling-time distributions (lognormal after a short-call filter,
exponential means), the per-agent learning curve for average handling
times, the day-level AHT aggregation with its explained variation, and
Kolmogorov-Smirnov uniformity tests of within-interval arrival times
(piecewise-constant Poisson check).
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats as sstats
from scipy.optimize import minimize_scalar


# ---------------------------------------------------------------------------
# survival / patience

@dataclass
class SurvivalEstimate:
    """Product-limit survival curve over distinct event times.

    ``survival[i]`` is S(t) just after ``event_times[i]``; ``tail_mass`` is
    the probability remaining after the last event time (mass that never
    saw an event within the observation range).
    """

    event_times: np.ndarray
    survival: np.ndarray
    cdf: np.ndarray
    tail_mass: float
    n_events: int = 0
    n_censored: int = 0

    def to_dict(self) -> dict:
        return {
            "event_times": [float(t) for t in self.event_times],
            "survival": [float(s) for s in self.survival],
            "tail_mass": float(self.tail_mass),
            "n_events": self.n_events,
            "n_censored": self.n_censored,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SurvivalEstimate":
        times = np.asarray(d["event_times"], dtype=float)
        surv = np.asarray(d["survival"], dtype=float)
        return cls(times, surv, 1.0 - surv, float(d["tail_mass"]),
                   int(d.get("n_events", 0)), int(d.get("n_censored", 0)))


def kaplan_meier(observations: Iterable[tuple[float, bool]]) -> SurvivalEstimate:
    """Kaplan-Meier estimate from (duration, was_censored) pairs.

    At each distinct uncensored time t with d events out of n at risk,
    S <- S * (1 - d/n); censored observations only shrink the risk set.
    Raises ValueError when every observation is censored.
    """
    obs = list(observations)
    if not obs:
        raise ValueError("no observations")
    times = np.array([float(t) for t, _ in obs])
    censored = np.array([bool(c) for _, c in obs])
    if times.min() < 0:
        raise ValueError("negative duration")
    if censored.all():
        raise ValueError("all observations censored: no events to estimate from")

    order = np.argsort(times, kind="stable")
    times = times[order]
    censored = censored[order]
    n = times.size

    event_times, deaths = np.unique(times[~censored], return_counts=True)
    # at risk at t: observations with duration >= t (censored at t counts)
    at_risk = n - np.searchsorted(times, event_times, side="left")
    survival = np.cumprod(1.0 - deaths / at_risk)
    cdf = 1.0 - survival
    return SurvivalEstimate(
        event_times=event_times,
        survival=survival,
        cdf=cdf,
        tail_mass=float(survival[-1]),
        n_events=int(deaths.sum()),
        n_censored=int(censored.sum()),
    )


def _is_censored_input(data) -> bool:
    first = next(iter(data))
    return isinstance(first, (tuple, list)) or (
        isinstance(first, np.ndarray) and first.shape != ()
    )


def fit_exponential(data) -> float:
    """Mean for an exponential fit.

    Plain durations give the arithmetic mean. (duration, was_censored)
    pairs give the area under the Kaplan-Meier survival curve, truncated at
    the largest observation (censored tail mass contributes up to there).
    """
    data = list(data)
    if not data:
        raise ValueError("no observations")
    if not _is_censored_input(data):
        return float(np.mean(np.asarray(data, dtype=float)))

    est = kaplan_meier(data)
    t_max = max(float(t) for t, _ in data)
    mean = 0.0
    prev_t, prev_s = 0.0, 1.0
    for t, s in zip(est.event_times, est.survival):
        mean += (t - prev_t) * prev_s
        prev_t, prev_s = float(t), float(s)
    mean += max(0.0, t_max - prev_t) * prev_s
    return mean


# ---------------------------------------------------------------------------
# handling times

@dataclass(frozen=True)
class LognormalFit:
    mu_log: float
    sigma_log: float
    min_duration_filter: float
    n_used: int = 0

    @property
    def mean(self) -> float:
        return math.exp(self.mu_log + 0.5 * self.sigma_log ** 2)


def fit_lognormal(durations: Iterable[float], min_duration: float = 15.0) -> LognormalFit:
    """Fit log(duration) moments after dropping durations below the filter
    (very short calls are connection errors, not handled calls)."""
    kept = np.asarray([d for d in durations if d >= min_duration], dtype=float)
    if kept.size < 2:
        raise ValueError(
            f"need at least 2 durations >= {min_duration}, got {kept.size}"
        )
    logs = np.log(kept)
    sigma = float(np.std(logs, ddof=1))
    if sigma <= 0.0:
        raise ValueError("degenerate sample: zero variance on the log scale")
    return LognormalFit(float(np.mean(logs)), sigma, float(min_duration), int(kept.size))


# ---------------------------------------------------------------------------
# agent learning curve

GAMMA_MAX = 0.1  # per day; learning only, no slow-down
_GAMMA_XATOL = 1e-6


@dataclass
class AgentLearningFit:
    """Exponential learning curve alpha * exp(-gamma * t) for one agent's
    daily AHT, with t counted from the agent's first observed working day."""

    agent: str
    alpha: float
    gamma: float
    first_day: int
    n_per_day: dict[int, int] = field(default_factory=dict)
    sse: float = 0.0

    def predict(self, day: int) -> float:
        return self.alpha * math.exp(-self.gamma * (day - self.first_day))

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "first_day": self.first_day,
            "n_per_day": {str(k): v for k, v in sorted(self.n_per_day.items())},
            "sse": self.sse,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AgentLearningFit":
        return cls(d["agent"], float(d["alpha"]), float(d["gamma"]), int(d["first_day"]),
                   {int(k): int(v) for k, v in d["n_per_day"].items()}, float(d["sse"]))


AgentDaySamples = Mapping[str, Mapping[int, Sequence[float]]]


def _profile_sse(gamma: float, t: np.ndarray, n: np.ndarray, mean: np.ndarray,
                 sumsq: np.ndarray) -> tuple[float, float]:
    """Optimal alpha for fixed gamma and the resulting sum of squares."""
    w = np.exp(-gamma * t)
    denom = float(np.sum(n * w * w))
    alpha = float(np.sum(n * w * mean) / denom)
    beta = alpha * w
    sse = float(np.sum(sumsq - 2.0 * beta * n * mean + n * beta * beta))
    return alpha, sse


def fit_agent_learning(
    samples: AgentDaySamples,
    gamma_max: float = GAMMA_MAX,
) -> list[AgentLearningFit]:
    """Fit (alpha, gamma) per agent by minimizing the per-call squared error
    sum over days; gamma is profiled out by bounded scalar search with the
    closed-form alpha(gamma). Agents observed on a single day fall back to
    gamma = 0 with alpha equal to that day's mean."""
    fits = []
    for agent in sorted(samples):
        by_day = samples[agent]
        days = np.array(sorted(d for d in by_day if len(by_day[d]) > 0), dtype=int)
        if days.size == 0:
            continue
        first = int(days[0])
        t = (days - first).astype(float)
        n = np.array([len(by_day[int(d)]) for d in days], dtype=float)
        mean = np.array([float(np.mean(by_day[int(d)])) for d in days])
        sumsq = np.array([float(np.sum(np.square(by_day[int(d)]))) for d in days])
        n_per_day = {int(tt): int(nn) for tt, nn in zip(t, n)}

        alpha0, sse0 = _profile_sse(0.0, t, n, mean, sumsq)
        if days.size == 1:
            fits.append(AgentLearningFit(agent, alpha0, 0.0, first, n_per_day, max(sse0, 0.0)))
            continue

        res = minimize_scalar(
            lambda g: _profile_sse(g, t, n, mean, sumsq)[1],
            bounds=(0.0, gamma_max),
            method="bounded",
            options={"xatol": _GAMMA_XATOL},
        )
        gamma = float(res.x)
        alpha, sse = _profile_sse(gamma, t, n, mean, sumsq)
        if sse0 <= sse:  # never do worse than the flat fit
            alpha, gamma, sse = alpha0, 0.0, sse0
        fits.append(AgentLearningFit(agent, alpha, gamma, first, n_per_day, max(sse, 0.0)))
    return fits


@dataclass
class DailyAhtFit:
    """Day-level AHT: the call-weighted mix of per-agent fitted values
    against the realized daily AHT, with the explained variation."""

    days: list[int]
    beta: list[float]
    s_actual: list[float]
    n_calls: list[int]
    s_bar: float
    r_squared: float

    def to_dict(self) -> dict:
        return {
            "days": self.days, "beta": self.beta, "s_actual": self.s_actual,
            "n_calls": self.n_calls, "s_bar": self.s_bar, "r_squared": self.r_squared,
        }


def daily_aht_fit(fits: Sequence[AgentLearningFit], samples: AgentDaySamples) -> DailyAhtFit:
    """Aggregate per-agent fits into a daily AHT prediction.

    For day d: beta_d = sum_j n_jd * beta_jd / sum_j n_jd, where beta_jd is
    agent j's fitted value on d. Days with zero calls are skipped. R^2 is
    1 - SS(actual - fitted)/SS(actual - global weighted mean).
    """
    by_agent = {f.agent: f for f in fits}
    day_n: dict[int, float] = {}
    day_sum: dict[int, float] = {}
    day_beta_num: dict[int, float] = {}
    total_sum = 0.0
    total_n = 0.0
    for agent in sorted(samples):
        if agent not in by_agent:
            raise ValueError(f"no learning fit for agent {agent!r}")
        fit = by_agent[agent]
        for day, vals in samples[agent].items():
            if len(vals) == 0:
                continue
            d = int(day)
            n = float(len(vals))
            s = float(np.sum(vals))
            day_n[d] = day_n.get(d, 0.0) + n
            day_sum[d] = day_sum.get(d, 0.0) + s
            day_beta_num[d] = day_beta_num.get(d, 0.0) + n * fit.predict(d)
            total_sum += s
            total_n += n
    if total_n == 0:
        raise ValueError("no calls in any day")
    days = sorted(day_n)
    beta = [day_beta_num[d] / day_n[d] for d in days]
    s_actual = [day_sum[d] / day_n[d] for d in days]
    s_bar = total_sum / total_n

    ss_res = sum((s - b) ** 2 for s, b in zip(s_actual, beta))
    ss_tot = sum((s - s_bar) ** 2 for s in s_actual)
    if ss_tot > 0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res == 0.0 else -math.inf
    return DailyAhtFit(days, beta, s_actual, [int(day_n[d]) for d in days], s_bar, r2)


# ---------------------------------------------------------------------------
# arrival uniformity (piecewise-constant Poisson check)

KS_EXACT_MAX_N = 35
MIN_ARRIVALS_PER_TEST = 5


@dataclass(frozen=True)
class NhppTestResult:
    interval: str
    n: int
    p_value: float
    k: int
    per_test_level: float
    rejected: bool

    def to_dict(self) -> dict:
        return {
            "interval": self.interval, "n": self.n, "p_value": self.p_value,
            "k": self.k, "per_test_level": self.per_test_level, "rejected": self.rejected,
        }


def _ks_pvalue(offsets: np.ndarray) -> float:
    method = "exact" if offsets.size <= KS_EXACT_MAX_N else "asymp"
    return float(sstats.kstest(offsets, "uniform", method=method).pvalue)


def _result(label: str, offsets: np.ndarray, k: int) -> NhppTestResult:
    level = 1.0 - 0.95 ** (1.0 / k)
    p = _ks_pvalue(offsets)
    return NhppTestResult(label, int(offsets.size), p, k, level, p < level)


def ks_uniformity_test(
    times: Sequence[float],
    interval: tuple[float, float],
    k: int = 1,
    label: str | None = None,
) -> NhppTestResult:
    """One-sample KS test of arrival times within an interval against the
    uniform distribution on that interval. Exact p-value for n <= 35,
    asymptotic above. ``k`` is the number of tests in the family; the
    per-test level is 1 - 0.95^(1/k)."""
    a, b = float(interval[0]), float(interval[1])
    if b <= a:
        raise ValueError("empty interval")
    t = np.asarray(times, dtype=float)
    if t.size < MIN_ARRIVALS_PER_TEST:
        raise ValueError(
            f"need at least {MIN_ARRIVALS_PER_TEST} arrivals, got {t.size}"
        )
    if t.min() < a or t.max() > b:
        raise ValueError("arrival outside the interval")
    offsets = (t - a) / (b - a)
    return _result(label or f"{a:g}-{b:g}", offsets, k)


def ks_summed_test(offsets: Sequence[float], k: int = 1, label: str = "summed") -> NhppTestResult:
    """KS test on normalized offsets pooled over a day's intervals."""
    u = np.asarray(offsets, dtype=float)
    if u.size < MIN_ARRIVALS_PER_TEST:
        raise ValueError(f"need at least {MIN_ARRIVALS_PER_TEST} pooled offsets, got {u.size}")
    if u.min() < 0.0 or u.max() > 1.0:
        raise ValueError("offsets must lie in [0, 1]")
    return _result(label, u, k)


def nhpp_test_table(
    times: Sequence[float],
    interval_length: float,
    n_intervals: int,
    opening: dt.time | None = None,
    min_n: int = MIN_ARRIVALS_PER_TEST,
    jitter: bool = False,
    rng: np.random.Generator | None = None,
) -> list[NhppTestResult]:
    """Per-interval KS tests plus a pooled "summed" row for one day.

    ``times`` are seconds from opening. Intervals with fewer than ``min_n``
    arrivals are skipped and do not count toward k. With ``jitter`` set,
    second-rounded timestamps are smeared uniformly within their second
    first (needs ``rng``).
    """
    t = np.asarray(times, dtype=float)
    if jitter:
        if rng is None:
            raise ValueError("jitter requires an rng")
        t = t + rng.random(t.size)
    horizon = interval_length * n_intervals
    t = t[(t >= 0) & (t < horizon)]

    def _label(i: int) -> str:
        if opening is None:
            return f"interval {i}"
        start = (dt.datetime.combine(dt.date(2000, 1, 1), opening)
                 + dt.timedelta(seconds=i * interval_length))
        end = start + dt.timedelta(seconds=interval_length)
        return f"{start:%H:%M}-{end:%H:%M}"

    per_interval: list[tuple[str, np.ndarray]] = []
    pooled: list[np.ndarray] = []
    for i in range(n_intervals):
        lo = i * interval_length
        sel = t[(t >= lo) & (t < lo + interval_length)]
        if sel.size == 0:
            continue
        offsets = (sel - lo) / interval_length
        pooled.append(offsets)
        if sel.size >= min_n:
            per_interval.append((_label(i), offsets))

    k = len(per_interval)
    rows = [_result(lbl, offs, k) for lbl, offs in per_interval]
    if pooled:
        u = np.concatenate(pooled)
        if u.size >= min_n:
            rows.append(_result("summed", u, 1))
    return rows
