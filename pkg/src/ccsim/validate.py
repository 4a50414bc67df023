"""Model validation: simulated vs. actual day performance.

For each day we compare the realized metrics against the replication
distribution of a model: mean absolute error, coverage of the central 95%
interval, and the fraction of actuals above the simulated median. The
measured error mixes three things: the model error proper, system noise
(one realized day vs. its own expectation), and the bias from feeding
realized arrivals into a model that expects rates. The noise/cheating
component is estimated by re-sampling arrivals from the realized counts and
comparing a single fresh replication against the re-sampled expectation; a
variance subtraction plus a normal approximation then yields the corrected
model-error mean, spread and MAE.
"""

from __future__ import annotations

import datetime as dt
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ccsim.errors import ConfigError
from ccsim.ingest import DayScenario
from ccsim.metrics import DEFAULT_TTA, METRIC_NAMES
from ccsim.models import ModelConfig, ModelPreset, all_presets, preset
from ccsim.rng import child_seed, substream
from ccsim.sim import SimContext, replicate, run_day

MIN_REPS_FOR_COVERAGE = 40


@dataclass
class DayComparison:
    day: dt.date
    actual: dict[str, float]
    sim_mean: dict[str, float]
    sim_std: dict[str, float]
    sim_quantiles: dict[str, tuple[float, float, float]]
    n_reps: int

    def to_dict(self) -> dict:
        return {
            "day": self.day.isoformat(),
            "actual": dict(self.actual),
            "sim_mean": dict(self.sim_mean),
            "sim_std": dict(self.sim_std),
            "sim_quantiles": {m: list(q) for m, q in self.sim_quantiles.items()},
            "n_reps": self.n_reps,
        }


def compare_days(
    scenarios: Sequence[DayScenario],
    config: ModelConfig,
    reps: int,
    seed: int,
    context: SimContext | None = None,
    tta: float = DEFAULT_TTA,
    threads: int = 1,
) -> list[DayComparison]:
    """Replicate the model on every scenario and pair it with the actuals."""
    if context is None:
        context = SimContext.from_scenarios(scenarios)
    out = []
    for sc in scenarios:
        if sc.actual is None:
            raise ConfigError(f"scenario {sc.date} carries no actual metrics")
        result = replicate(sc, config, n=reps, context=context, tta=tta,
                           seed=child_seed(seed, "day", sc.date.toordinal()),
                           threads=threads)
        s = result.summary
        out.append(DayComparison(
            day=sc.date,
            actual={m: sc.actual.value(m) for m in METRIC_NAMES},
            sim_mean=s.mean, sim_std=s.std, sim_quantiles=s.quantiles,
            n_reps=reps,
        ))
    return out


def mae(comparisons: Sequence[DayComparison], metric: str) -> float:
    """Mean over days of |simulated mean - actual|."""
    if not comparisons:
        raise ValueError("need at least one day")
    return float(np.mean([abs(c.sim_mean[metric] - c.actual[metric]) for c in comparisons]))


def coverage(comparisons: Sequence[DayComparison], alpha: float = 0.95) -> dict[str, float]:
    """Fraction of days whose actual lies inside the central alpha interval
    of the replication distribution (stored 2.5%/97.5% quantiles)."""
    if abs(alpha - 0.95) > 1e-12:
        raise ValueError("only alpha=0.95 is supported by the stored quantile triple")
    if comparisons and min(c.n_reps for c in comparisons) < MIN_REPS_FOR_COVERAGE:
        warnings.warn(f"coverage from fewer than {MIN_REPS_FOR_COVERAGE} replications "
                      "is unreliable")
    out = {}
    for m in METRIC_NAMES:
        inside = [c.sim_quantiles[m][0] <= c.actual[m] <= c.sim_quantiles[m][2]
                  for c in comparisons]
        out[m] = float(np.mean(inside)) if inside else 0.0
    return out


def median_exceedance(comparisons: Sequence[DayComparison]) -> dict[str, float]:
    """Fraction of days with the actual strictly above the simulated median."""
    out = {}
    for m in METRIC_NAMES:
        above = [c.actual[m] > c.sim_quantiles[m][1] for c in comparisons]
        out[m] = float(np.mean(above)) if above else 0.0
    return out


def variability(comparisons: Sequence[DayComparison]) -> dict[str, float]:
    """Mean over days of the per-day replication standard deviation."""
    return {m: float(np.mean([c.sim_std[m] for c in comparisons])) if comparisons else 0.0
            for m in METRIC_NAMES}


def resample_arrivals(scenario: DayScenario, rng: np.random.Generator) -> DayScenario:
    """Second-stage arrival draw: per-interval counts become Poisson draws
    with means equal to the realized counts; exact times are regenerated
    uniformly per interval. Staffing and distributions stay untouched."""
    ilen = float(scenario.interval_length)
    counts: dict[str, list[int]] = {}
    exact: dict[str, list[float]] = {}
    for s in scenario.skills:
        new_counts = []
        times: list[float] = []
        for i, a in enumerate(scenario.arrival_counts[s]):
            n = int(rng.poisson(a)) if a > 0 else 0
            new_counts.append(n)
            if n:
                times.extend(i * ilen + ilen * rng.random(n))
        counts[s] = new_counts
        exact[s] = sorted(times)
    return replace(scenario, arrivals_exact=exact, arrival_counts=counts, actual=None)


@dataclass
class NoiseStats:
    """Statistics of (re-sampled expectation - single fresh replication),
    the combined cheating factor plus system noise; a lower bound on the
    measured error of any model."""

    mean: dict[str, float]
    std: dict[str, float]
    mae: dict[str, float]
    samples: dict[str, np.ndarray] = field(repr=False, default_factory=dict)


def noise_cheating_stats(
    scenarios: Sequence[DayScenario],
    config: ModelConfig,
    reps: int,
    seed: int,
    context: SimContext | None = None,
    tta: float = DEFAULT_TTA,
    threads: int = 1,
) -> NoiseStats:
    """Per day: one fresh replication on the scenario as-is (standing in for
    the single realization reality provides) against the mean of ``reps``
    replications on an arrival-resampled copy; statistics of the difference."""
    if context is None:
        context = SimContext.from_scenarios(scenarios)
    diffs: dict[str, list[float]] = {m: [] for m in METRIC_NAMES}
    for sc in scenarios:
        key = sc.date.toordinal()
        single = run_day(sc, config, substream(seed, "noise-single", key), context, tta)
        resampled = resample_arrivals(sc, substream(seed, "noise-resample", key))
        result = replicate(resampled, config, n=reps, context=context, tta=tta,
                           seed=child_seed(seed, "noise-rep", key), threads=threads)
        for m in METRIC_NAMES:
            diffs[m].append(result.summary.mean[m] - single.value(m))
    samples = {m: np.array(v) for m, v in diffs.items()}
    return NoiseStats(
        mean={m: float(v.mean()) for m, v in samples.items()},
        std={m: float(v.std(ddof=1)) if v.size > 1 else 0.0 for m, v in samples.items()},
        mae={m: float(np.abs(v).mean()) for m, v in samples.items()},
        samples=samples,
    )


def _phi(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def folded_normal_mean(mu: float, sigma: float) -> float:
    """E|X| for X ~ N(mu, sigma^2); |mu| in the sigma -> 0 limit."""
    if sigma <= 0.0:
        return abs(mu)
    z = mu / sigma
    return (sigma * math.sqrt(2.0 / math.pi) * math.exp(-0.5 * z * z)
            + mu * (2.0 * _phi(z) - 1.0))


@dataclass(frozen=True)
class CorrectedError:
    mu: float
    sigma: float
    corrected_mae: float
    variance_clamped: bool = False


def corrected_model_error(
    measured_mean: float,
    measured_std: float,
    noise_mean: float,
    noise_std: float,
) -> CorrectedError:
    """Subtract the noise/cheating component from the measured error.

    mu is the bias of the model proper; sigma^2 the measured variance minus
    the noise variance (clamped at zero); the corrected MAE assumes the
    model error is N(mu, sigma^2).
    """
    if measured_std < 0 or noise_std < 0:
        raise ValueError("standard deviations must be non-negative")
    mu = measured_mean - noise_mean
    var = measured_std ** 2 - noise_std ** 2
    clamped = var < 0
    sigma = math.sqrt(max(var, 0.0))
    return CorrectedError(mu, sigma, folded_normal_mean(mu, sigma), clamped)


@dataclass
class ErrorDecomposition:
    noise_mean: float
    noise_std: float
    noise_mae: float
    measured_mean: float
    measured_std: float
    measured_mae: float
    mu: float
    sigma: float
    corrected_mae: float
    variance_clamped: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def decompose_errors(
    comparisons: Sequence[DayComparison],
    noise: NoiseStats,
) -> dict[str, ErrorDecomposition]:
    """Full per-metric decomposition from day comparisons and noise stats."""
    out = {}
    for m in METRIC_NAMES:
        diffs = np.array([c.sim_mean[m] - c.actual[m] for c in comparisons])
        measured_mean = float(diffs.mean())
        measured_std = float(diffs.std(ddof=1)) if diffs.size > 1 else 0.0
        corr = corrected_model_error(measured_mean, measured_std,
                                     noise.mean[m], noise.std[m])
        out[m] = ErrorDecomposition(
            noise_mean=noise.mean[m], noise_std=noise.std[m], noise_mae=noise.mae[m],
            measured_mean=measured_mean, measured_std=measured_std,
            measured_mae=float(np.abs(diffs).mean()),
            mu=corr.mu, sigma=corr.sigma, corrected_mae=corr.corrected_mae,
            variance_clamped=corr.variance_clamped,
        )
    return out


@dataclass
class ValidationReport:
    preset: str
    n_days: int
    reps: int
    mae: dict[str, float]
    i_alpha: dict[str, float]
    above_median: dict[str, float]
    variability: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "preset": self.preset, "n_days": self.n_days, "reps": self.reps,
            "mae": dict(self.mae), "i_alpha": dict(self.i_alpha),
            "above_median": dict(self.above_median), "variability": dict(self.variability),
        }


@dataclass
class ModelValidation:
    report: ValidationReport
    decomposition: dict[str, ErrorDecomposition]
    comparisons: list[DayComparison] = field(repr=False, default_factory=list)
    noise: NoiseStats | None = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "report": self.report.to_dict(),
            "decomposition": {m: d.to_dict() for m, d in self.decomposition.items()},
            "days": [c.to_dict() for c in self.comparisons],
        }


def _resolve_presets(presets) -> list[ModelPreset]:
    if presets in (None, "all"):
        return all_presets()
    out = []
    for p in presets:
        if isinstance(p, ModelPreset):
            out.append(p)
        elif isinstance(p, ModelConfig):
            out.append(ModelPreset(str(p), p))
        else:
            out.append(ModelPreset(p, preset(p)))
    return out


def validate_models(
    scenarios: Sequence[DayScenario],
    presets="all",
    reps: int = 1000,
    seed: int = 0,
    context: SimContext | None = None,
    tta: float = DEFAULT_TTA,
    noise_reps: int | None = None,
    threads: int = 1,
) -> list[ModelValidation]:
    """Validate each preset against the scenarios' actuals.

    Yields, per preset, the table-style report (MAE, I_alpha, median
    exceedance, variability) and the per-metric error decomposition built
    from ``noise_reps`` (default: ``reps``) re-sampled replications per day.
    """
    if context is None:
        context = SimContext.from_scenarios(scenarios)
    noise_reps = reps if noise_reps is None else noise_reps
    results = []
    for mp in _resolve_presets(presets):
        pseed = child_seed(seed, "preset", mp.name)
        comps = compare_days(scenarios, mp.config, reps, pseed, context, tta, threads)
        noise = noise_cheating_stats(scenarios, mp.config, noise_reps, pseed,
                                     context, tta, threads)
        report = ValidationReport(
            preset=mp.name, n_days=len(comps), reps=reps,
            mae={m: mae(comps, m) for m in METRIC_NAMES},
            i_alpha=coverage(comps),
            above_median=median_exceedance(comps),
            variability=variability(comps),
        )
        results.append(ModelValidation(report, decompose_errors(comps, noise), comps, noise))
    return results
