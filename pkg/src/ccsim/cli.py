"""Command-line entry point.

Subcommands: analyze (logs -> scenarios + estimates), synth (synthetic
logs), simulate (replicate one scenario under a model), validate (models
vs. actuals over a scenario directory), decompose (error decomposition for
one model), presets (list the nine model presets).

Every output directory receives a run manifest; identical manifests imply
bit-identical outputs. Exit codes: 0 success, 1 usage error, 2 data or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import os
import sys
from pathlib import Path

import numpy as np

from ccsim import __version__
from ccsim.errors import ConfigError, DataError
from ccsim.ingest import (
    DayScenario,
    IngestConfig,
    compile_scenario,
    extract_wrapups,
    compute_shrinkage,
    infer_skill_sets,
    load_scenario,
    mean_shrinkage,
    parse_activity_log,
    parse_call_log,
    partition_days,
    read_exclusion_calendar,
    save_scenario,
    Activity,
)
from ccsim.estimators import (
    daily_aht_fit,
    fit_agent_learning,
    fit_exponential,
    fit_lognormal,
    kaplan_meier,
    nhpp_test_table,
)
from ccsim.manifest import RunManifest
from ccsim.metrics import METRIC_NAMES
from ccsim.models import all_presets, load_model
from ccsim.rng import substream
from ccsim.sim import SimContext, replicate
from ccsim.synth import SyntheticSpec, generate, write_logs
from ccsim.validate import noise_cheating_stats, decompose_errors, compare_days, validate_models

CONFIG_ENV = "CCSIM_CONFIG"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker threads for replications")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="format of the summary printed to stdout")


def _ingest_config(path: str | None) -> IngestConfig:
    path = path or os.environ.get(CONFIG_ENV)
    return IngestConfig.from_json(path) if path else IngestConfig()


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, sort_keys=True, indent=1)
        f.write("\n")


def _histogram_rows(values, bin_width: float):
    values = np.asarray(list(values), dtype=float)
    if values.size == 0:
        return []
    hi = float(values.max()) + bin_width
    edges = np.arange(0.0, hi + bin_width, bin_width)
    counts, edges = np.histogram(values, bins=edges)
    return [(float(a), float(b), int(c)) for a, b, c in zip(edges[:-1], edges[1:], counts)]


def _load_scenarios(path: str) -> list[DayScenario]:
    p = Path(path)
    if p.is_file():
        return [load_scenario(str(p))]
    files = sorted(p.glob("scenario_*.json"))
    if not files:
        raise DataError(f"no scenario_*.json files under {path}")
    return [load_scenario(str(f)) for f in files]


def _context_for(scenarios, analysis_path: str | None) -> SimContext:
    fitted = None
    if analysis_path:
        with open(analysis_path, "r", encoding="utf-8") as f:
            bundle = json.load(f)
        fitted = bundle.get("fitted_aht")
    return SimContext.from_scenarios(scenarios, fitted_aht=fitted)


# ---------------------------------------------------------------------------
# analyze


def cmd_analyze(args) -> int:
    cfg = _ingest_config(args.config)
    out = _out_dir(args)

    calls_result = parse_call_log(args.calls, cfg)
    acts_result = parse_activity_log(args.activities, cfg)
    exclusions = read_exclusion_calendar(args.exclusions) if args.exclusions else set()
    days = partition_days(calls_result.records, acts_result.records, exclusions)
    if not days:
        raise DataError("no days left after exclusions")

    volume: dict[str, int] = {}
    for c in calls_result.records:
        volume[c.skill] = volume.get(c.skill, 0) + 1
    skills = sorted(volume, key=lambda s: (-volume[s], s))
    if args.top_skills and args.top_skills < len(skills):
        skills = skills[: args.top_skills]
    skills = sorted(skills)
    skill_set = set(skills)

    agent_skills = infer_skill_sets(calls_result.records)
    wrap_all, wrap_mean = extract_wrapups(acts_result.records)
    shrink = compute_shrinkage(acts_result.records,
                               include_unpaid=cfg.subtract_unpaid_breaks)

    scen_dir = out / "scenarios"
    scen_dir.mkdir(exist_ok=True)
    scenarios = []
    for day in days:
        day.calls = [c for c in day.calls if c.skill in skill_set]
        sc = compile_scenario(day, cfg, agent_skills, skills=skills, wrapup_mean=wrap_mean)
        scenarios.append(sc)
        save_scenario(sc, str(scen_dir / f"scenario_{sc.date.isoformat()}.json"))

    # period-level estimates per skill
    ht_pooled: dict[str, list[float]] = {s: [] for s in skills}
    patience_obs: dict[str, list[tuple[float, bool]]] = {s: [] for s in skills}
    agent_day: dict[str, dict[str, dict[int, list[float]]]] = {s: {} for s in skills}
    for day in days:
        for c in day.calls:
            if c.answered:
                ht_pooled[c.skill].append(c.handling_time)
                patience_obs[c.skill].append((c.waiting_time, True))
                agent_day[c.skill].setdefault(c.agent, {}).setdefault(
                    c.arrival_time.date().toordinal(), []).append(c.handling_time)
            else:
                patience_obs[c.skill].append((c.waiting_time, False))

    lognormal = {}
    for s in skills:
        try:
            fit = fit_lognormal(ht_pooled[s], min_duration=args.min_ht)
            lognormal[s] = {"mu_log": fit.mu_log, "sigma_log": fit.sigma_log,
                            "min_duration_filter": fit.min_duration_filter,
                            "n_used": fit.n_used}
        except ValueError:
            lognormal[s] = None

    patience_curves = {}
    patience_means = {}
    for s in skills:
        obs = patience_obs[s]
        if obs and any(not c for _, c in obs):
            curve = kaplan_meier(obs)
            patience_curves[s] = curve.to_dict()
            patience_means[s] = fit_exponential(obs)

    learning = {}
    fitted_aht: dict[str, dict[str, float]] = {}
    r_squared = {}
    for s in skills:
        if not agent_day[s]:
            continue
        fits = fit_agent_learning(agent_day[s])
        learning[s] = [f.to_dict() for f in fits]
        daily = daily_aht_fit(fits, agent_day[s])
        r_squared[s] = daily.r_squared
        fitted_aht[s] = {
            dt.date.fromordinal(d).isoformat(): b for d, b in zip(daily.days, daily.beta)
        }

    # arrival uniformity tests per skill and day
    nhpp_rows = []
    jitter_rng = substream(args.seed, "jitter") if args.jitter else None
    for sc in scenarios:
        for s in skills:
            rows = nhpp_test_table(
                sc.arrivals_exact[s], sc.interval_length, sc.n_intervals,
                opening=sc.opening, jitter=args.jitter, rng=jitter_rng,
            )
            for r in rows:
                nhpp_rows.append([sc.date.isoformat(), s, r.interval, r.n,
                                  r.p_value, r.k, r.per_test_level, int(r.rejected)])

    breaks = [a.duration for a in acts_result.records
              if a.activity in (Activity.BREAK_PAID, Activity.BREAK_UNPAID)]

    bundle = {
        "skills": skills,
        "n_days": len(scenarios),
        "wrapup_mean": wrap_mean,
        "lognormal": lognormal,
        "patience_curves": patience_curves,
        "patience_means": patience_means,
        "fitted_aht": fitted_aht,
        "learning": learning,
        "r_squared": r_squared,
        "shrinkage_mean": mean_shrinkage(shrink),
        "rejects": {"calls": len(calls_result.rejects),
                    "activities": len(acts_result.rejects)},
        "unknown_activities": acts_result.unknown_activities,
        "clamped_arrivals": sum(sc.clamped_arrivals for sc in scenarios),
    }
    _write_json(out / "analysis.json", bundle)

    for s in skills:
        _write_csv(out / f"ht_histogram_{s}.csv", ["bin_left", "bin_right", "count"],
                   _histogram_rows(ht_pooled[s], 15.0))
    _write_csv(out / "wrapup_histogram.csv", ["bin_left", "bin_right", "count"],
               _histogram_rows(wrap_all, 1.0))
    _write_csv(out / "break_durations.csv", ["bin_left", "bin_right", "count"],
               _histogram_rows(breaks, 60.0))
    _write_csv(out / "shrinkage.csv",
               ["agent", "break_time", "productive_plus_break_time", "shrinkage"],
               [(x.agent, x.break_time, x.productive_plus_break_time, x.shrinkage)
                for x in shrink])
    patience_rows = []
    for s in skills:
        if s in patience_curves:
            c = patience_curves[s]
            prev = 1.0
            for t, surv in zip(c["event_times"], c["survival"]):
                hazard = 1.0 - surv / prev if prev > 0 else 0.0
                patience_rows.append([s, t, 1.0 - surv, surv, hazard])
                prev = surv
    _write_csv(out / "patience_cdf.csv",
               ["skill", "time", "cdf", "survival", "hazard"], patience_rows)
    _write_csv(out / "nhpp_tests.csv",
               ["date", "skill", "interval", "N", "p_value", "k", "per_test_level", "rejected"],
               nhpp_rows)

    RunManifest.build("analyze", args.seed, [args.calls, args.activities],
                      {"config": cfg.__dict__, "top_skills": args.top_skills,
                       "min_ht": args.min_ht, "jitter": args.jitter},
                      ).write(str(out / "manifest.json"))

    summary = {"days": len(scenarios), "skills": skills,
               "calls": len(calls_result.records),
               "rejects": bundle["rejects"], "wrapup_mean": wrap_mean,
               "shrinkage_mean": bundle["shrinkage_mean"]}
    print(json.dumps(summary, sort_keys=True) if args.format == "json" else summary)
    return 0


# ---------------------------------------------------------------------------
# synth


def cmd_synth(args) -> int:
    out = _out_dir(args)
    if args.spec:
        with open(args.spec, "r", encoding="utf-8") as f:
            spec = SyntheticSpec.from_dict(json.load(f))
    else:
        spec = SyntheticSpec.example()
    if args.days:
        spec.n_days = args.days
    result = generate(spec, args.seed)
    write_logs(result, str(out / "calls.csv"), str(out / "activities.csv"),
               str(out / "truth.json"), _ingest_config(args.config))
    RunManifest.build("synth", args.seed, [args.spec or "<example>"],
                      {"spec": spec.to_dict()}).write(str(out / "manifest.json"))
    answered = sum(1 for c in result.calls if c.answered)
    summary = {"days": spec.n_days, "calls": len(result.calls),
               "answered": answered, "activity_rows": len(result.activities)}
    print(json.dumps(summary, sort_keys=True) if args.format == "json" else summary)
    return 0


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    out = _out_dir(args)
    scenario = load_scenario(args.scenario)
    label, config = load_model(args.model)
    pool = _load_scenarios(args.context_dir) if args.context_dir else [scenario]
    context = _context_for(pool, args.analysis)

    result = replicate(scenario, config, n=args.reps, seed=args.seed,
                       context=context, tta=args.tta, threads=args.threads)

    rows = [(i, m.offered, m.sl, m.ab, m.asa)
            for i, m in enumerate(result.metrics)]
    _write_csv(out / "replications.csv", ["rep", "offered", "sl", "ab", "asa"], rows)
    payload = {"scenario": scenario.date.isoformat(), "model": label,
               "config": config.to_dict(), "reps": args.reps,
               "summary": result.summary.to_dict(),
               "actual": scenario.actual.to_dict() if scenario.actual else None}
    _write_json(out / "summary.json", payload)
    RunManifest.build("simulate", args.seed, [args.scenario],
                      {"model": config.to_dict(), "reps": args.reps, "tta": args.tta},
                      ).write(str(out / "manifest.json"))
    if args.format == "json":
        print(json.dumps(payload["summary"], sort_keys=True))
    else:
        print("metric,mean,std,q2.5,median,q97.5")
        for m in METRIC_NAMES:
            q = result.summary.quantiles[m]
            print(f"{m},{result.summary.mean[m]},{result.summary.std[m]},{q[0]},{q[1]},{q[2]}")
    return 0


# ---------------------------------------------------------------------------
# validate / decompose


def _parse_models(text: str):
    if text.strip().casefold() == "all":
        return "all"
    return [t.strip() for t in text.split(",") if t.strip()]


def cmd_validate(args) -> int:
    out = _out_dir(args)
    scenarios = _load_scenarios(args.scenarios)
    context = _context_for(scenarios, args.analysis)
    results = validate_models(
        scenarios, _parse_models(args.models), reps=args.reps, seed=args.seed,
        context=context, tta=args.tta, noise_reps=args.noise_reps, threads=args.threads,
    )

    _write_json(out / "report.json", [r.to_dict() for r in results])

    per1 = [[r.report.preset] + [r.report.mae[m] for m in METRIC_NAMES]
            + [r.report.i_alpha[m] for m in METRIC_NAMES] for r in results]
    _write_csv(out / "per1.csv",
               ["Model", "MAE_SL", "MAE_Ab", "MAE_ASA",
                "I_alpha_SL", "I_alpha_Ab", "I_alpha_ASA"], per1)
    variab = [[r.report.preset] + [r.report.variability[m] for m in METRIC_NAMES]
              for r in results]
    _write_csv(out / "variab.csv",
               ["Model", "Variability of SL", "Variability of Ab", "Variability of ASA"],
               variab)
    above = [[r.report.preset] + [r.report.above_median[m] for m in METRIC_NAMES]
             for r in results]
    _write_csv(out / "actual.csv",
               ["Model", "P(SL > Q0.5_SL)", "P(Ab > Q0.5_Ab)", "P(ASA > Q0.5_ASA)"], above)
    decomp_rows = []
    for r in results:
        for m in METRIC_NAMES:
            d = r.decomposition[m]
            decomp_rows.append([r.report.preset, m, d.noise_mean, d.noise_std, d.noise_mae,
                                d.measured_mean, d.measured_std, d.measured_mae,
                                d.mu, d.sigma, d.corrected_mae, int(d.variance_clamped)])
    _write_csv(out / "decomposition.csv",
               ["Model", "metric", "noise_mean", "noise_std", "noise_mae",
                "measured_mean", "measured_std", "measured_mae",
                "mu", "sigma", "corrected_mae", "variance_clamped"], decomp_rows)

    RunManifest.build("validate", args.seed, [args.scenarios],
                      {"models": args.models, "reps": args.reps,
                       "noise_reps": args.noise_reps, "tta": args.tta},
                      ).write(str(out / "manifest.json"))
    if args.format == "json":
        print(json.dumps({r.report.preset: r.report.mae for r in results}, sort_keys=True))
    else:
        print("Model,MAE_SL,MAE_Ab,MAE_ASA")
        for r in results:
            print(",".join([r.report.preset] + [str(r.report.mae[m]) for m in METRIC_NAMES]))
    return 0


def cmd_decompose(args) -> int:
    out = _out_dir(args)
    scenarios = _load_scenarios(args.scenarios)
    context = _context_for(scenarios, args.analysis)
    label, config = load_model(args.model)
    comps = compare_days(scenarios, config, args.reps, args.seed, context,
                         tta=args.tta, threads=args.threads)
    noise = noise_cheating_stats(scenarios, config, args.noise_reps or args.reps,
                                 args.seed, context, tta=args.tta, threads=args.threads)
    decomp = decompose_errors(comps, noise)

    _write_json(out / "decomposition.json",
                {"model": label, "reps": args.reps,
                 "decomposition": {m: d.to_dict() for m, d in decomp.items()}})
    rows = []
    for i, c in enumerate(comps):
        for m in METRIC_NAMES:
            rows.append([c.day.isoformat(), m,
                         float(noise.samples[m][i]),
                         c.sim_mean[m] - c.actual[m]])
    _write_csv(out / "error_samples.csv",
               ["date", "metric", "noise_diff", "measured_diff"], rows)
    RunManifest.build("decompose", args.seed, [args.scenarios],
                      {"model": config.to_dict(), "reps": args.reps,
                       "noise_reps": args.noise_reps, "tta": args.tta},
                      ).write(str(out / "manifest.json"))
    print(json.dumps({m: d.to_dict() for m, d in decomp.items()}, sort_keys=True)
          if args.format == "json" else decomp)
    return 0


def cmd_presets(args) -> int:
    presets = all_presets()
    if args.format == "json":
        print(json.dumps([{**{"name": p.name}, **p.config.to_dict()} for p in presets],
                         sort_keys=True))
    else:
        print("name,arrival,ht,aht_per_day,wrapup,patience,breaks")
        for p in presets:
            c = p.config
            print(f"{p.name},{c.arrival},{c.ht},{c.aht_per_day},{c.wrapup},{c.patience},{c.breaks}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="ccsim",
                     description="Call center simulation and model validation")
    parser.add_argument("--version", action="version", version=f"ccsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", aliases=["fit"],
                       help="ingest logs and fit all estimators")
    p.add_argument("--calls", required=True, help="call log file")
    p.add_argument("--activities", required=True, help="activity log file")
    p.add_argument("--config", help=f"ingest config JSON (default: ${CONFIG_ENV})")
    p.add_argument("--exclusions", help="exclusion calendar, one ISO date per line")
    p.add_argument("--top-skills", type=int, default=0,
                   help="keep only the N busiest skills (0 = all)")
    p.add_argument("--min-ht", type=float, default=15.0,
                   help="short-call filter for the lognormal fit (seconds)")
    p.add_argument("--jitter", action="store_true",
                   help="jitter second-rounded arrivals before uniformity tests")
    _common_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="generate synthetic logs")
    p.add_argument("--spec", help="synthetic spec JSON (default: built-in example)")
    p.add_argument("--days", type=int,
                   help="override the number of days in the synthetic spec")
    p.add_argument("--config", help="ingest config JSON controlling the output format")
    _common_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("simulate", help="replicate one scenario under a model")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--model", required=True, help="preset name or model config file")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--tta", type=float, default=60.0)
    p.add_argument("--context-dir", help="scenario directory for period-level pooling")
    p.add_argument("--analysis", help="analysis.json providing fitted daily AHTs")
    _common_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="validate model presets against actuals")
    p.add_argument("--scenarios", required=True, help="scenario directory")
    p.add_argument("--models", default="all", help="'all' or comma-separated preset names")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--noise-reps", type=int, default=None)
    p.add_argument("--tta", type=float, default=60.0)
    p.add_argument("--analysis", help="analysis.json providing fitted daily AHTs")
    _common_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("decompose", help="error decomposition for one model")
    p.add_argument("--scenarios", required=True, help="scenario directory")
    p.add_argument("--model", required=True)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--noise-reps", type=int, default=None)
    p.add_argument("--tta", type=float, default=60.0)
    p.add_argument("--analysis", help="analysis.json providing fitted daily AHTs")
    _common_flags(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("presets", help="list the nine model presets")
    _common_flags(p)
    p.set_defaults(func=cmd_presets)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 1
    except (DataError, ConfigError) as exc:
        print(f"ccsim: error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, PermissionError, json.JSONDecodeError) as exc:
        print(f"ccsim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
