"""Synthetic call-center data generation.

Builds a full day-by-day world (agents with shifts, spontaneous paid
breaks, per-agent handling-time levels with optional learning decay,
wrap-up after every call, impatient callers) and emits a call log and an
activity log in exactly the formats the ingest pipeline reads, plus a
ground-truth file with the true parameters for recovery tests.

Unlike the staffing-level simulator in :mod:`ccsim.sim`, this generator
tracks individual agents, because the logs need agent identities and
mid-interval break intervals. It is run once per data set, so a plain
heap-based event loop is fast enough.
"""

from __future__ import annotations

import csv
import datetime as dt
import heapq
import json
import math
from dataclasses import dataclass, field
import numpy as np

from ccsim.errors import ConfigError
from ccsim.ingest import ActivityRecord, Activity, CallRecord, IngestConfig
from ccsim.rng import substream


@dataclass
class BreakSpec:
    """Spontaneous paid breaks: a Poisson stream of break starts during the
    shift, with durations drawn from a discrete mixture (peaks at 5, 10 and
    15 minutes by default)."""

    rate_per_hour: float = 0.0
    durations: tuple[float, ...] = (300.0, 600.0, 900.0)
    probs: tuple[float, ...] = (0.4, 0.35, 0.25)

    def validate(self) -> None:
        if self.rate_per_hour < 0:
            raise ConfigError("break rate must be >= 0")
        if len(self.durations) != len(self.probs):
            raise ConfigError("break durations and probs must align")
        if self.probs and abs(sum(self.probs) - 1.0) > 1e-9:
            raise ConfigError("break duration probabilities must sum to 1")


@dataclass
class GroupSpec:
    skills: list[str]
    n_agents: int
    shift_start: float = 0.0  # seconds from opening
    shift_end: float = 43200.0
    breaks: BreakSpec = field(default_factory=BreakSpec)


@dataclass
class PatienceSpec:
    """Exponential patience, or a mixture of exponentials ((weight, mean))."""

    kind: str = "exp"
    mean: float = 120.0
    components: list[tuple[float, float]] | None = None

    def validate(self) -> None:
        if self.kind not in ("exp", "mixture"):
            raise ConfigError(f"patience kind {self.kind!r} not in ('exp', 'mixture')")
        if self.kind == "mixture":
            if not self.components:
                raise ConfigError("mixture patience needs components")
            if abs(sum(w for w, _ in self.components) - 1.0) > 1e-9:
                raise ConfigError("mixture weights must sum to 1")


@dataclass
class LearningSpec:
    """Per-agent heterogeneity and learning: each agent gets a lognormal
    level multiplier (sigma on the log scale) and a decay rate per day."""

    level_sigma_log: float = 0.0
    gamma_low: float = 0.0
    gamma_high: float = 0.0


@dataclass
class SyntheticSpec:
    n_days: int
    skills: dict[str, list[float]]  # per-interval arrival rates
    groups: list[GroupSpec]
    ht: dict[str, tuple[float, float]]  # (mu_log, sigma_log) per skill
    patience: PatienceSpec = field(default_factory=PatienceSpec)
    wrapup_mean: float = 3.28
    learning: LearningSpec | None = None
    day_aht_sigma: float = 0.0  # lognormal day multiplier on the HT scale
    start_date: dt.date = dt.date(2014, 1, 6)
    opening: dt.time = dt.time(8, 0)
    interval_length: int = 1800

    def validate(self) -> None:
        if self.n_days < 1:
            raise ConfigError("n_days must be >= 1")
        if not self.skills:
            raise ConfigError("need at least one skill")
        lengths = {len(v) for v in self.skills.values()}
        if len(lengths) != 1:
            raise ConfigError("all skills need the same number of intervals")
        for s, rates in self.skills.items():
            if any(r < 0 for r in rates):
                raise ConfigError(f"negative arrival rate for skill {s}")
            if s not in self.ht:
                raise ConfigError(f"no handling-time parameters for skill {s}")
        for g in self.groups:
            g.breaks.validate()
            unknown = set(g.skills) - set(self.skills)
            if unknown:
                raise ConfigError(f"group references unknown skills {sorted(unknown)}")
        self.patience.validate()

    @property
    def n_intervals(self) -> int:
        return len(next(iter(self.skills.values())))

    def to_dict(self) -> dict:
        return {
            "n_days": self.n_days,
            "skills": {s: list(v) for s, v in self.skills.items()},
            "groups": [
                {
                    "skills": list(g.skills), "n_agents": g.n_agents,
                    "shift_start": g.shift_start, "shift_end": g.shift_end,
                    "breaks": {
                        "rate_per_hour": g.breaks.rate_per_hour,
                        "durations": list(g.breaks.durations),
                        "probs": list(g.breaks.probs),
                    },
                }
                for g in self.groups
            ],
            "ht": {s: list(v) for s, v in self.ht.items()},
            "patience": {
                "kind": self.patience.kind, "mean": self.patience.mean,
                "components": ([list(c) for c in self.patience.components]
                               if self.patience.components else None),
            },
            "wrapup_mean": self.wrapup_mean,
            "learning": (
                {"level_sigma_log": self.learning.level_sigma_log,
                 "gamma_low": self.learning.gamma_low,
                 "gamma_high": self.learning.gamma_high}
                if self.learning else None
            ),
            "day_aht_sigma": self.day_aht_sigma,
            "start_date": self.start_date.isoformat(),
            "opening": self.opening.isoformat(),
            "interval_length": self.interval_length,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        groups = [
            GroupSpec(
                skills=list(g["skills"]), n_agents=int(g["n_agents"]),
                shift_start=float(g.get("shift_start", 0.0)),
                shift_end=float(g.get("shift_end", 43200.0)),
                breaks=BreakSpec(
                    rate_per_hour=float(g.get("breaks", {}).get("rate_per_hour", 0.0)),
                    durations=tuple(g.get("breaks", {}).get("durations", (300.0, 600.0, 900.0))),
                    probs=tuple(g.get("breaks", {}).get("probs", (0.4, 0.35, 0.25))),
                ),
            )
            for g in d["groups"]
        ]
        pat = d.get("patience", {})
        learning = d.get("learning")
        spec = cls(
            n_days=int(d["n_days"]),
            skills={s: [float(x) for x in v] for s, v in d["skills"].items()},
            groups=groups,
            ht={s: (float(v[0]), float(v[1])) for s, v in d["ht"].items()},
            patience=PatienceSpec(
                kind=pat.get("kind", "exp"), mean=float(pat.get("mean", 120.0)),
                components=([tuple(c) for c in pat["components"]]
                            if pat.get("components") else None),
            ),
            wrapup_mean=float(d.get("wrapup_mean", 3.28)),
            learning=(LearningSpec(float(learning["level_sigma_log"]),
                                   float(learning["gamma_low"]),
                                   float(learning["gamma_high"]))
                      if learning else None),
            day_aht_sigma=float(d.get("day_aht_sigma", 0.0)),
            start_date=dt.date.fromisoformat(d.get("start_date", "2014-01-06")),
            opening=dt.time.fromisoformat(d.get("opening", "08:00:00")),
            interval_length=int(d.get("interval_length", 1800)),
        )
        spec.validate()
        return spec

    @classmethod
    def example(cls) -> "SyntheticSpec":
        """A small two-skill center, loaded to roughly 85% peak occupancy."""
        rates = [24.0, 30.0, 36.0, 40.0, 40.0, 37.0, 34.0, 34.0, 37.0, 40.0,
                 37.0, 30.0, 27.0, 27.0, 30.0, 34.0, 37.0, 34.0, 30.0, 27.0,
                 24.0, 20.0, 17.0, 14.0]
        half = [r * 0.5 for r in rates]
        return cls(
            n_days=20,
            skills={"3010": rates, "3020": half},
            groups=[
                GroupSpec(["3010"], 5, 0.0, 43200.0, BreakSpec(0.45)),
                GroupSpec(["3010", "3020"], 4, 0.0, 43200.0, BreakSpec(0.45)),
                GroupSpec(["3020"], 2, 1800.0, 41400.0, BreakSpec(0.45)),
            ],
            ht={"3010": (5.3, 0.55), "3020": (5.5, 0.5)},
            patience=PatienceSpec("mixture", components=[(0.6, 90.0), (0.4, 300.0)]),
            wrapup_mean=3.28,
            learning=LearningSpec(0.15, 0.0, 0.01),
            day_aht_sigma=0.08,
        )


@dataclass
class SynthResult:
    calls: list[CallRecord]
    activities: list[ActivityRecord]
    truth: dict


# internal call bookkeeping states
_WAITING, _SERVED, _LOST = 0, 1, 2


class _Agent:
    __slots__ = ("name", "skills", "shift_start", "shift_end", "breaks", "level",
                 "gamma", "state", "idle_since", "pending_breaks", "wraps",
                 "breaks_taken")

    def __init__(self, name, skills, shift_start, shift_end, breaks, level, gamma):
        self.name = name
        self.skills = skills
        self.shift_start = shift_start
        self.shift_end = shift_end
        self.breaks = breaks
        self.level = level
        self.gamma = gamma
        self.state = "off"
        self.idle_since = 0.0
        self.pending_breaks: list[float] = []
        self.wraps: list[tuple[float, float]] = []
        self.breaks_taken: list[tuple[float, float]] = []


def _draw_patience(spec: SyntheticSpec, rng: np.random.Generator) -> float:
    p = spec.patience
    if p.kind == "exp":
        return float(rng.exponential(p.mean))
    u = rng.random()
    acc = 0.0
    for w, mean in p.components:
        acc += w
        if u <= acc:
            return float(rng.exponential(mean))
    return float(rng.exponential(p.components[-1][1]))


def generate(spec: SyntheticSpec, seed: int) -> SynthResult:
    """Simulate the synthetic world and return log records plus ground truth."""
    spec.validate()
    skills = sorted(spec.skills)
    ilen = float(spec.interval_length)
    n_int = spec.n_intervals

    # agent population, stable across days
    agent_rng = substream(seed, "synth-agents")
    agents: list[_Agent] = []
    for g in spec.groups:
        for _ in range(g.n_agents):
            level = 1.0
            gamma = 0.0
            if spec.learning is not None:
                if spec.learning.level_sigma_log > 0:
                    level = float(np.exp(agent_rng.normal(0.0, spec.learning.level_sigma_log)))
                gamma = float(agent_rng.uniform(spec.learning.gamma_low,
                                                spec.learning.gamma_high))
            name = f"A{len(agents):03d}"
            agents.append(_Agent(name, sorted(g.skills), g.shift_start, g.shift_end,
                                 g.breaks, level, gamma))

    day_mults: list[float] = []
    calls_out: list[CallRecord] = []
    acts_out: list[ActivityRecord] = []

    for day_idx in range(spec.n_days):
        date = spec.start_date + dt.timedelta(days=day_idx)
        open_dt = dt.datetime.combine(date, spec.opening)
        rng = substream(seed, "synth-day", day_idx)

        if spec.day_aht_sigma > 0:
            s_d = spec.day_aht_sigma
            day_mult = float(np.exp(rng.normal(-0.5 * s_d * s_d, s_d)))
        else:
            day_mult = 1.0
        day_mults.append(day_mult)

        # breaks for the day
        for ag in agents:
            ag.state = "off"
            ag.pending_breaks = []
            ag.wraps = []
            ag.breaks_taken = []
        planned_breaks: list[tuple[float, int, float]] = []
        for ai, ag in enumerate(agents):
            rate = ag.breaks.rate_per_hour
            if rate <= 0:
                continue
            t = ag.shift_start
            while True:
                t += float(rng.exponential(3600.0 / rate))
                if t >= ag.shift_end:
                    break
                dur = float(rng.choice(ag.breaks.durations, p=ag.breaks.probs))
                if t + dur <= ag.shift_end:
                    planned_breaks.append((t, ai, dur))

        # arrivals
        arrivals: list[tuple[float, str, float]] = []  # (time, skill, patience)
        for s in skills:
            for i, rate in enumerate(spec.skills[s]):
                n = int(rng.poisson(rate)) if rate > 0 else 0
                for t in np.sort(i * ilen + ilen * rng.random(n)):
                    arrivals.append((float(t), s, _draw_patience(spec, rng)))
        arrivals.sort(key=lambda x: x[0])

        # event loop
        events: list[tuple[float, int, str, int]] = []
        seq = 0

        def push(t: float, kind: str, payload: int):
            nonlocal seq
            heapq.heappush(events, (t, seq, kind, payload))
            seq += 1

        for ai, ag in enumerate(agents):
            push(ag.shift_start, "on", ai)
            push(ag.shift_end, "off", ai)
        for bi, (t, ai, dur) in enumerate(planned_breaks):
            push(t, "brk", bi)
        call_state: list[int] = []
        call_rows: list[tuple[float, str, str | None, float | None, float]] = []
        queues: dict[str, list[int]] = {s: [] for s in skills}
        qhead: dict[str, int] = {s: 0 for s in skills}
        for ci, (t, s, pat) in enumerate(arrivals):
            push(t, "arr", ci)
            push(t + pat, "abn", ci)
            call_state.append(_WAITING)
            call_rows.append((t, s, None, None, t + pat))
        def draw_ht(ag: _Agent, skill: str) -> float:
            mu, sigma = spec.ht[skill]
            mu_eff = (mu + math.log(ag.level) - ag.gamma * day_idx + math.log(day_mult))
            return float(rng.lognormal(mu_eff, sigma))

        def serve(ai: int, ci: int, now: float):
            ag = agents[ai]
            t_arr, s, _, _, _ = call_rows[ci]
            ht = draw_ht(ag, s)
            wrap = float(rng.exponential(spec.wrapup_mean)) if spec.wrapup_mean > 0 else 0.0
            call_state[ci] = _SERVED
            call_rows[ci] = (t_arr, s, ag.name, now, now + ht)
            ag.wraps.append((now + ht, now + ht + wrap))
            ag.state = "busy"
            push(now + ht + wrap, "free", ai)

        def next_waiting(ag: _Agent, now: float) -> int:
            best_ci = -1
            best_t = math.inf
            for s in ag.skills:
                q = queues[s]
                h = qhead[s]
                while h < len(q) and call_state[q[h]] != _WAITING:
                    h += 1
                qhead[s] = h
                if h < len(q):
                    ci = q[h]
                    if call_rows[ci][0] < best_t:
                        best_t = call_rows[ci][0]
                        best_ci = ci
            return best_ci

        def go_idle(ai: int, now: float):
            ag = agents[ai]
            if now >= ag.shift_end:
                ag.state = "off"
                return
            if ag.pending_breaks:
                dur = ag.pending_breaks.pop(0)
                dur = min(dur, max(ag.shift_end - now, 1.0))
                ag.state = "break"
                ag.breaks_taken.append((now, now + dur))
                push(now + dur, "brk_end", ai)
                return
            ci = next_waiting(ag, now)
            if ci >= 0:
                serve(ai, ci, now)
            else:
                ag.state = "idle"
                ag.idle_since = now

        while events:
            now, _, kind, payload = heapq.heappop(events)
            if kind == "on":
                go_idle(payload, now)
            elif kind == "off":
                ag = agents[payload]
                if ag.state == "idle":
                    ag.state = "off"
                # busy or on break: handled when the current activity ends
            elif kind == "brk":
                t, ai, dur = planned_breaks[payload]
                ag = agents[ai]
                if ag.state == "idle":
                    ag.state = "break"
                    ag.breaks_taken.append((now, now + dur))
                    push(now + dur, "brk_end", ai)
                elif ag.state == "busy":
                    ag.pending_breaks.append(dur)
                # off already / on break: break is skipped
            elif kind == "brk_end":
                go_idle(payload, now)
            elif kind == "free":
                ai = payload
                if agents[ai].state == "busy":
                    go_idle(ai, now)
            elif kind == "arr":
                ci = payload
                t_arr, s, _, _, _ = call_rows[ci]
                best_ai = -1
                best_idle = math.inf
                for ai, ag in enumerate(agents):
                    if ag.state == "idle" and s in ag.skills and ag.idle_since < best_idle:
                        best_idle = ag.idle_since
                        best_ai = ai
                if best_ai >= 0:
                    serve(best_ai, ci, now)
                else:
                    queues[s].append(ci)
            elif kind == "abn":
                ci = payload
                if call_state[ci] == _WAITING:
                    call_state[ci] = _LOST

        # materialize log records (floor to whole seconds)
        def at(sec: float) -> dt.datetime:
            return open_dt + dt.timedelta(seconds=int(sec))

        for (t_arr, s, agent, t_ans, t_dep), st in zip(call_rows, call_state):
            if st == _SERVED:
                calls_out.append(CallRecord(at(t_arr), s, agent, at(t_ans), at(t_dep)))
            else:
                calls_out.append(CallRecord(at(t_arr), s, None, None, at(t_dep)))

        for ag in agents:
            end = ag.shift_end
            for a, b in ag.wraps:
                end = max(end, b)
            gaps = sorted(
                [(a, b, Activity.BREAK_PAID) for a, b in ag.breaks_taken]
                + [(a, b, Activity.WRAP_UP) for a, b in ag.wraps]
            )
            acts_out.append(ActivityRecord(Activity.LOGGING_IN,
                                           at(ag.shift_start - 120), at(ag.shift_start),
                                           ag.name))
            cursor = ag.shift_start
            for a, b, label in gaps:
                if at(a) > at(cursor):
                    acts_out.append(ActivityRecord(Activity.TAKING_CALLS,
                                                   at(cursor), at(a), ag.name))
                acts_out.append(ActivityRecord(label, at(a), at(b), ag.name))
                cursor = max(cursor, b)
            if at(end) > at(cursor):
                acts_out.append(ActivityRecord(Activity.TAKING_CALLS,
                                               at(cursor), at(end), ag.name))

    calls_out.sort(key=lambda c: (c.arrival_time, c.skill))
    acts_out.sort(key=lambda a: (a.agent, a.start_time))

    truth = {
        "spec": spec.to_dict(),
        "seed": seed,
        "agents": {
            ag.name: {
                "skills": ag.skills,
                "level": ag.level,
                "gamma": ag.gamma,
                "aht_by_skill": {
                    s: float(np.exp(spec.ht[s][0] + 0.5 * spec.ht[s][1] ** 2) * ag.level)
                    for s in ag.skills
                },
            }
            for ag in agents
        },
        "day_aht_multipliers": day_mults,
    }
    return SynthResult(calls_out, acts_out, truth)


_ACTIVITY_LABELS = {
    Activity.TAKING_CALLS: "Taking calls",
    Activity.WRAP_UP: "Wrap up",
    Activity.BREAK_PAID: "Break",
    Activity.BREAK_UNPAID: "Unpaid break",
    Activity.LOGGING_IN: "Logging in",
    Activity.MEETING: "Meeting",
    Activity.OTHER: "Other",
}


def write_logs(
    result: SynthResult,
    calls_path: str,
    activities_path: str,
    truth_path: str | None = None,
    config: IngestConfig | None = None,
) -> None:
    """Write the generated records in the ingest input formats."""
    config = config or IngestConfig()
    fmt = config.timestamp_format

    with open(calls_path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, delimiter=config.delimiter)
        w.writerow(["Call Arrival Time", "Skill ID", "Agent ID",
                    "Answered time", "Call Departure Time"])
        for c in result.calls:
            w.writerow([
                c.arrival_time.strftime(fmt), c.skill, c.agent or "",
                c.answered_time.strftime(fmt) if c.answered_time else "",
                c.departure_time.strftime(fmt),
            ])

    with open(activities_path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, delimiter=config.delimiter)
        w.writerow(["Activity", "Start time", "End time", "Agent ID"])
        for a in result.activities:
            w.writerow([_ACTIVITY_LABELS[a.activity], a.start_time.strftime(fmt),
                        a.end_time.strftime(fmt), a.agent])

    if truth_path:
        with open(truth_path, "w", encoding="utf-8") as f:
            json.dump(result.truth, f, sort_keys=True, indent=1)
            f.write("\n")
