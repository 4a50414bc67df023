"""Log ingestion: parse call and activity logs, clean them, and compile
per-day scenarios (arrival buckets, effective staffing with or without
breaks, wrap-up and shrinkage statistics).

Input files are delimited text with headers. The call log carries one row
per call (arrival, skill, agent, answered, departure); the activity log one
row per agent activity interval. Timestamps have second resolution. Rows
violating basic consistency (answered time outside [arrival, departure],
end before start, overlapping intervals of one agent) are rejected
individually with a reason rather than failing the whole file.
"""

from __future__ import annotations

import csv
import datetime as dt
import enum
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ccsim.errors import ConfigError, DataError
from ccsim.metrics import DEFAULT_TTA, DayMetrics, metrics_from_calls
import numpy as np

CALL_COLUMNS = (
    "Call Arrival Time",
    "Skill ID",
    "Agent ID",
    "Answered time",
    "Call Departure Time",
)

ACTIVITY_COLUMNS = ("Activity", "Start time", "End time", "Agent ID")


class Activity(enum.Enum):
    TAKING_CALLS = "taking_calls"
    WRAP_UP = "wrap_up"
    BREAK_PAID = "break_paid"
    BREAK_UNPAID = "break_unpaid"
    LOGGING_IN = "logging_in"
    MEETING = "meeting"
    OTHER = "other"


#: default mapping from activity-log names (case-insensitive) to categories;
#: "16" is the conventional numeric id for wrap-up
DEFAULT_ACTIVITY_MAP = {
    "taking calls": Activity.TAKING_CALLS,
    "wrap up": Activity.WRAP_UP,
    "wrap-up": Activity.WRAP_UP,
    "16": Activity.WRAP_UP,
    "break": Activity.BREAK_PAID,
    "paid break": Activity.BREAK_PAID,
    "unpaid break": Activity.BREAK_UNPAID,
    "lunch": Activity.BREAK_UNPAID,
    "logging in": Activity.LOGGING_IN,
    "meeting": Activity.MEETING,
    "other": Activity.OTHER,
}

WORKING_STATES = frozenset({Activity.TAKING_CALLS, Activity.WRAP_UP})
BREAK_STATES = frozenset({Activity.BREAK_PAID, Activity.BREAK_UNPAID})


@dataclass(frozen=True)
class IngestConfig:
    """File-format and compilation settings for the ingest pipeline."""

    delimiter: str = ","
    timestamp_format: str = "%m/%d/%Y %H:%M:%S"
    opening: dt.time = dt.time(8, 0)
    closing: dt.time = dt.time(20, 0)
    interval_length: int = 1800
    activity_map: Mapping[str, Activity] = field(default_factory=lambda: dict(DEFAULT_ACTIVITY_MAP))
    # unpaid (lunch) breaks subtracted from staffing like paid ones by default:
    # an agent at lunch cannot take calls
    subtract_unpaid_breaks: bool = True
    # group agents by identical skill set; pooled=True collapses everyone
    # into a single group holding the union of skills
    pooled_groups: bool = False

    @property
    def n_intervals(self) -> int:
        open_s = _time_to_seconds(self.opening)
        close_s = _time_to_seconds(self.closing)
        span = close_s - open_s
        if span <= 0 or span % self.interval_length:
            raise ConfigError(
                f"interval_length {self.interval_length} does not divide opening hours "
                f"{self.opening}-{self.closing}"
            )
        return span // self.interval_length

    @classmethod
    def from_json(cls, path: str) -> "IngestConfig":
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
        kwargs = {}
        for key in ("delimiter", "timestamp_format", "interval_length",
                    "subtract_unpaid_breaks", "pooled_groups"):
            if key in raw:
                kwargs[key] = raw[key]
        for key in ("opening", "closing"):
            if key in raw:
                kwargs[key] = dt.time.fromisoformat(raw[key])
        if "activity_map" in raw:
            try:
                kwargs["activity_map"] = {
                    name.casefold(): Activity(value) for name, value in raw["activity_map"].items()
                }
            except ValueError as exc:
                raise ConfigError(f"bad activity mapping in {path}: {exc}") from exc
        return cls(**kwargs)


def _time_to_seconds(t: dt.time) -> int:
    return t.hour * 3600 + t.minute * 60 + t.second


@dataclass(frozen=True)
class CallRecord:
    arrival_time: dt.datetime
    skill: str
    agent: str | None
    answered_time: dt.datetime | None
    departure_time: dt.datetime

    @property
    def answered(self) -> bool:
        return self.answered_time is not None

    @property
    def waiting_time(self) -> float:
        """Seconds in queue: until answer, or until abandonment."""
        end = self.answered_time if self.answered else self.departure_time
        return (end - self.arrival_time).total_seconds()

    @property
    def handling_time(self) -> float | None:
        if not self.answered:
            return None
        return (self.departure_time - self.answered_time).total_seconds()


@dataclass(frozen=True)
class ActivityRecord:
    activity: Activity
    start_time: dt.datetime
    end_time: dt.datetime
    agent: str

    @property
    def duration(self) -> float:
        return (self.end_time - self.start_time).total_seconds()


@dataclass(frozen=True)
class Reject:
    line_no: int
    raw: str
    reason: str


@dataclass
class CallLogResult:
    records: list[CallRecord]
    rejects: list[Reject]


@dataclass
class ActivityLogResult:
    records: list[ActivityRecord]
    rejects: list[Reject]
    unknown_activities: int = 0


@dataclass(frozen=True)
class ShrinkageStat:
    agent: str
    break_time: float
    productive_plus_break_time: float
    shrinkage: float


@dataclass
class DayLogs:
    """One calendar day's slice of both logs; raw material for a scenario."""

    date: dt.date
    calls: list[CallRecord]
    activities: list[ActivityRecord]


@dataclass
class DayScenario:
    """One day's compiled simulation input.

    Staffing is per agent group (agents sharing an identical skill set) and
    per interval; ``staffing`` has break time subtracted, ``staffing_no_breaks``
    counts break time as if worked. Arrival times are seconds from opening.
    """

    date: dt.date
    interval_length: int
    n_intervals: int
    opening: dt.time
    skills: list[str]
    arrivals_exact: dict[str, list[float]]
    arrival_counts: dict[str, list[int]]
    groups: dict[str, list[str]]
    staffing: dict[str, list[int]]
    staffing_no_breaks: dict[str, list[int]]
    ht_samples_day: dict[str, list[float]]
    ht_mean_day: dict[str, float]
    wrapup_mean: float
    patience_observations: dict[str, list[tuple[float, bool]]]
    clamped_arrivals: int = 0
    actual: DayMetrics | None = None

    @property
    def horizon(self) -> float:
        return float(self.n_intervals * self.interval_length)

    def validate(self) -> None:
        for s in self.skills:
            counts = self.arrival_counts[s]
            if len(counts) != self.n_intervals:
                raise DataError(f"{self.date}: skill {s} has {len(counts)} intervals, "
                                f"expected {self.n_intervals}")
            recount = _bucket_counts(self.arrivals_exact[s], self.interval_length, self.n_intervals)
            if recount != counts:
                raise DataError(f"{self.date}: arrival counts inconsistent for skill {s}")
        for g, prof in self.staffing.items():
            for a, b in zip(prof, self.staffing_no_breaks[g]):
                if a > b:
                    raise DataError(f"{self.date}: staffing with breaks exceeds "
                                    f"no-breaks staffing for group {g}")

    def to_dict(self) -> dict:
        return {
            "date": self.date.isoformat(),
            "interval_length": self.interval_length,
            "n_intervals": self.n_intervals,
            "opening": self.opening.isoformat(),
            "skills": list(self.skills),
            "arrivals_exact": self.arrivals_exact,
            "arrival_counts": self.arrival_counts,
            "groups": self.groups,
            "staffing": self.staffing,
            "staffing_no_breaks": self.staffing_no_breaks,
            "ht_samples_day": self.ht_samples_day,
            "ht_mean_day": self.ht_mean_day,
            "wrapup_mean": self.wrapup_mean,
            "patience_observations": {
                s: [[d, bool(c)] for d, c in obs]
                for s, obs in self.patience_observations.items()
            },
            "clamped_arrivals": self.clamped_arrivals,
            "actual": self.actual.to_dict() if self.actual is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DayScenario":
        return cls(
            date=dt.date.fromisoformat(d["date"]),
            interval_length=int(d["interval_length"]),
            n_intervals=int(d["n_intervals"]),
            opening=dt.time.fromisoformat(d["opening"]),
            skills=list(d["skills"]),
            arrivals_exact={s: [float(x) for x in v] for s, v in d["arrivals_exact"].items()},
            arrival_counts={s: [int(x) for x in v] for s, v in d["arrival_counts"].items()},
            groups={g: list(v) for g, v in d["groups"].items()},
            staffing={g: [int(x) for x in v] for g, v in d["staffing"].items()},
            staffing_no_breaks={g: [int(x) for x in v] for g, v in d["staffing_no_breaks"].items()},
            ht_samples_day={s: [float(x) for x in v] for s, v in d["ht_samples_day"].items()},
            ht_mean_day={s: float(v) for s, v in d["ht_mean_day"].items()},
            wrapup_mean=float(d["wrapup_mean"]),
            patience_observations={
                s: [(float(x), bool(c)) for x, c in v]
                for s, v in d["patience_observations"].items()
            },
            clamped_arrivals=int(d.get("clamped_arrivals", 0)),
            actual=DayMetrics.from_dict(d["actual"]) if d.get("actual") else None,
        )


def save_scenario(scenario: DayScenario, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(scenario.to_dict(), f, sort_keys=True, indent=1)
        f.write("\n")


def load_scenario(path: str) -> DayScenario:
    with open(path, "r", encoding="utf-8") as f:
        return DayScenario.from_dict(json.load(f))


# ---------------------------------------------------------------------------
# parsing


def _open_stream(stream) -> io.TextIOBase:
    if isinstance(stream, (str, bytes)) and not isinstance(stream, bytes):
        return open(stream, "r", encoding="utf-8", newline="")
    if isinstance(stream, bytes):
        return io.StringIO(stream.decode("utf-8"))
    if isinstance(stream, io.TextIOBase):
        return stream
    # binary file object
    return io.TextIOWrapper(stream, encoding="utf-8")


def _check_header(row: list[str], expected: Sequence[str], what: str) -> list[int]:
    got = [c.strip().casefold() for c in row]
    want = [c.casefold() for c in expected]
    try:
        return [got.index(w) for w in want]
    except ValueError:
        raise DataError(f"malformed {what} header: expected columns {list(expected)}, got {row}")


def _parse_ts(text: str, fmt: str) -> dt.datetime:
    return dt.datetime.strptime(text.strip(), fmt)


def parse_call_log(stream, config: IngestConfig | None = None) -> CallLogResult:
    """Parse a call log. Rows with unparseable fields or with an answered
    time outside [arrival, departure] become rejects, not errors; a bad
    header is fatal."""
    config = config or IngestConfig()
    f = _open_stream(stream)
    reader = csv.reader(f, delimiter=config.delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty call log: missing header")
    idx = _check_header(header, CALL_COLUMNS, "call log")

    records: list[CallRecord] = []
    rejects: list[Reject] = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        raw = config.delimiter.join(row)
        if len(row) < len(CALL_COLUMNS):
            rejects.append(Reject(line_no, raw, "wrong number of fields"))
            continue
        try:
            arrival = _parse_ts(row[idx[0]], config.timestamp_format)
            skill = row[idx[1]].strip()
            agent = row[idx[2]].strip() or None
            answered_text = row[idx[3]].strip()
            answered = _parse_ts(answered_text, config.timestamp_format) if answered_text else None
            departure = _parse_ts(row[idx[4]], config.timestamp_format)
        except ValueError as exc:
            rejects.append(Reject(line_no, raw, f"unparseable row: {exc}"))
            continue
        if not skill:
            rejects.append(Reject(line_no, raw, "missing skill"))
            continue
        if departure < arrival:
            rejects.append(Reject(line_no, raw, "departure before arrival"))
            continue
        if answered is not None and not (arrival <= answered <= departure):
            rejects.append(Reject(line_no, raw, "answered time outside [arrival, departure]"))
            continue
        records.append(CallRecord(arrival, skill, agent, answered, departure))
    return CallLogResult(records, rejects)


def parse_activity_log(stream, config: IngestConfig | None = None) -> ActivityLogResult:
    """Parse an activity log. Unknown activity names map to OTHER (counted);
    per-agent overlapping intervals reject the later record."""
    config = config or IngestConfig()
    amap = {k.casefold(): v for k, v in config.activity_map.items()}
    f = _open_stream(stream)
    reader = csv.reader(f, delimiter=config.delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty activity log: missing header")
    idx = _check_header(header, ACTIVITY_COLUMNS, "activity log")

    parsed: list[tuple[int, str, ActivityRecord]] = []
    rejects: list[Reject] = []
    unknown = 0
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        raw = config.delimiter.join(row)
        if len(row) < len(ACTIVITY_COLUMNS):
            rejects.append(Reject(line_no, raw, "wrong number of fields"))
            continue
        try:
            name = row[idx[0]].strip()
            start = _parse_ts(row[idx[1]], config.timestamp_format)
            end = _parse_ts(row[idx[2]], config.timestamp_format)
            agent = row[idx[3]].strip()
        except ValueError as exc:
            rejects.append(Reject(line_no, raw, f"unparseable row: {exc}"))
            continue
        if end < start:
            rejects.append(Reject(line_no, raw, "end before start"))
            continue
        if not agent:
            rejects.append(Reject(line_no, raw, "missing agent"))
            continue
        activity = amap.get(name.casefold())
        if activity is None:
            activity = Activity.OTHER
            unknown += 1
        parsed.append((line_no, raw, ActivityRecord(activity, start, end, agent)))

    # overlap sweep per agent, by start time; the record starting inside an
    # already kept interval is the reject
    records: list[ActivityRecord] = []
    by_agent: dict[str, list[tuple[int, str, ActivityRecord]]] = {}
    for item in parsed:
        by_agent.setdefault(item[2].agent, []).append(item)
    for agent in sorted(by_agent):
        items = sorted(by_agent[agent], key=lambda it: (it[2].start_time, it[0]))
        last_end: dt.datetime | None = None
        for line_no, raw, rec in items:
            if last_end is not None and rec.start_time < last_end:
                rejects.append(Reject(line_no, raw, "overlaps previous interval of same agent"))
                continue
            records.append(rec)
            last_end = max(last_end, rec.end_time) if last_end else rec.end_time
    records.sort(key=lambda r: (r.agent, r.start_time))
    rejects.sort(key=lambda r: r.line_no)
    return ActivityLogResult(records, rejects, unknown)


def read_exclusion_calendar(path: str) -> set[dt.date]:
    """One ISO date per line; blank lines and #-comments ignored."""
    out: set[dt.date] = set()
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                out.add(dt.date.fromisoformat(text))
            except ValueError:
                raise DataError(f"bad date {text!r} on line {line_no} of exclusion calendar")
    return out


# ---------------------------------------------------------------------------
# day partitioning and scenario compilation


def partition_days(
    calls: Iterable[CallRecord],
    activities: Iterable[ActivityRecord],
    exclusions: set[dt.date] | None = None,
) -> list[DayLogs]:
    """Split both logs by calendar day, dropping excluded dates."""
    exclusions = exclusions or set()
    buckets: dict[dt.date, DayLogs] = {}
    for c in calls:
        d = c.arrival_time.date()
        if d in exclusions:
            continue
        buckets.setdefault(d, DayLogs(d, [], [])).calls.append(c)
    for a in activities:
        d = a.start_time.date()
        if d in exclusions:
            continue
        buckets.setdefault(d, DayLogs(d, [], [])).activities.append(a)
    days = [buckets[d] for d in sorted(buckets)]
    for day in days:
        day.calls.sort(key=lambda c: c.arrival_time)
        day.activities.sort(key=lambda a: (a.agent, a.start_time))
    return days


def _bucket_counts(times: Sequence[float], interval_length: int, n_intervals: int) -> list[int]:
    counts = [0] * n_intervals
    for t in times:
        i = int(t // interval_length)
        counts[min(max(i, 0), n_intervals - 1)] += 1
    return counts


def bucket_arrivals(
    calls: Sequence[CallRecord],
    opening_dt: dt.datetime,
    interval_length: int,
    n_intervals: int,
) -> tuple[dict[str, list[float]], dict[str, list[int]], int]:
    """Exact arrival offsets (seconds from opening) and per-interval counts,
    per skill. Calls outside opening hours are clamped into the boundary
    interval and counted in the returned flag."""
    horizon = interval_length * n_intervals
    exact: dict[str, list[float]] = {}
    clamped = 0
    for c in calls:
        t = (c.arrival_time - opening_dt).total_seconds()
        if t < 0:
            t = 0.0
            clamped += 1
        elif t >= horizon:
            t = horizon - 1e-6
            clamped += 1
        exact.setdefault(c.skill, []).append(t)
    counts = {
        s: _bucket_counts(v, interval_length, n_intervals) for s, v in exact.items()
    }
    return exact, counts, clamped


def round_half_away(x: float) -> int:
    """Round to nearest integer, halves away from zero."""
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def group_name(skills: Iterable[str]) -> str:
    return "+".join(sorted(skills))


def build_groups(
    agent_skills: Mapping[str, Iterable[str]], pooled: bool = False
) -> tuple[dict[str, list[str]], dict[str, str]]:
    """Map agents with identical skill sets into groups.

    Returns (group -> sorted skill list, agent -> group). With pooled=True
    all agents land in one group holding the union of skills.
    """
    if pooled:
        union: set[str] = set()
        for skills in agent_skills.values():
            union.update(skills)
        name = group_name(union) if union else "pooled"
        return {name: sorted(union)}, {a: name for a in agent_skills}
    groups: dict[str, list[str]] = {}
    assignment: dict[str, str] = {}
    for agent in sorted(agent_skills):
        skills = sorted(set(agent_skills[agent]))
        name = group_name(skills)
        groups.setdefault(name, skills)
        assignment[agent] = name
    return groups, assignment


def infer_skill_sets(calls: Iterable[CallRecord]) -> dict[str, set[str]]:
    """Skill set per agent as observed in the call log (answered calls)."""
    out: dict[str, set[str]] = {}
    for c in calls:
        if c.agent is not None:
            out.setdefault(c.agent, set()).add(c.skill)
    return out


def compute_staffing(
    activities: Sequence[ActivityRecord],
    agent_to_group: Mapping[str, str],
    groups: Mapping[str, Sequence[str]],
    opening_dt: dt.datetime,
    interval_length: int,
    n_intervals: int,
    subtract_breaks: bool = True,
    subtract_unpaid_breaks: bool = True,
) -> dict[str, list[int]]:
    """Effective agent counts per group and interval.

    For each agent, seconds in working states (taking calls, wrap-up, which
    covers waiting for calls) are accumulated per interval; with
    ``subtract_breaks`` False, break time counts as worked. Activities that
    are neither work nor breaks (meetings, logging in, other) never count.
    The per-interval count is worked seconds / interval length, rounded half
    away from zero.
    """
    horizon = interval_length * n_intervals
    seconds: dict[str, np.ndarray] = {g: np.zeros(n_intervals) for g in groups}
    break_states = BREAK_STATES if subtract_unpaid_breaks else frozenset({Activity.BREAK_PAID})
    for rec in activities:
        counted = rec.activity in WORKING_STATES or (
            not subtract_breaks and rec.activity in break_states
        )
        if not counted:
            continue
        g = agent_to_group.get(rec.agent)
        if g is None:
            raise ConfigError(f"agent {rec.agent!r} has no skill-set entry")
        a = (rec.start_time - opening_dt).total_seconds()
        b = (rec.end_time - opening_dt).total_seconds()
        a, b = max(a, 0.0), min(b, float(horizon))
        if b <= a:
            continue
        first = int(a // interval_length)
        last = int(min(b, horizon - 1e-9) // interval_length)
        arr = seconds[g]
        for i in range(first, last + 1):
            lo = i * interval_length
            hi = lo + interval_length
            arr[i] += min(b, hi) - max(a, lo)
    return {
        g: [round_half_away(v / interval_length) for v in seconds[g]] for g in sorted(groups)
    }


def extract_wrapups(activities: Iterable[ActivityRecord]) -> tuple[list[float], float]:
    """All wrap-up durations (zero-length ones included) and their mean
    (0 by convention when there are none)."""
    durations = [a.duration for a in activities if a.activity is Activity.WRAP_UP]
    mean = sum(durations) / len(durations) if durations else 0.0
    return durations, mean


def compute_shrinkage(
    activities: Iterable[ActivityRecord],
    include_unpaid: bool = True,
) -> list[ShrinkageStat]:
    """Per-agent shrinkage: break time / (working + break time).

    Agents with a zero denominator are excluded with a warning.
    """
    break_states = BREAK_STATES if include_unpaid else frozenset({Activity.BREAK_PAID})
    work: dict[str, float] = {}
    brk: dict[str, float] = {}
    for a in activities:
        if a.activity in WORKING_STATES:
            work[a.agent] = work.get(a.agent, 0.0) + a.duration
            brk.setdefault(a.agent, 0.0)
        elif a.activity in break_states:
            brk[a.agent] = brk.get(a.agent, 0.0) + a.duration
            work.setdefault(a.agent, 0.0)
    stats = []
    for agent in sorted(work):
        denom = work[agent] + brk[agent]
        if denom <= 0:
            warnings.warn(f"agent {agent}: no working or break time, shrinkage undefined")
            continue
        stats.append(ShrinkageStat(agent, brk[agent], denom, brk[agent] / denom))
    return stats


def mean_shrinkage(stats: Sequence[ShrinkageStat]) -> float:
    return sum(s.shrinkage for s in stats) / len(stats) if stats else 0.0


def actual_metrics(calls: Sequence[CallRecord], tta: float = DEFAULT_TTA) -> DayMetrics:
    """Realized day performance straight from the call log."""
    status = np.array([0 if c.answered else 1 for c in calls], dtype=np.int8)
    wait = np.array([c.waiting_time for c in calls], dtype=float)
    return metrics_from_calls(status, wait, tta=tta)


def compile_scenario(
    day: DayLogs,
    config: IngestConfig,
    agent_skills: Mapping[str, Iterable[str]],
    skills: Sequence[str] | None = None,
    wrapup_mean: float | None = None,
    tta: float = DEFAULT_TTA,
) -> DayScenario:
    """Compile one day's logs into a simulation-ready scenario.

    ``agent_skills`` maps every agent appearing in the activity log to a
    skill set (see :func:`infer_skill_sets`). ``wrapup_mean`` defaults to the
    day's own mean wrap-up duration; pass a full-period mean to pin it.
    """
    opening_dt = dt.datetime.combine(day.date, config.opening)
    n_intervals = config.n_intervals

    exact, counts, clamped = bucket_arrivals(
        day.calls, opening_dt, config.interval_length, n_intervals
    )
    skill_list = sorted(skills) if skills is not None else sorted(exact)
    for s in skill_list:
        exact.setdefault(s, [])
        counts.setdefault(s, [0] * n_intervals)
    extra = set(exact) - set(skill_list)
    if extra:
        raise DataError(f"{day.date}: calls for skills outside the skill list: {sorted(extra)}")

    groups, agent_to_group = build_groups(agent_skills, pooled=config.pooled_groups)
    common = dict(
        agent_to_group=agent_to_group,
        groups=groups,
        opening_dt=opening_dt,
        interval_length=config.interval_length,
        n_intervals=n_intervals,
        subtract_unpaid_breaks=config.subtract_unpaid_breaks,
    )
    staffing = compute_staffing(day.activities, subtract_breaks=True, **common)
    staffing_nb = compute_staffing(day.activities, subtract_breaks=False, **common)

    ht_samples: dict[str, list[float]] = {s: [] for s in skill_list}
    patience: dict[str, list[tuple[float, bool]]] = {s: [] for s in skill_list}
    for c in day.calls:
        if c.answered:
            ht_samples[c.skill].append(c.handling_time)
            patience[c.skill].append((c.waiting_time, True))
        else:
            patience[c.skill].append((c.waiting_time, False))
    ht_mean = {s: (sum(v) / len(v) if v else 0.0) for s, v in ht_samples.items()}

    if wrapup_mean is None:
        _, wrapup_mean = extract_wrapups(day.activities)

    scenario = DayScenario(
        date=day.date,
        interval_length=config.interval_length,
        n_intervals=n_intervals,
        opening=config.opening,
        skills=skill_list,
        arrivals_exact={s: sorted(exact[s]) for s in skill_list},
        arrival_counts={s: counts[s] for s in skill_list},
        groups=groups,
        staffing=staffing,
        staffing_no_breaks=staffing_nb,
        ht_samples_day=ht_samples,
        ht_mean_day=ht_mean,
        wrapup_mean=wrapup_mean,
        patience_observations=patience,
        clamped_arrivals=clamped,
        actual=actual_metrics(day.calls, tta=tta),
    )
    scenario.validate()
    return scenario
