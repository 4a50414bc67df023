"""Event-driven execution of one simulated day.

The inner loop is written against flat numpy arrays so numba can compile it
(module import applies ``@njit`` unless the CCSIM_JIT environment variable
disables it or numba is unavailable; the same functions then run as plain
Python). Randomness is drawn up front per call in the Python layer, so the
kernel itself is deterministic and both execution modes produce bit-identical
results.

Routing is Longest Idle Agent - Longest Waiting Call: an arriving call goes
to the eligible agent idle the longest, else it queues FCFS per skill; a
freed or newly staffed agent takes the earliest-arrived waiting call among
its skills. Staffing changes at interval boundaries remove idle agents
first; busy agents finish their call before leaving. After closing, the
queue drains under the final interval's staffing; waiting callers with
finite patience eventually abandon, infinitely patient ones are counted as
unresolved and excluded from the ASA.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ccsim.errors import ConfigError
from ccsim.ingest import DayScenario
from ccsim.metrics import DEFAULT_TTA, DayMetrics, metrics_from_calls
from ccsim.models import ModelConfig
from ccsim.rng import substream
from ccsim.sim.sampling import (
    SimContext,
    generate_arrivals,
    sample_handling_times,
    sample_patiences,
)

JIT_ENABLED = os.environ.get("CCSIM_JIT", "1").strip().lower() not in ("0", "false", "no", "off")
try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay runnable
    njit = None
    JIT_ENABLED = False


def _jit(fn):
    if JIT_ENABLED and njit is not None:
        return njit(cache=True, nogil=True)(fn)
    return fn


_INF = np.inf

# agent states
_OFF = 0
_IDLE = 1
_BUSY = 2
_LEAVING = 3  # busy, leaves after the current call


@_jit
def _hpush(heap_t, heap_a, heap_n, t, a):
    i = heap_n[0]
    heap_t[i] = t
    heap_a[i] = a
    while i > 0:
        p = (i - 1) // 2
        if heap_t[p] > heap_t[i] or (heap_t[p] == heap_t[i] and heap_a[p] > heap_a[i]):
            heap_t[p], heap_t[i] = heap_t[i], heap_t[p]
            heap_a[p], heap_a[i] = heap_a[i], heap_a[p]
            i = p
        else:
            break
    heap_n[0] = heap_n[0] + 1


@_jit
def _hpop(heap_t, heap_a, heap_n):
    t0 = heap_t[0]
    a0 = heap_a[0]
    n = heap_n[0] - 1
    heap_t[0] = heap_t[n]
    heap_a[0] = heap_a[n]
    heap_n[0] = n
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        m = i
        if l < n and (heap_t[l] < heap_t[m] or (heap_t[l] == heap_t[m] and heap_a[l] < heap_a[m])):
            m = l
        if r < n and (heap_t[r] < heap_t[m] or (heap_t[r] == heap_t[m] and heap_a[r] < heap_a[m])):
            m = r
        if m == i:
            break
        heap_t[m], heap_t[i] = heap_t[i], heap_t[m]
        heap_a[m], heap_a[i] = heap_a[i], heap_a[m]
        i = m
    return t0, a0


@_jit
def _queue_head(s, now, q_lo, q_hi, skill_calls, arr_time, patience, status, wait):
    # advance past calls that abandoned strictly before now, marking them
    lo = q_lo[s]
    hi = q_hi[s]
    head = np.int64(-1)
    while lo < hi:
        c = skill_calls[lo]
        if arr_time[c] + patience[c] < now:
            status[c] = 1
            wait[c] = patience[c]
            lo += 1
        else:
            head = c
            break
    q_lo[s] = lo
    return head


@_jit
def _take_longest_waiting(a, now, agent_group, group_skill, q_lo, q_hi, skill_calls,
                          arr_time, patience, ht, status, wait, state,
                          heap_t, heap_a, heap_n):
    # earliest arrival among the agent's skills; ties go to the lowest skill
    g = agent_group[a]
    n_skills = group_skill.shape[1]
    best_c = np.int64(-1)
    best_s = -1
    best_t = _INF
    for s in range(n_skills):
        if group_skill[g, s]:
            c = _queue_head(s, now, q_lo, q_hi, skill_calls, arr_time, patience, status, wait)
            if c >= 0 and arr_time[c] < best_t:
                best_t = arr_time[c]
                best_c = c
                best_s = s
    if best_c >= 0:
        q_lo[best_s] = q_lo[best_s] + 1
        status[best_c] = 0
        wait[best_c] = now - arr_time[best_c]
        state[a] = _BUSY
        _hpush(heap_t, heap_a, heap_n, now + ht[best_c], a)


@_jit
def _apply_staffing(g, target, now, base, state, idle_since, active,
                    agent_group, group_skill, q_lo, q_hi, skill_calls,
                    arr_time, patience, ht, status, wait, heap_t, heap_a, heap_n):
    cur = active[g]
    if target > cur:
        need = target - cur
        a = base[g]
        while need > 0 and a < base[g + 1]:  # recall leaving agents first
            if state[a] == _LEAVING:
                state[a] = _BUSY
                active[g] += 1
                need -= 1
            a += 1
        a = base[g]
        while need > 0 and a < base[g + 1]:
            if state[a] == _OFF:
                state[a] = _IDLE
                idle_since[a] = now
                active[g] += 1
                need -= 1
                _take_longest_waiting(a, now, agent_group, group_skill, q_lo, q_hi,
                                      skill_calls, arr_time, patience, ht, status, wait,
                                      state, heap_t, heap_a, heap_n)
            a += 1
    elif target < cur:
        need = cur - target
        a = base[g + 1] - 1
        while need > 0 and a >= base[g]:  # idle agents leave first
            if state[a] == _IDLE:
                state[a] = _OFF
                active[g] -= 1
                need -= 1
            a -= 1
        a = base[g + 1] - 1
        while need > 0 and a >= base[g]:
            if state[a] == _BUSY:
                state[a] = _LEAVING
                active[g] -= 1
                need -= 1
            a -= 1


@_jit
def _simulate_day_core(arr_time, arr_skill, patience, ht, skill_calls, skill_ptr,
                       group_skill, staffing, interval_len):
    n_calls = arr_time.shape[0]
    n_groups = staffing.shape[0]
    n_intervals = staffing.shape[1]
    n_skills = skill_ptr.shape[0] - 1

    base = np.zeros(n_groups + 1, np.int64)
    for g in range(n_groups):
        mx = 0
        for i in range(n_intervals):
            if staffing[g, i] > mx:
                mx = staffing[g, i]
        base[g + 1] = base[g] + mx
    n_agents = base[n_groups]

    state = np.zeros(n_agents, np.int8)
    idle_since = np.zeros(n_agents, np.float64)
    agent_group = np.zeros(n_agents, np.int64)
    for g in range(n_groups):
        for a in range(base[g], base[g + 1]):
            agent_group[a] = g
    active = np.zeros(n_groups, np.int64)

    heap_t = np.empty(n_agents + 1, np.float64)
    heap_a = np.empty(n_agents + 1, np.int64)
    heap_n = np.zeros(1, np.int64)

    q_lo = skill_ptr[:n_skills].copy()
    q_hi = skill_ptr[:n_skills].copy()

    status = np.full(n_calls, -1, np.int8)
    wait = np.zeros(n_calls, np.float64)

    for g in range(n_groups):
        _apply_staffing(g, staffing[g, 0], 0.0, base, state, idle_since, active,
                        agent_group, group_skill, q_lo, q_hi, skill_calls,
                        arr_time, patience, ht, status, wait, heap_t, heap_a, heap_n)

    i_call = 0
    boundary = 1
    while True:
        t_arr = arr_time[i_call] if i_call < n_calls else _INF
        t_srv = heap_t[0] if heap_n[0] > 0 else _INF
        t_bnd = boundary * interval_len if boundary < n_intervals else _INF
        if t_arr == _INF and t_srv == _INF and t_bnd == _INF:
            break
        # tie order at equal times: staffing change, then arrival, then service end
        if t_bnd <= t_arr and t_bnd <= t_srv:
            for g in range(n_groups):
                _apply_staffing(g, staffing[g, boundary], t_bnd, base, state, idle_since,
                                active, agent_group, group_skill, q_lo, q_hi, skill_calls,
                                arr_time, patience, ht, status, wait, heap_t, heap_a, heap_n)
            boundary += 1
        elif t_arr <= t_srv:
            now = t_arr
            c = i_call
            s = arr_skill[c]
            i_call += 1
            q_hi[s] = q_hi[s] + 1
            best_a = np.int64(-1)
            best_t = _INF
            for a in range(n_agents):
                if state[a] == _IDLE and group_skill[agent_group[a], s] and idle_since[a] < best_t:
                    best_t = idle_since[a]
                    best_a = a
            if best_a >= 0:
                # an eligible idle agent implies an empty queue for this skill
                q_lo[s] = q_hi[s]
                status[c] = 0
                wait[c] = 0.0
                state[best_a] = _BUSY
                _hpush(heap_t, heap_a, heap_n, now + ht[c], best_a)
        else:
            now = t_srv
            t0, a0 = _hpop(heap_t, heap_a, heap_n)
            if state[a0] == _BUSY:
                state[a0] = _IDLE
                idle_since[a0] = now
                _take_longest_waiting(a0, now, agent_group, group_skill, q_lo, q_hi,
                                      skill_calls, arr_time, patience, ht, status, wait,
                                      state, heap_t, heap_a, heap_n)
            elif state[a0] == _LEAVING:
                state[a0] = _OFF

    # never-served leftovers: finite patience abandons, infinite is unresolved
    for s in range(n_skills):
        lo = q_lo[s]
        hi = q_hi[s]
        while lo < hi:
            c = skill_calls[lo]
            if patience[c] < _INF:
                status[c] = 1
                wait[c] = patience[c]
            else:
                status[c] = 2
                wait[c] = 0.0
            lo += 1
        q_lo[s] = lo
    return status, wait


@dataclass
class DayCalls:
    """Per-call outcome of one simulated day (arrival order)."""

    skills: list[str]
    arrival: np.ndarray
    skill_idx: np.ndarray
    patience: np.ndarray
    ht: np.ndarray
    status: np.ndarray
    wait: np.ndarray


def _staffing_matrix(scenario: DayScenario, config: ModelConfig) -> np.ndarray:
    source = scenario.staffing if config.breaks == "yes" else scenario.staffing_no_breaks
    groups = sorted(scenario.groups)
    mat = np.zeros((len(groups), scenario.n_intervals), dtype=np.int64)
    for gi, g in enumerate(groups):
        prof = source[g]
        if len(prof) != scenario.n_intervals:
            raise ConfigError(f"group {g}: staffing profile length {len(prof)} != "
                              f"{scenario.n_intervals}")
        mat[gi] = prof
    return mat


def _group_skill_matrix(scenario: DayScenario) -> np.ndarray:
    groups = sorted(scenario.groups)
    skill_pos = {s: i for i, s in enumerate(scenario.skills)}
    mat = np.zeros((len(groups), len(scenario.skills)), dtype=np.uint8)
    for gi, g in enumerate(groups):
        for s in scenario.groups[g]:
            if s in skill_pos:  # groups may hold skills outside the studied set
                mat[gi, skill_pos[s]] = 1
    return mat


def _draw_calls(scenario: DayScenario, config: ModelConfig,
                rng: np.random.Generator, context: SimContext | None) -> tuple:
    arrivals = generate_arrivals(scenario, config.arrival, rng)
    if context is None:
        context = SimContext.from_scenarios([scenario])
    per_skill = [arrivals[s] for s in scenario.skills]
    pat = [sample_patiences(config, s, context, len(arrivals[s]), rng)
           for s in scenario.skills]
    hts = [sample_handling_times(config, s, scenario, context, len(arrivals[s]), rng)
           for s in scenario.skills]

    arr_all = np.concatenate(per_skill) if per_skill else np.empty(0)
    skill_all = np.concatenate([np.full(len(v), i, dtype=np.int64)
                                for i, v in enumerate(per_skill)]) if per_skill else np.empty(0, np.int64)
    pat_all = np.concatenate(pat) if pat else np.empty(0)
    ht_all = np.concatenate(hts) if hts else np.empty(0)

    order = np.argsort(arr_all, kind="stable")
    arr_all = np.ascontiguousarray(arr_all[order])
    skill_all = np.ascontiguousarray(skill_all[order])
    pat_all = np.ascontiguousarray(pat_all[order])
    ht_all = np.ascontiguousarray(ht_all[order])

    by_skill = np.argsort(skill_all, kind="stable").astype(np.int64)
    counts = np.bincount(skill_all, minlength=len(scenario.skills))
    ptr = np.zeros(len(scenario.skills) + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    return arr_all, skill_all, pat_all, ht_all, by_skill, ptr


def run_day_detailed(
    scenario: DayScenario,
    config: ModelConfig,
    rng: np.random.Generator,
    context: SimContext | None = None,
    tta: float = DEFAULT_TTA,
    asa_scope: str = "answered",
) -> tuple[DayMetrics, DayCalls]:
    """Simulate one day and return metrics plus per-call outcomes."""
    arr, skill, pat, ht, skill_calls, ptr = _draw_calls(scenario, config, rng, context)
    group_skill = _group_skill_matrix(scenario)
    staffing = _staffing_matrix(scenario, config)
    status, wait = _simulate_day_core(
        arr, skill, pat, ht, skill_calls, ptr, group_skill, staffing,
        float(scenario.interval_length),
    )
    metrics = metrics_from_calls(status, wait, tta=tta, asa_scope=asa_scope)
    return metrics, DayCalls(list(scenario.skills), arr, skill, pat, ht, status, wait)


def run_day(
    scenario: DayScenario,
    config: ModelConfig,
    rng: np.random.Generator,
    context: SimContext | None = None,
    tta: float = DEFAULT_TTA,
    asa_scope: str = "answered",
) -> DayMetrics:
    """Simulate one day under the model configuration."""
    metrics, _ = run_day_detailed(scenario, config, rng, context, tta, asa_scope)
    return metrics


@dataclass
class ReplicationSummary:
    n: int
    mean: dict[str, float]
    std: dict[str, float]
    quantiles: dict[str, tuple[float, float, float]]  # 2.5% / 50% / 97.5%

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": dict(self.mean),
            "std": dict(self.std),
            "quantiles": {m: list(q) for m, q in self.quantiles.items()},
        }


@dataclass
class ReplicationResult:
    metrics: list[DayMetrics]
    summary: ReplicationSummary = field(init=False)

    def __post_init__(self):
        self.summary = summarize(self.metrics)


def summarize(metrics: list[DayMetrics]) -> ReplicationSummary:
    mean: dict[str, float] = {}
    std: dict[str, float] = {}
    quantiles: dict[str, tuple[float, float, float]] = {}
    for m in ("sl", "ab", "asa"):
        vals = np.array([getattr(dm, m) for dm in metrics], dtype=float)
        mean[m] = float(vals.mean())
        std[m] = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
        lo, med, hi = np.quantile(vals, [0.025, 0.5, 0.975])
        quantiles[m] = (float(lo), float(med), float(hi))
    return ReplicationSummary(len(metrics), mean, std, quantiles)


def replicate(
    scenario: DayScenario,
    config: ModelConfig,
    n: int = 1000,
    seed: int = 0,
    context: SimContext | None = None,
    tta: float = DEFAULT_TTA,
    asa_scope: str = "answered",
    threads: int = 1,
) -> ReplicationResult:
    """n independent day simulations with replication-indexed sub-streams.

    Replication i always uses the stream (seed, "rep", i), so results are
    identical regardless of n, thread count, or execution order.
    """
    if n < 1:
        raise ValueError("need at least one replication")
    if context is None:
        context = SimContext.from_scenarios([scenario])

    def one(i: int) -> DayMetrics:
        return run_day(scenario, config, substream(seed, "rep", i), context, tta, asa_scope)

    if threads > 1 and n > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            metrics = list(pool.map(one, range(n)))
    else:
        metrics = [one(i) for i in range(n)]
    return ReplicationResult(metrics)
