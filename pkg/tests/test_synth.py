import datetime as dt
import math

import numpy as np
import pytest

from ccsim.errors import ConfigError
from ccsim.estimators import fit_lognormal
from ccsim.ingest import (
    Activity,
    IngestConfig,
    compute_shrinkage,
    extract_wrapups,
    infer_skill_sets,
    mean_shrinkage,
    parse_activity_log,
    parse_call_log,
    partition_days,
)
from ccsim.synth import (
    BreakSpec,
    GroupSpec,
    PatienceSpec,
    SyntheticSpec,
    generate,
    write_logs,
)


def flat_spec(**overrides) -> SyntheticSpec:
    base = dict(
        n_days=3,
        skills={"K": [12.0] * 8},
        groups=[GroupSpec(["K"], 4, 0.0, 8 * 1800.0, BreakSpec(0.0))],
        ht={"K": (5.0, 0.4)},
        patience=PatienceSpec("exp", 150.0),
        wrapup_mean=3.0,
    )
    base.update(overrides)
    spec = SyntheticSpec(**base)
    spec.validate()
    return spec


class TestSpecValidation:
    def test_negative_rate_rejected(self):
        with pytest.raises(ConfigError):
            flat_spec(skills={"K": [5.0, -1.0] + [5.0] * 6})

    def test_mixture_weights_must_sum_to_one(self):
        with pytest.raises(ConfigError):
            flat_spec(patience=PatienceSpec("mixture", components=[(0.5, 60.0), (0.4, 300.0)]))

    def test_break_probs_must_sum_to_one(self):
        with pytest.raises(ConfigError):
            flat_spec(groups=[GroupSpec(["K"], 2, 0.0, 8 * 1800.0,
                                        BreakSpec(1.0, (300.0,), (0.9,)))])

    def test_unknown_group_skill(self):
        with pytest.raises(ConfigError):
            flat_spec(groups=[GroupSpec(["X"], 2)])

    def test_json_roundtrip(self):
        spec = SyntheticSpec.example()
        again = SyntheticSpec.from_dict(spec.to_dict())
        assert again.to_dict() == spec.to_dict()


class TestGenerate:
    def test_deterministic(self):
        spec = flat_spec()
        a = generate(spec, seed=5)
        b = generate(spec, seed=5)
        assert [(c.arrival_time, c.skill, c.agent) for c in a.calls] == \
               [(c.arrival_time, c.skill, c.agent) for c in b.calls]
        assert [(r.activity, r.start_time, r.end_time, r.agent) for r in a.activities] == \
               [(r.activity, r.start_time, r.end_time, r.agent) for r in b.activities]

    def test_zero_break_propensity_means_no_break_records(self):
        res = generate(flat_spec(), seed=1)
        assert not any(a.activity in (Activity.BREAK_PAID, Activity.BREAK_UNPAID)
                       for a in res.activities)

    def test_breaks_present_when_configured(self):
        spec = flat_spec(groups=[GroupSpec(["K"], 4, 0.0, 8 * 1800.0, BreakSpec(0.6))])
        res = generate(spec, seed=1)
        breaks = [a for a in res.activities if a.activity is Activity.BREAK_PAID]
        assert breaks
        durations = {a.duration for a in breaks}
        assert durations <= {300.0, 600.0, 900.0}

    def test_arrival_counts_match_rates_in_expectation(self):
        spec = flat_spec(n_days=30)
        res = generate(spec, seed=9)
        days = partition_days(res.calls, res.activities, set())
        counts = [len(d.calls) for d in days]
        expected = 12.0 * 8
        se = math.sqrt(expected / len(counts))
        assert np.mean(counts) == pytest.approx(expected, abs=4 * se)

    def test_call_rows_respect_invariants(self):
        res = generate(flat_spec(), seed=3)
        for c in res.calls:
            assert c.arrival_time <= c.departure_time
            if c.answered:
                assert c.arrival_time <= c.answered_time <= c.departure_time

    def test_truth_carries_agent_parameters(self):
        from ccsim.synth import LearningSpec
        spec = flat_spec(learning=LearningSpec(0.2, 0.005, 0.02))
        res = generate(spec, seed=4)
        assert len(res.truth["agents"]) == 4
        for info in res.truth["agents"].values():
            assert 0.005 <= info["gamma"] <= 0.02
            assert info["aht_by_skill"]["K"] > 0


@pytest.fixture(scope="module")
def logs(tmp_path_factory):
    out = tmp_path_factory.mktemp("synthlogs")
    spec = SyntheticSpec.example()
    spec.n_days = 5
    spec.learning = None
    spec.day_aht_sigma = 0.0
    res = generate(spec, seed=21)
    write_logs(res, str(out / "calls.csv"), str(out / "acts.csv"),
               str(out / "truth.json"))
    return out, spec, res


class TestRoundTrip:
    def test_parsers_accept_everything(self, logs):
        out, spec, res = logs
        cfg = IngestConfig()
        cl = parse_call_log(str(out / "calls.csv"), cfg)
        al = parse_activity_log(str(out / "acts.csv"), cfg)
        assert not cl.rejects
        assert not al.rejects
        assert al.unknown_activities == 0
        assert len(cl.records) == len(res.calls)

    def test_day_partition(self, logs):
        out, spec, res = logs
        cfg = IngestConfig()
        cl = parse_call_log(str(out / "calls.csv"), cfg)
        al = parse_activity_log(str(out / "acts.csv"), cfg)
        days = partition_days(cl.records, al.records, set())
        assert len(days) == spec.n_days

    def test_lognormal_recovery(self, logs):
        out, spec, res = logs
        cl = parse_call_log(str(out / "calls.csv"), IngestConfig())
        ht = [c.handling_time for c in cl.records if c.answered and c.skill == "3010"]
        fit = fit_lognormal(ht, min_duration=1.0)
        assert fit.mu_log == pytest.approx(spec.ht["3010"][0], abs=0.05)
        assert fit.sigma_log == pytest.approx(spec.ht["3010"][1], abs=0.05)

    def test_wrapup_recovery(self, logs):
        out, spec, res = logs
        al = parse_activity_log(str(out / "acts.csv"), IngestConfig())
        _, mean = extract_wrapups(al.records)
        assert mean == pytest.approx(spec.wrapup_mean, abs=0.5)

    def test_shrinkage_near_target(self, logs):
        out, spec, res = logs
        al = parse_activity_log(str(out / "acts.csv"), IngestConfig())
        stats = compute_shrinkage(al.records)
        assert 0.04 <= mean_shrinkage(stats) <= 0.10

    def test_skill_sets_inferred(self, logs):
        out, spec, res = logs
        cl = parse_call_log(str(out / "calls.csv"), IngestConfig())
        sets = infer_skill_sets(cl.records)
        assert {frozenset(v) for v in sets.values()} <= {
            frozenset({"3010"}), frozenset({"3020"}), frozenset({"3010", "3020"})
        }

    def test_write_is_deterministic(self, logs, tmp_path):
        out, spec, res = logs
        res2 = generate(spec, seed=21)
        write_logs(res2, str(tmp_path / "calls.csv"), str(tmp_path / "acts.csv"),
                   str(tmp_path / "truth.json"))
        assert (tmp_path / "calls.csv").read_bytes() == (out / "calls.csv").read_bytes()
        assert (tmp_path / "acts.csv").read_bytes() == (out / "acts.csv").read_bytes()
        assert (tmp_path / "truth.json").read_bytes() == (out / "truth.json").read_bytes()
