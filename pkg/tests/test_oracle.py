from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schedgraph import (ExecutionScenario, InstanceError, PolicyKind,
                        ScenarioCapExceeded, Task, enumerate_scenarios,
                        make_instance, scenario_count, simulate)
from support import ALL_POLICIES, check_trace, sample_instance


def fig_worst_case(instance):
    return ExecutionScenario.worst_case(instance)


def anomaly_scenario(instance):
    scenario = ExecutionScenario.worst_case(instance)
    scenario.release[(1, 1)] = 2
    scenario.execution[(2, 1)] = 2
    return scenario


class TestSimulate:
    def test_worst_case_scenario_meets_all_deadlines(self, anomaly):
        trace = simulate(anomaly, PolicyKind.EDF, fig_worst_case(anomaly))
        assert trace.miss is None
        runs = {job.key: (start, finish) for job, start, finish in trace.dispatches}
        assert runs[(1, 1)] == (6, 13)
        assert runs[(2, 2)] == (14, 18)

    def test_early_release_short_execution_misses(self, anomaly):
        trace = simulate(anomaly, PolicyKind.EDF, anomaly_scenario(anomaly))
        job, finish, deadline = trace.miss
        assert (job.key, finish, deadline) == ((3, 2), 11, 10)
        runs = {job.key: (start, finish) for job, start, finish in trace.dispatches}
        assert runs[(1, 1)] == (3, 10)
        assert runs[(3, 2)] == (10, 11)

    def test_misses_do_not_stop_the_simulation(self, anomaly):
        trace = simulate(anomaly, PolicyKind.EDF, anomaly_scenario(anomaly))
        assert len(trace.dispatches) == len(anomaly.jobs)

    def test_stop_on_miss_cuts_the_trace(self, anomaly):
        trace = simulate(anomaly, PolicyKind.EDF, anomaly_scenario(anomaly),
                         stop_on_miss=True)
        assert trace.dispatches[-1][0].key == (3, 2)
        assert len(trace.dispatches) < len(anomaly.jobs)

    def test_single_job_trivial_dispatch(self):
        instance = make_instance([Task(1, 10, 0, 0, 1, 1, 5)])
        scenario = ExecutionScenario({(1, 1): 0}, {(1, 1): 1})
        trace = simulate(instance, PolicyKind.EDF, scenario)
        assert trace.dispatches == [(instance.jobs[0], 0, 1)]
        assert trace.miss is None

    def test_scheduler_waits_for_late_release(self, jitter3):
        scenario = ExecutionScenario.worst_case(jitter3)
        scenario.execution[(1, 1)] = 1
        trace = simulate(jitter3, PolicyKind.EDF, scenario)
        assert (2, 3) in trace.idle  # gap until the jittery job appears at 3
        runs = {job.key: (start, finish) for job, start, finish in trace.dispatches}
        assert runs[(3, 1)] == (3, 7)

    def test_idling_policy_skips_released_work(self, idle4):
        scenario = ExecutionScenario.worst_case(idle4)
        scenario.execution[(2, 1)] = 7
        trace = simulate(idle4, PolicyKind.P_FP_EDF, scenario)
        runs = {job.key: (start, finish) for job, start, finish in trace.dispatches}
        assert runs[(3, 1)] == (7, 9)
        assert (9, 10) in trace.idle  # task 4 is released but would be harmful
        assert runs[(1, 1)] == (10, 12)
        assert trace.miss is None

    def test_incomplete_scenario_rejected(self, anomaly):
        scenario = fig_worst_case(anomaly)
        del scenario.execution[(1, 1)]
        with pytest.raises(InstanceError, match="missing job"):
            simulate(anomaly, PolicyKind.EDF, scenario)

    def test_determinism(self, idle4):
        scenario = ExecutionScenario.worst_case(idle4)
        first = simulate(idle4, PolicyKind.CW, scenario)
        second = simulate(idle4, PolicyKind.CW, scenario)
        assert first == second

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 20_000), kind=st.sampled_from(ALL_POLICIES))
    def test_trace_invariants_on_random_scenarios(self, seed, kind):
        rng = random.Random(seed)
        instance = sample_instance(rng)
        release = {j.key: rng.randint(j.r_min, j.r_max) for j in instance.jobs}
        execution = {j.key: rng.randint(j.c_min, j.c_max) for j in instance.jobs}
        scenario = ExecutionScenario(release, execution)
        trace = simulate(instance, kind, scenario)
        assert len(trace.dispatches) == len(instance.jobs)
        check_trace(instance, kind, release, trace)


class TestEnumerate:
    def test_scenario_count_is_the_span_product(self, anomaly):
        assert scenario_count(anomaly) == 4 * 3 * 3 * 3

    def test_precautious_example_is_schedulable(self, idle4):
        assert scenario_count(idle4) == 8
        report = enumerate_scenarios(idle4, PolicyKind.P_FP_EDF)
        assert report.schedulable
        assert report.scenarios_checked == 8

    def test_anomaly_instance_fails_with_early_release(self, anomaly):
        report = enumerate_scenarios(anomaly, PolicyKind.EDF)
        assert not report.schedulable
        failure = report.first_failure
        assert failure.release[(1, 1)] in (2, 3)
        trace = simulate(anomaly, PolicyKind.EDF, failure)
        assert trace.miss is not None

    def test_deterministic_instance_has_one_scenario(self):
        tasks = [Task(1, 10, 2, 2, 3, 3, 10), Task(2, 5, 0, 0, 1, 1, 4)]
        instance = make_instance(tasks)
        report = enumerate_scenarios(instance, PolicyKind.EDF)
        assert report.scenarios_total == 1
        assert report.schedulable == (simulate(
            instance, PolicyKind.EDF, ExecutionScenario.worst_case(instance)).miss is None)

    def test_cap_refusal_reports_the_count(self, anomaly):
        with pytest.raises(ScenarioCapExceeded, match="108 scenarios"):
            enumerate_scenarios(anomaly, PolicyKind.EDF, max_scenarios=100)

    def test_first_failure_is_stable(self, anomaly):
        first = enumerate_scenarios(anomaly, PolicyKind.EDF)
        second = enumerate_scenarios(anomaly, PolicyKind.EDF)
        assert first.first_failure == second.first_failure
        assert first.scenarios_checked == second.scenarios_checked

    def test_exhaustive_mode_checks_everything(self, anomaly):
        report = enumerate_scenarios(anomaly, PolicyKind.EDF, exhaustive=True)
        assert report.scenarios_checked == report.scenarios_total == 108

    def test_finish_extremes_cover_simulated_runs(self, idle4):
        report = enumerate_scenarios(idle4, PolicyKind.P_FP_EDF)
        scenario = ExecutionScenario.worst_case(idle4)
        trace = simulate(idle4, PolicyKind.P_FP_EDF, scenario)
        for job, _, finish in trace.dispatches:
            assert report.finish_min[job.key] <= finish <= report.finish_max[job.key]
