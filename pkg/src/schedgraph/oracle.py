"""Online-scheduler simulator and exhaustive scenario enumerator.

The simulator plays one concrete scenario: the scheduler is invoked at time
zero, at every job completion, and, while idle, at each upcoming release.
The enumerator walks the full integer grid of release and execution times
and is the ground-truth check for the graph analysis on small instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .model import ExecutionScenario, Job, ProblemInstance, validate_scenario
from .policy import PolicyKind, pick

DEFAULT_SCENARIO_CAP = 10**7


class ScenarioCapExceeded(RuntimeError):
    """The instance has more scenarios than the enumerator is allowed to run."""

    def __init__(self, total: int, cap: int):
        super().__init__(f"{total} scenarios exceed the cap of {cap}")
        self.total = total
        self.cap = cap


def scenario_count(instance: ProblemInstance) -> int:
    """Number of integer scenarios: product of all release and execution spans."""
    total = 1
    for job in instance.jobs:
        total *= (job.r_max - job.r_min + 1) * (job.c_max - job.c_min + 1)
    return total


@dataclass
class SimulationTrace:
    """Dispatches and idle gaps of one simulated scenario, in time order."""

    dispatches: list[tuple[Job, int, int]]  # (job, start, finish)
    idle: list[tuple[int, int]]
    misses: list[tuple[Job, int, int]]  # (job, finish, deadline)

    @property
    def miss(self) -> tuple[Job, int, int] | None:
        return self.misses[0] if self.misses else None


def simulate(instance: ProblemInstance, kind: PolicyKind, scenario: ExecutionScenario,
             stop_on_miss: bool = False) -> SimulationTrace:
    """Play one scenario to completion (misses are recorded, not fatal)."""
    validate_scenario(instance, scenario)
    return _simulate(instance, kind, scenario.release, scenario.execution, stop_on_miss)


def _simulate(instance: ProblemInstance, kind: PolicyKind, release, execution,
              stop_on_miss: bool) -> SimulationTrace:
    runs = [instance.jobs_by_task[task.id] for task in instance.tasks]
    slot = {task.id: i for i, task in enumerate(instance.tasks)}
    ptr = [0] * len(runs)
    remaining = len(instance.jobs)
    t = 0
    dispatches: list[tuple[Job, int, int]] = []
    idle: list[tuple[int, int]] = []
    misses: list[tuple[Job, int, int]] = []
    while remaining:
        applicable = [run[p] for run, p in zip(runs, ptr) if p < len(run)]
        job = pick(kind, t, applicable, release)
        if job is None:
            upcoming = [release[j.key] for j in applicable if release[j.key] > t]
            if not upcoming:
                # cannot happen for the built-in policies: the critical job is
                # always viable once released
                raise RuntimeError("scheduler idles with every applicable job released")
            nxt = min(upcoming)
            idle.append((t, nxt))
            t = nxt
            continue
        finish = t + execution[job.key]
        dispatches.append((job, t, finish))
        if finish > job.deadline:
            misses.append((job, finish, job.deadline))
            if stop_on_miss:
                break
        ptr[slot[job.task_id]] += 1
        remaining -= 1
        t = finish
    return SimulationTrace(dispatches, idle, misses)


@dataclass
class OracleReport:
    """Verdict of the exhaustive enumeration plus per-job finish extremes."""

    schedulable: bool
    scenarios_checked: int
    scenarios_total: int
    finish_min: dict[tuple[int, int], int]
    finish_max: dict[tuple[int, int], int]
    first_failure: ExecutionScenario | None

    def to_json_dict(self) -> dict:
        data: dict = {
            "schedulable": self.schedulable,
            "scenarios_checked": self.scenarios_checked,
            "scenarios_total": self.scenarios_total,
            "finish_bounds": [
                {"task": task, "job": index,
                 "min": self.finish_min[(task, index)],
                 "max": self.finish_max[(task, index)]}
                for (task, index) in sorted(self.finish_min)
            ],
        }
        if self.first_failure is not None:
            data["first_failure"] = [
                {"task": task, "job": index,
                 "r": self.first_failure.release[(task, index)],
                 "c": self.first_failure.execution[(task, index)]}
                for (task, index) in sorted(self.first_failure.release)
            ]
        return data


def enumerate_scenarios(instance: ProblemInstance, kind: PolicyKind,
                        max_scenarios: int = DEFAULT_SCENARIO_CAP,
                        exhaustive: bool = False) -> OracleReport:
    """Simulate every integer scenario, in lexicographic (task, job, r, c) order.

    Raises ScenarioCapExceeded instead of sampling when the grid is larger
    than `max_scenarios`. Stops at the first failing scenario unless
    `exhaustive` is set; the first failure is stable across runs because the
    enumeration order is fixed.
    """
    total = scenario_count(instance)
    if total > max_scenarios:
        raise ScenarioCapExceeded(total, max_scenarios)
    release: dict[tuple[int, int], int] = {}
    execution: dict[tuple[int, int], int] = {}
    targets = []
    dims = []
    for job in instance.jobs:
        targets.append((release, job.key))
        dims.append(range(job.r_min, job.r_max + 1))
        targets.append((execution, job.key))
        dims.append(range(job.c_min, job.c_max + 1))
    finish_min: dict[tuple[int, int], int] = {}
    finish_max: dict[tuple[int, int], int] = {}
    first_failure: ExecutionScenario | None = None
    checked = 0
    for combo in itertools.product(*dims):
        for (target, key), value in zip(targets, combo):
            target[key] = value
        trace = _simulate(instance, kind, release, execution, stop_on_miss=True)
        checked += 1
        for job, _, finish in trace.dispatches:
            key = job.key
            if key not in finish_min or finish < finish_min[key]:
                finish_min[key] = finish
            if key not in finish_max or finish > finish_max[key]:
                finish_max[key] = finish
        if trace.misses and first_failure is None:
            first_failure = ExecutionScenario(dict(release), dict(execution))
            if not exhaustive:
                break
    return OracleReport(
        schedulable=first_failure is None,
        scenarios_checked=checked,
        scenarios_total=total,
        finish_min=finish_min,
        finish_max=finish_max,
        first_failure=first_failure,
    )
