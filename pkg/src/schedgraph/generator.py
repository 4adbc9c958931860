"""Seeded random instance generation driven by utilization and span ratios.

A task's variation ratio is (c_max - c_min) / (c_max - 1) when c_max > 1 and
0 otherwise; its jitter ratio is (r_max - r_min) / r_max when r_max > 0 and
0 otherwise. The generator inverts these: it draws worst-case execution
times to hit a target utilization, then derives the remaining parameters so
every task satisfies r_max + c_max <= deadline <= period.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .model import ProblemInstance, Task, make_instance

DEFAULT_PERIODS = (5, 10, 20, 40)
UTILIZATION_TOLERANCE = 0.01
_MAX_ATTEMPTS = 1000


class GenerationError(RuntimeError):
    """The spec admits no parameter assignment within the retry budget."""


@dataclass(frozen=True)
class GenSpec:
    n_tasks: int
    utilization: float
    jitter_ratio: float
    variation_ratio: float
    periods: tuple[int, ...] = DEFAULT_PERIODS
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_tasks < 1:
            raise ValueError("n_tasks must be >= 1")
        if not 0.0 < self.utilization <= 1.0:
            raise ValueError("utilization must be in (0, 1]")
        for name in ("jitter_ratio", "variation_ratio"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if not self.periods or any(p < 1 for p in self.periods):
            raise ValueError("periods must be positive integers")


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def _uniform_simplex(rng: random.Random, n: int, total: float) -> list[float]:
    # uniform over {u >= 0 : sum(u) = total}
    shares = []
    remaining = total
    for i in range(1, n):
        nxt = remaining * rng.random() ** (1.0 / (n - i))
        shares.append(remaining - nxt)
        remaining = nxt
    shares.append(remaining)
    return shares


def _repair_utilization(periods: list[int], c_maxes: list[int], target: float) -> bool:
    """Nudge worst-case execution times until the total lands within tolerance.

    Rounding the simplex draw to integers can leave a gap larger than the
    tolerance on coarse period grids; single +-1 steps close it whenever the
    integer lattice admits a point in the window at all.
    """
    current = sum(Fraction(c, p) for c, p in zip(c_maxes, periods))
    for _ in range(256):
        distance = abs(float(current) - target)
        if distance <= UTILIZATION_TOLERANCE + 1e-12:
            return True
        direction = 1 if float(current) < target else -1
        best = None
        for i, (c, p) in enumerate(zip(c_maxes, periods)):
            if not 1 <= c + direction <= p:
                continue
            candidate = current + Fraction(direction, p)
            gap = abs(float(candidate) - target)
            if best is None or gap < best[0]:
                best = (gap, i, candidate)
        if best is None or best[0] >= distance:
            return False
        _, i, current = best
        c_maxes[i] += direction
    return False


def generate_instance(spec: GenSpec) -> ProblemInstance:
    """Draw an instance matching the spec; identical seeds give identical results."""
    rng = random.Random(spec.seed)
    for _ in range(_MAX_ATTEMPTS):
        periods = [rng.choice(spec.periods) for _ in range(spec.n_tasks)]
        shares = _uniform_simplex(rng, spec.n_tasks, spec.utilization)
        c_maxes = [min(period, max(1, _round_half_up(share * period)))
                   for period, share in zip(periods, shares)]
        if not _repair_utilization(periods, c_maxes, spec.utilization):
            continue
        tasks = []
        for i, (period, c_max) in enumerate(zip(periods, c_maxes)):
            c_min = max(1, _round_half_up(c_max - spec.variation_ratio * (c_max - 1)))
            deadline = rng.randint(c_max, period)
            r_max = rng.randint(0, deadline - c_max)
            r_min = _round_half_up(r_max * (1.0 - spec.jitter_ratio))
            tasks.append(Task(id=i + 1, period=period, r_min=r_min, r_max=r_max,
                              c_min=c_min, c_max=c_max, deadline=deadline,
                              priority=0))
        instance = make_instance(tasks)
        for task in instance.tasks:
            assert task.r_max + task.c_max <= task.deadline <= task.period
        return instance
    raise GenerationError(
        f"no feasible instance for {spec} after {_MAX_ATTEMPTS} attempts"
    )


@dataclass(frozen=True)
class RatioReport:
    """Measured jitter/variation ratios per task plus the exact utilization."""

    per_task: dict[int, tuple[Fraction, Fraction]]  # id -> (jitter, variation)
    utilization: Fraction


def measure_ratios(instance: ProblemInstance) -> RatioReport:
    """Evaluate the ratio definitions on actual task parameters."""
    per_task = {}
    for task in instance.tasks:
        jitter = Fraction(task.r_max - task.r_min, task.r_max) if task.r_max > 0 else Fraction(0)
        variation = (Fraction(task.c_max - task.c_min, task.c_max - 1)
                     if task.c_max > 1 else Fraction(0))
        per_task[task.id] = (jitter, variation)
    total = sum((Fraction(t.c_max, t.period) for t in instance.tasks), Fraction(0))
    return RatioReport(per_task, total)
