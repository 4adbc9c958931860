"""Schedule-graph generation for exact, sustainable schedulability analysis.

The graph abstracts every execution scenario of an instance under one
policy. A vertex stands for "this set of jobs has finished and the
processor becomes free at some time in [eft, lft]"; an arc stands for
dispatching one more job over a window of start times. Levels are indexed
by the number of finished jobs; the root is level 0 with interval [0, 0].

Expanding a vertex asks, for every applicable job, at which integer times it
could be the next job started:

* a job is *certainly eligible* at t when it is certainly released
  (r_max <= t), respects the critical start budget, and no other such job
  outranks it; there is at most one per t;
* a job is *possibly eligible* at t when it is possibly released
  (r_min <= t < r_max), respects the budget, and outranks the certainly
  eligible job (vacuously when there is none).

Probing runs over [eft, bound] where bound is the first time at or after
lft with a certainly eligible job: by then the processor has certainly
started something, so later times cannot begin the next dispatch. Each
job's eligible times form maximal integer ranges; each range becomes one
new vertex. Under a work conserving policy a job gets at most one range;
under an idling policy the budget check can cut a range and re-open it
later, so one vertex may carry several arcs with the same job label.

Two generation modes are supported. The default, multiple eligibility
("me"), expands every range. Single eligibility ("se") reproduces the
older behaviour of letting each job become eligible at most once per
vertex: a job's eligibility, once ended, is consumed, and probing continues
until a non-consumed certainly eligible job exists at or after lft.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .model import InstanceError, Job, ProblemInstance
from .policy import CriticalContext, PolicyKind, critical_context, pi_higher, pi_key

ME = "me"
SE = "se"
MODES = (ME, SE)


class AnalysisStuck(RuntimeError):
    """No dispatch time exists at or after a vertex's latest finish time."""

    def __init__(self, message: str, vertex: int | None = None):
        super().__init__(message)
        self.vertex = vertex


@dataclass
class Vertex:
    id: int
    eft: int
    lft: int
    finished: int  # bitmask over the instance's job positions
    level: int
    in_arcs: list[int] = field(default_factory=list)
    out_arcs: list[int] = field(default_factory=list)

    @property
    def interval(self) -> tuple[int, int]:
        return (self.eft, self.lft)


@dataclass
class Arc:
    id: int
    src: int
    dst: int
    job_pos: int
    est: int  # dispatch window recorded at creation; merged duplicates fold in
    lst: int


class ScheduleGraph:
    """Level-structured DAG of scheduler states for one (instance, policy, mode)."""

    def __init__(self, instance: ProblemInstance, kind: PolicyKind, mode: str = ME):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
        self.instance = instance
        self.kind = kind
        self.mode = mode
        self.vertices: dict[int, Vertex] = {}
        self.arcs: dict[int, Arc] = {}
        self.levels: list[list[int]] = []
        self.vertices_created = 0
        self.arcs_created = 0
        root = self.add_vertex(0, 0, 0, 0)
        self.root = root.id
        self.levels.append([root.id])

    def add_vertex(self, eft: int, lft: int, finished: int, level: int) -> Vertex:
        assert eft <= lft
        vertex = Vertex(self.vertices_created, eft, lft, finished, level)
        self.vertices[vertex.id] = vertex
        self.vertices_created += 1
        return vertex

    def add_arc(self, src: int, dst: int, job_pos: int, est: int, lst: int) -> Arc:
        arc = Arc(self.arcs_created, src, dst, job_pos, est, lst)
        self.arcs[arc.id] = arc
        self.arcs_created += 1
        self.vertices[src].out_arcs.append(arc.id)
        self.vertices[dst].in_arcs.append(arc.id)
        return arc

    def remove_arc(self, arc_id: int) -> None:
        arc = self.arcs.pop(arc_id)
        self.vertices[arc.src].out_arcs.remove(arc_id)

    def remove_vertex(self, vertex_id: int) -> None:
        del self.vertices[vertex_id]

    def job_of_arc(self, arc: Arc) -> Job:
        return self.instance.jobs[arc.job_pos]

    def finished_keys(self, vertex: Vertex) -> set[tuple[int, int]]:
        return {job.key for pos, job in enumerate(self.instance.jobs)
                if vertex.finished >> pos & 1}


# --- applicable jobs and eligibility ----------------------------------------

def _as_mask(instance: ProblemInstance, finished) -> int:
    if isinstance(finished, int):
        return finished
    mask = 0
    for key in finished:
        mask |= 1 << instance.position(key)
    return mask


def applicable_jobs(instance: ProblemInstance, finished) -> list[Job]:
    """First unfinished job of each task, given a finished set (mask or keys).

    The finished set must be prefix-closed per task; anything else indicates
    a corrupted graph and raises RuntimeError.
    """
    mask = _as_mask(instance, finished)
    out: list[Job] = []
    for task in instance.tasks:
        run = instance.jobs_by_task[task.id]
        first_unfinished = None
        for offset, job in enumerate(run):
            if not mask >> instance.position(job.key) & 1:
                first_unfinished = offset
                break
        if first_unfinished is not None:
            for offset in range(first_unfinished + 1, len(run)):
                if mask >> instance.position(run[offset].key) & 1:
                    raise RuntimeError(
                        f"finished set not prefix-closed: {run[offset].label} finished "
                        f"before {run[first_unfinished].label}"
                    )
            out.append(run[first_unfinished])
    out.sort(key=lambda job: job.key)
    return out


@dataclass(frozen=True)
class EligibilityContext:
    """Everything needed to probe one vertex's eligibility pointwise."""

    instance: ProblemInstance
    kind: PolicyKind
    eft: int
    lft: int
    applicable: tuple[Job, ...]
    crit: CriticalContext | None


def make_context(instance: ProblemInstance, kind: PolicyKind, finished,
                 eft: int, lft: int) -> EligibilityContext:
    apps = tuple(applicable_jobs(instance, finished))
    return EligibilityContext(instance, kind, eft, lft, apps, critical_context(kind, apps))


def _viable(ctx: EligibilityContext, job: Job, t: int) -> bool:
    if ctx.crit is None:
        return True
    return t + job.c_max <= ctx.crit.time or job == ctx.crit.job


def certainly_eligible(ctx: EligibilityContext, t: int,
                       exclude: frozenset[Job] = frozenset()) -> Job | None:
    """The unique certainly released, budget-respecting job of top priority at t."""
    candidates = [j for j in ctx.applicable
                  if j not in exclude and j.r_max <= t and _viable(ctx, j, t)]
    if not candidates:
        return None
    keys = [pi_key(ctx.kind, j) for j in candidates]
    assert len(set(keys)) == len(keys), "priority order is not strict"
    return candidates[keys.index(min(keys))]


def possibly_eligible(ctx: EligibilityContext, t: int,
                      exclude: frozenset[Job] = frozenset()) -> list[Job]:
    """Possibly released, budget-respecting jobs outranking the certain choice at t."""
    ce = certainly_eligible(ctx, t, exclude)
    out = []
    for job in ctx.applicable:
        if job in exclude or not job.r_min <= t < job.r_max:
            continue
        if not _viable(ctx, job, t):
            continue
        if ce is not None and not pi_higher(ctx.kind, job, ce):
            continue
        out.append(job)
    return out


def _eligible_at(ctx: EligibilityContext, t: int,
                 exclude: frozenset[Job] = frozenset()) -> list[Job]:
    ce = certainly_eligible(ctx, t, exclude)
    head = [] if ce is None else [ce]
    return head + possibly_eligible(ctx, t, exclude)


def exploration_bound(ctx: EligibilityContext) -> int:
    """Smallest t >= lft at which a certainly eligible job exists.

    A certainly eligible job can only appear when some applicable job
    becomes certainly released, so it suffices to probe lft and the r_max
    values above it. If none of them works, no later time can either.
    """
    candidates = sorted({ctx.lft} | {j.r_max for j in ctx.applicable if j.r_max > ctx.lft})
    for t in candidates:
        if certainly_eligible(ctx, t) is not None:
            return t
    raise AnalysisStuck(
        f"no certainly eligible job exists at or after t={ctx.lft}"
    )


def _boundary_times(ctx: EligibilityContext) -> set[int]:
    """Times at which any job's eligibility status can change.

    Release boundaries cover work conserving policies; with a critical start
    budget, a non-critical job additionally stops being viable the instant
    t + c_max first exceeds the budget.
    """
    times: set[int] = set()
    for job in ctx.applicable:
        times.add(job.r_min)
        times.add(job.r_max)
        if ctx.crit is not None and job != ctx.crit.job:
            times.add(ctx.crit.time - job.c_max + 1)
    return times


def to_ranges(times: Iterable[int]) -> list[tuple[int, int]]:
    """Collapse a set of integers into maximal inclusive ranges."""
    out: list[tuple[int, int]] = []
    for t in sorted(set(times)):
        if out and t == out[-1][1] + 1:
            out[-1] = (out[-1][0], t)
        else:
            out.append((t, t))
    return out


def eligibility_ranges(ctx: EligibilityContext, job: Job,
                       lo: int | None = None, hi: int | None = None) -> list[tuple[int, int]]:
    """Maximal ranges of times in [lo, hi] at which `job` is eligible.

    Defaults to the vertex's exploration interval. Eligibility is constant
    between boundary times, so only segment starts are probed.
    """
    if lo is None:
        lo = ctx.eft
    if hi is None:
        hi = exploration_bound(ctx)
    if hi < lo:
        return []
    probes = sorted({lo} | {b for b in _boundary_times(ctx) if lo < b <= hi})
    ranges: list[tuple[int, int]] = []
    start: int | None = None
    for t in probes:
        eligible = job in _eligible_at(ctx, t)
        if eligible and start is None:
            start = t
        elif not eligible and start is not None:
            ranges.append((start, t - 1))
            start = None
    if start is not None:
        ranges.append((start, hi))
    return ranges


# --- expansion sweeps ---------------------------------------------------------

def expansion_windows(ctx: EligibilityContext, mode: str = ME) -> list[tuple[Job, int, int]]:
    """Dispatch windows (job, est, lst) a vertex expands into, in creation order.

    Sweeps boundary times only; between boundaries nothing can change, so the
    result matches a per-integer-time sweep exactly.
    """
    if not ctx.applicable:
        return []
    if mode == ME:
        return _windows_multi(ctx)
    if mode == SE:
        return _windows_single(ctx)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def _windows_multi(ctx: EligibilityContext) -> list[tuple[Job, int, int]]:
    eft = ctx.eft
    bound = exploration_bound(ctx)
    probes = sorted({eft} | {b for b in _boundary_times(ctx) if eft < b <= bound})
    probes.append(bound + 1)
    open_runs: dict[Job, int] = {}
    out: list[tuple[Job, int, int]] = []
    for t in probes:
        eligible = [] if t > bound else _eligible_at(ctx, t)
        live = set(eligible)
        for job in [j for j in open_runs if j not in live]:
            out.append((job, open_runs.pop(job), t - 1))
        for job in eligible:
            if job not in open_runs:
                open_runs[job] = t
    assert not open_runs
    if ctx.kind.work_conserving:
        seen: set[Job] = set()
        for job, est, _ in out:
            assert job not in seen, "work conserving job re-eligibility"
            assert est == max(eft, job.r_min), "work conserving range must start at release"
            seen.add(job)
    return out


def _windows_single(ctx: EligibilityContext) -> list[tuple[Job, int, int]]:
    # Each job may be eligible at most once: an ended run is consumed. The
    # sweep keeps going past lft until a non-consumed certainly eligible job
    # exists, which is when the dispatch has certainly happened.
    eft, lft = ctx.eft, ctx.lft
    probes = sorted({eft, lft} | {b for b in _boundary_times(ctx) if b > eft})
    consumed: set[Job] = set()
    open_runs: dict[Job, int] = {}
    out: list[tuple[Job, int, int]] = []
    bound: int | None = None
    for t in probes:
        frozen = frozenset(consumed)
        eligible = _eligible_at(ctx, t, frozen)
        live = set(eligible)
        for job in [j for j in open_runs if j not in live]:
            out.append((job, open_runs.pop(job), t - 1))
            consumed.add(job)
        for job in eligible:
            if job not in open_runs:
                open_runs[job] = t
        if t >= lft and certainly_eligible(ctx, t, frozenset(consumed)) is not None:
            bound = t
            break
    if bound is None:
        raise AnalysisStuck(
            f"single-eligibility sweep found no dispatch time at or after t={lft}"
        )
    for job, est in open_runs.items():
        out.append((job, est, bound))
    return out


# --- graph construction -------------------------------------------------------

def expand(graph: ScheduleGraph, vertex: Vertex, job: Job, est: int, lst: int) -> tuple[Vertex, Arc]:
    """Create the successor vertex for dispatching `job` over [est, lst]."""
    if est > lst:
        raise ValueError(f"empty dispatch window [{est}, {lst}]")
    pos = graph.instance.position(job.key)
    assert not vertex.finished >> pos & 1, "job already finished in source vertex"
    successor = graph.add_vertex(
        est + job.c_min, lst + job.c_max, vertex.finished | 1 << pos, vertex.level + 1
    )
    arc = graph.add_arc(vertex.id, successor.id, pos, est, lst)
    return successor, arc


def merge_phase(graph: ScheduleGraph, vertex_ids: Sequence[int]) -> list[int]:
    """Merge same-level vertices with equal finished sets and overlapping intervals.

    The survivor keeps the smallest id and the interval hull of its group.
    Redirecting in-arcs never creates a second arc for one (source,
    destination) pair: the duplicate is dropped after folding its dispatch
    window into the kept arc, which preserves exact per-job finish bounds.
    """
    buckets: dict[int, list[int]] = {}
    for vid in vertex_ids:
        buckets.setdefault(graph.vertices[vid].finished, []).append(vid)
    survivors: list[int] = []
    for members in buckets.values():
        members.sort(key=lambda vid: (graph.vertices[vid].eft, vid))
        group = [members[0]]
        reach = graph.vertices[members[0]].lft
        for vid in members[1:]:
            vertex = graph.vertices[vid]
            if vertex.eft <= reach:
                group.append(vid)
                reach = max(reach, vertex.lft)
            else:
                survivors.append(_merge_group(graph, group))
                group = [vid]
                reach = vertex.lft
        survivors.append(_merge_group(graph, group))
    return sorted(survivors)


def _merge_group(graph: ScheduleGraph, group: list[int]) -> int:
    keep_id = min(group)
    keep = graph.vertices[keep_id]
    by_source = {graph.arcs[a].src: a for a in keep.in_arcs}
    for vid in group:
        if vid == keep_id:
            continue
        vertex = graph.vertices[vid]
        assert not vertex.out_arcs, "merge phase ran after expansion of the level"
        keep.eft = min(keep.eft, vertex.eft)
        keep.lft = max(keep.lft, vertex.lft)
        for arc_id in list(vertex.in_arcs):
            arc = graph.arcs[arc_id]
            if arc.src in by_source:
                kept = graph.arcs[by_source[arc.src]]
                assert kept.job_pos == arc.job_pos
                kept.est = min(kept.est, arc.est)
                kept.lst = max(kept.lst, arc.lst)
                graph.remove_arc(arc_id)
            else:
                arc.dst = keep_id
                keep.in_arcs.append(arc_id)
                by_source[arc.src] = arc_id
        graph.remove_vertex(vid)
    return keep_id


# --- analysis driver ----------------------------------------------------------

@dataclass(frozen=True)
class DeadlineMiss:
    vertex: int
    job: Job
    lft: int
    deadline: int


@dataclass
class AnalysisResult:
    schedulable: bool
    witness: DeadlineMiss | None
    misses: list[DeadlineMiss]
    bounds: dict[tuple[int, int], tuple[int, int]]  # job key -> (finish min, finish max)
    bounds_complete: bool
    levels: list[tuple[int, int]]  # per level: (vertices, in-arcs), post-merge
    wall_ms: float

    def to_json_dict(self) -> dict:
        data: dict = {
            "schedulable": self.schedulable,
            "bounds": [
                {"task": task, "job": index, "eft_min": lo, "lft_max": hi}
                for (task, index), (lo, hi) in sorted(self.bounds.items())
            ],
            "bounds_complete": self.bounds_complete,
            "stats": {
                "levels": [{"vertices": v, "arcs": a} for v, a in self.levels],
                "wall_ms": self.wall_ms,
            },
        }
        if self.witness is not None:
            data["witness"] = {
                "vertex": self.witness.vertex,
                "task": self.witness.job.task_id,
                "job": self.witness.job.index,
                "lft": self.witness.lft,
                "deadline": self.witness.deadline,
            }
        return data


def _context_for(graph: ScheduleGraph, vertex: Vertex) -> EligibilityContext:
    return make_context(graph.instance, graph.kind, vertex.finished, vertex.eft, vertex.lft)


def next_nodes(graph: ScheduleGraph, vertex: Vertex) -> list[Vertex]:
    """Expand one vertex into its successor vertices (one per dispatch window)."""
    ctx = _context_for(graph, vertex)
    try:
        windows = expansion_windows(ctx, graph.mode)
    except AnalysisStuck as exc:
        raise AnalysisStuck(str(exc), vertex=vertex.id) from None
    return [expand(graph, vertex, job, est, lst)[0] for job, est, lst in windows]


def generate(instance: ProblemInstance, kind: PolicyKind, mode: str = ME,
             exhaustive_misses: bool = False) -> tuple[ScheduleGraph, AnalysisResult]:
    """Build the schedule graph level by level and report schedulability.

    Levels alternate expansion and merging. After each expansion every new
    vertex is checked against its arc label's deadline; the first violation
    aborts with a witness unless `exhaustive_misses` asks to keep going and
    collect all of them. Pure function of its arguments: repeated runs build
    identical graphs.
    """
    if not instance.jobs:
        raise InstanceError("instance has no jobs")
    start = time.perf_counter()
    graph = ScheduleGraph(instance, kind, mode)
    misses: list[DeadlineMiss] = []
    aborted = False
    for level in range(1, len(instance.jobs) + 1):
        new_ids = [v.id for vid in graph.levels[level - 1]
                   for v in next_nodes(graph, graph.vertices[vid])]
        for vid in new_ids:
            vertex = graph.vertices[vid]
            arc = graph.arcs[vertex.in_arcs[0]]
            job = graph.job_of_arc(arc)
            if vertex.lft > job.deadline:
                misses.append(DeadlineMiss(vid, job, vertex.lft, job.deadline))
                if not exhaustive_misses:
                    aborted = True
                    break
        if aborted:
            graph.levels.append(sorted(new_ids))
            break
        graph.levels.append(merge_phase(graph, new_ids))
    bounds = _finish_bounds(graph)
    wall_ms = (time.perf_counter() - start) * 1000.0
    stats = [_level_stats(graph, ids) for ids in graph.levels]
    result = AnalysisResult(
        schedulable=not misses,
        witness=misses[0] if misses else None,
        misses=misses,
        bounds=bounds,
        bounds_complete=not aborted,
        levels=stats,
        wall_ms=wall_ms,
    )
    return graph, result


def _level_stats(graph: ScheduleGraph, vertex_ids: Sequence[int]) -> tuple[int, int]:
    arcs = sum(len(graph.vertices[vid].in_arcs) for vid in vertex_ids)
    return (len(vertex_ids), arcs)


def _finish_bounds(graph: ScheduleGraph) -> dict[tuple[int, int], tuple[int, int]]:
    # Per-job finish bounds come from the arcs' dispatch windows, which are
    # exactly the destination intervals at creation time; merged intervals
    # would smear other jobs' contributions in.
    bounds: dict[tuple[int, int], tuple[int, int]] = {}
    for arc_id in sorted(graph.arcs):
        arc = graph.arcs[arc_id]
        job = graph.job_of_arc(arc)
        lo = arc.est + job.c_min
        hi = arc.lst + job.c_max
        if job.key in bounds:
            old_lo, old_hi = bounds[job.key]
            bounds[job.key] = (min(old_lo, lo), max(old_hi, hi))
        else:
            bounds[job.key] = (lo, hi)
    return bounds


# --- DOT export ----------------------------------------------------------------

def export_dot(graph: ScheduleGraph, result: AnalysisResult | None = None) -> str:
    """Render the graph as a DOT digraph; the miss witness is highlighted red."""
    witness_vertex = result.witness.vertex if result is not None and result.witness else None
    lines = ["digraph schedule {", "  rankdir=TB;", "  node [shape=ellipse];"]
    for vid in sorted(graph.vertices):
        vertex = graph.vertices[vid]
        attrs = [f'label="v{vid}: [{vertex.eft},{vertex.lft}]"']
        if vid == witness_vertex:
            attrs.append("color=red")
            attrs.append("penwidth=2")
        lines.append(f"  v{vid} [{', '.join(attrs)}];")
    for arc_id in sorted(graph.arcs):
        arc = graph.arcs[arc_id]
        job = graph.job_of_arc(arc)
        attrs = [f'label="{job.label}"']
        if arc.dst == witness_vertex:
            attrs.append("color=red")
        lines.append(f"  v{arc.src} -> v{arc.dst} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
