"""Instances, block partitions, interval schedules and conversions.

All times are exact rationals (``fractions.Fraction``).  Schedules built by
this package stay on dyadic grids, but partitions are allowed to carry
arbitrary rationals so that non-dyadic inputs can be diagnosed.

Block numbers in the public API are 1-based (block ``i`` spans
``[events[i-1], events[i]]``); ``BlockPartition.xi[k]`` holds block ``k+1``.
"""

from __future__ import annotations

import bisect
import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

from .dyadic import fmt_time, parse_time

ZERO = Fraction(0)
ONE = Fraction(1)


class CapacityError(ValueError):
    """Amounts do not fit into a block (per-job or aggregate)."""


class InfeasibleError(ValueError):
    """A partition or schedule violates the feasibility conditions."""

    def __init__(self, report):
        super().__init__(str(report))
        self.report = report


# ---------------------------------------------------------------------------
# validation reports


@dataclass(frozen=True)
class Violation:
    condition: str
    message: str
    block: int | None = None
    job: int | None = None

    def to_dict(self) -> dict:
        out = {"condition": self.condition, "message": self.message}
        if self.block is not None:
            out["block"] = self.block
        if self.job is not None:
            out["job"] = self.job
        return out


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    @property
    def conditions(self) -> set[str]:
        return {v.condition for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "; ".join(v.message for v in self.violations)

    def to_dict(self) -> dict:
        return {"valid": self.ok, "violations": [v.to_dict() for v in self.violations]}


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class Job:
    id: int
    release: int = 0
    parent: int | None = None


@dataclass(frozen=True)
class Instance:
    """Unit jobs with integer releases; ``parent`` is the unique successor."""

    jobs: tuple[Job, ...]
    meta: Mapping = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "jobs", tuple(self.jobs))

    @classmethod
    def from_lists(cls, releases: Iterable[int], parents: Iterable[int | None], meta=None) -> Instance:
        jobs = tuple(Job(i, r, p) for i, (r, p) in enumerate(zip(releases, parents)))
        return cls(jobs, dict(meta or {}))

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def ids(self) -> range:
        return range(len(self.jobs))

    def release(self, job: int) -> int:
        return self.jobs[job].release

    def parent(self, job: int) -> int | None:
        return self.jobs[job].parent

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in self.jobs]
        for j in self.jobs:
            if j.parent is not None:
                kids[j.parent].append(j.id)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def _ancestors(self) -> tuple[frozenset, ...]:
        out = []
        for j in self.jobs:
            seen = set()
            p = j.parent
            while p is not None and p not in seen:
                seen.add(p)
                p = self.jobs[p].parent
            out.append(frozenset(seen))
        return tuple(out)

    def precedes(self, a: int, b: int) -> bool:
        """``a`` must complete before ``b`` may start (transitive)."""
        return b in self._ancestors[a]

    def independent(self, a: int, b: int) -> bool:
        return a == b or not (self.precedes(a, b) or self.precedes(b, a))

    @cached_property
    def topological_order(self) -> tuple[int, ...]:
        order, done = [], set()
        pending = list(self.ids)
        while pending:
            rest = []
            for j in pending:
                if all(c in done for c in self.children[j]):
                    order.append(j)
                    done.add(j)
                else:
                    rest.append(j)
            if len(rest) == len(pending):
                raise ValueError("precedence cycle")
            pending = rest
        return tuple(order)

    def to_json(self) -> dict:
        jobs = []
        for j in self.jobs:
            rec = {"id": j.id, "release": j.release}
            if j.parent is not None:
                rec["parent"] = j.parent
            jobs.append(rec)
        out = {"jobs": jobs}
        if self.meta:
            out["meta"] = dict(self.meta)
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> Instance:
        jobs = sorted(data["jobs"], key=lambda r: r["id"])
        return cls(
            tuple(Job(int(r["id"]), r.get("release", 0), r.get("parent")) for r in jobs),
            dict(data.get("meta", {})),
        )


def validate_instance(instance: Instance) -> ValidationReport:
    """Check ids, releases and that parent links form an in-forest."""
    out = []
    ids = [j.id for j in instance.jobs]
    seen = set()
    for jid in ids:
        if jid in seen:
            out.append(Violation("duplicate_id", f"duplicate job id {jid}", job=jid))
        seen.add(jid)
    if sorted(seen) != list(range(len(seen))) or len(ids) != len(seen):
        if not any(v.condition == "duplicate_id" for v in out):
            out.append(Violation("dense_ids", "job ids must be 0..n-1"))
    for j in instance.jobs:
        if not isinstance(j.release, int) or isinstance(j.release, bool):
            out.append(Violation("release", f"job {j.id}: release {j.release!r} is not an integer", job=j.id))
        elif j.release < 0:
            out.append(Violation("negative_release", f"job {j.id}: negative release {j.release}", job=j.id))
        if j.parent is not None and j.parent not in seen:
            out.append(Violation("unknown_parent", f"job {j.id}: unknown parent {j.parent}", job=j.id))
        if j.parent == j.id:
            out.append(Violation("cycle", f"job {j.id} is its own parent", job=j.id))
    if out:
        return ValidationReport(tuple(out))
    parent = {j.id: j.parent for j in instance.jobs}
    reported = set()
    for start in ids:
        path, p = [], start
        while p is not None and p not in path:
            path.append(p)
            p = parent[p]
        if p is not None:
            cyc = frozenset(path[path.index(p):])
            if cyc not in reported:
                reported.add(cyc)
                out.append(Violation("cycle", f"precedence cycle through jobs {sorted(cyc)}", job=min(cyc)))
    return ValidationReport(tuple(out))


# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True, order=True)
class Piece:
    start: Fraction
    end: Fraction
    job: int

    @property
    def length(self) -> Fraction:
        return self.end - self.start

    def to_json(self) -> dict:
        return {"job": self.job, "start": fmt_time(self.start), "end": fmt_time(self.end)}


def _merge_machine(pieces: Iterable[Piece]) -> tuple[Piece, ...]:
    out: list[Piece] = []
    for p in sorted(pieces):
        if p.end <= p.start:
            continue
        if out and out[-1].job == p.job and out[-1].end == p.start:
            out[-1] = Piece(out[-1].start, p.end, p.job)
        else:
            out.append(p)
    return tuple(out)


@dataclass(frozen=True)
class IntervalSchedule:
    """Two machines, each an ordered sequence of ``Piece``s."""

    machines: tuple[tuple[Piece, ...], tuple[Piece, ...]]

    def __post_init__(self):
        ms = tuple(_merge_machine(m) for m in self.machines)
        if len(ms) != 2:
            raise ValueError("exactly two machines are supported")
        object.__setattr__(self, "machines", ms)

    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple[int, object, object, int]]) -> IntervalSchedule:
        """Build from ``(machine, start, end, job)`` tuples."""
        ms: list[list[Piece]] = [[], []]
        for m, s, e, j in pieces:
            ms[m].append(Piece(parse_time(s), parse_time(e), j))
        return cls((tuple(ms[0]), tuple(ms[1])))

    def pieces(self) -> list[Piece]:
        return sorted(self.machines[0] + self.machines[1])

    def job_pieces(self, job: int) -> list[Piece]:
        return [p for p in self.pieces() if p.job == job]

    @cached_property
    def _by_job(self) -> dict[int, list[Piece]]:
        out = defaultdict(list)
        for p in self.pieces():
            out[p.job].append(p)
        return dict(out)

    def jobs(self) -> list[int]:
        return sorted(self._by_job)

    def start(self, job: int) -> Fraction:
        return self._by_job[job][0].start

    def completion(self, job: int) -> Fraction:
        return max(p.end for p in self._by_job[job])

    def runs(self, job: int) -> list[tuple[Fraction, Fraction]]:
        """Maximal intervals of uninterrupted execution (machine switches allowed)."""
        out: list[list[Fraction]] = []
        for p in self._by_job.get(job, ()):
            if out and p.start <= out[-1][1]:
                out[-1][1] = max(out[-1][1], p.end)
            else:
                out.append([p.start, p.end])
        return [(a, b) for a, b in out]

    def runs_throughout(self, job: int, lo, hi) -> bool:
        lo, hi = Fraction(lo), Fraction(hi)
        if hi <= lo:
            return True
        return any(a <= lo and hi <= b for a, b in self.runs(job))

    def amount_in(self, job: int, lo, hi) -> Fraction:
        lo, hi = Fraction(lo), Fraction(hi)
        tot = ZERO
        for p in self._by_job.get(job, ()):
            a, b = max(p.start, lo), min(p.end, hi)
            if b > a:
                tot += b - a
        return tot

    def restricted(self, lo=None, hi=None) -> IntervalSchedule:
        """Pieces clipped to ``[lo, hi]`` (open ends when ``None``)."""
        ms = []
        for m in self.machines:
            keep = []
            for p in m:
                s = p.start if lo is None else max(p.start, Fraction(lo))
                e = p.end if hi is None else min(p.end, Fraction(hi))
                if e > s:
                    keep.append(Piece(s, e, p.job))
            ms.append(tuple(keep))
        return IntervalSchedule(tuple(ms))

    def to_json(self) -> dict:
        return {"machines": [[p.to_json() for p in m] for m in self.machines]}

    @classmethod
    def from_json(cls, data: Mapping) -> IntervalSchedule:
        ms = []
        for m in data["machines"]:
            ms.append(tuple(Piece(parse_time(r["start"]), parse_time(r["end"]), int(r["job"])) for r in m))
        while len(ms) < 2:
            ms.append(())
        return cls(tuple(ms))


def validate_schedule(instance: Instance, schedule: IntervalSchedule) -> ValidationReport:
    out = []
    for mi, m in enumerate(schedule.machines):
        for p, q in zip(m, m[1:]):
            if q.start < p.end:
                out.append(Violation("overlap", f"machine {mi + 1}: pieces overlap at {fmt_time(q.start)}", job=q.job))
    ids = set(instance.ids)
    for j in schedule.jobs():
        if j not in ids:
            out.append(Violation("unknown_job", f"job {j} is not in the instance", job=j))
    for j in instance.ids:
        ps = schedule._by_job.get(j, [])
        total = sum((p.length for p in ps), ZERO)
        if total != 1:
            out.append(Violation("total", f"job {j}: processed {fmt_time(total)} instead of 1", job=j))
        if not ps:
            continue
        for p, q in zip(ps, ps[1:]):
            if q.start < p.end:
                out.append(Violation("parallel", f"job {j} runs on both machines at {fmt_time(q.start)}", job=j))
        if ps[0].start < instance.release(j):
            out.append(Violation("release", f"job {j} starts before its release", job=j))
        par = instance.parent(j)
        if par is not None and par in schedule._by_job and schedule.start(par) < schedule.completion(j):
            out.append(Violation("precedence", f"job {par} starts before predecessor {j} completes", job=par))
    return ValidationReport(tuple(out))


@dataclass(frozen=True)
class ScheduleMetrics:
    completions: dict
    total_completion_time: Fraction
    makespan: Fraction

    def to_json(self) -> dict:
        return {
            "completions": {str(k): fmt_time(v) for k, v in sorted(self.completions.items())},
            "total": fmt_time(self.total_completion_time),
            "makespan": fmt_time(self.makespan),
        }


def schedule_metrics(schedule: IntervalSchedule) -> ScheduleMetrics:
    comp = {j: schedule.completion(j) for j in schedule.jobs()}
    return ScheduleMetrics(comp, sum(comp.values(), ZERO), max(comp.values(), default=ZERO))


def total_completion_time(schedule: IntervalSchedule) -> Fraction:
    return schedule_metrics(schedule).total_completion_time


# ---------------------------------------------------------------------------
# block partitions


@dataclass(frozen=True)
class BlockPartition:
    """Events ``e_1 < ... < e_q`` (``e_1 = 0``) and per-block job amounts."""

    events: tuple[Fraction, ...]
    xi: tuple[Mapping[int, Fraction], ...]

    def __post_init__(self):
        ev = tuple(parse_time(e) for e in self.events)
        xi = tuple({int(j): parse_time(v) for j, v in blk.items() if parse_time(v) != 0} for blk in self.xi)
        if len(xi) != max(len(ev) - 1, 0):
            raise ValueError(f"{len(ev)} events need {max(len(ev) - 1, 0)} blocks, got {len(xi)}")
        object.__setattr__(self, "events", ev)
        object.__setattr__(self, "xi", xi)

    @property
    def num_blocks(self) -> int:
        return len(self.xi)

    def length(self, block: int) -> Fraction:
        return self.events[block] - self.events[block - 1]

    def start_of(self, block: int) -> Fraction:
        return self.events[block - 1]

    def end_of(self, block: int) -> Fraction:
        return self.events[block]

    def amount(self, block: int, job: int) -> Fraction:
        if block < 1 or block > len(self.xi):
            return ZERO
        return self.xi[block - 1].get(job, ZERO)

    def active(self, block: int) -> set[int]:
        """Jobs with positive amount in the block."""
        return set(self.xi[block - 1])

    def spans(self, block: int, job: int) -> bool:
        return self.amount(block, job) == self.length(block)

    @cached_property
    def jobs(self) -> list[int]:
        return sorted({j for blk in self.xi for j in blk})

    @cached_property
    def _first_last(self) -> dict[int, tuple[int, int]]:
        out = {}
        for k, blk in enumerate(self.xi, start=1):
            for j in blk:
                f, _ = out.get(j, (k, k))
                out[j] = (f, k)
        return out

    def tau(self, job: int) -> int:
        """Last block in which ``job`` has positive amount."""
        return self._first_last[job][1]

    def first_block(self, job: int) -> int:
        return self._first_last[job][0]

    def start_time(self, job: int) -> Fraction:
        return self.start_of(self.first_block(job))

    def completion_time(self, job: int) -> Fraction:
        """Block-level completion ``e_{tau+1}``; equals the real one for canonical partitions."""
        return self.end_of(self.tau(job))

    def idle(self, block: int) -> Fraction:
        return 2 * self.length(block) - sum(self.xi[block - 1].values(), ZERO)

    def to_json(self) -> dict:
        return {
            "events": [fmt_time(e) for e in self.events],
            "xi": [{str(j): fmt_time(v) for j, v in sorted(blk.items())} for blk in self.xi],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> BlockPartition:
        return cls(tuple(data["events"]), tuple(data["xi"]))


def partition_feasible(instance: Instance, partition: BlockPartition) -> ValidationReport:
    """Itemize every violated feasibility condition of ``partition``."""
    out = []
    ev = partition.events
    if not ev or ev[0] != 0:
        out.append(Violation("events", "events must start at 0"))
    for k in range(1, len(ev)):
        if ev[k] <= ev[k - 1]:
            out.append(Violation("events", f"events not strictly increasing at position {k + 1}"))
    if out:
        return ValidationReport(tuple(out))
    ids = set(instance.ids)
    totals = defaultdict(Fraction)
    for b in range(1, partition.num_blocks + 1):
        length = partition.length(b)
        blk = partition.xi[b - 1]
        for j, v in sorted(blk.items()):
            if j not in ids:
                out.append(Violation("unknown_job", f"block {b}: unknown job {j}", b, j))
                continue
            totals[j] += v
            if v < 0:
                out.append(Violation("nonnegative", f"block {b}: negative amount for job {j}", b, j))
            if v > length:
                out.append(Violation("job_capacity", f"block {b}: job {j} amount {fmt_time(v)} exceeds block length {fmt_time(length)}", b, j))
            if v > 0 and instance.release(j) > partition.start_of(b):
                out.append(Violation("release", f"block {b}: job {j} runs before its release {instance.release(j)}", b, j))
        load = sum(blk.values(), ZERO)
        if load > 2 * length:
            out.append(Violation("block_capacity", f"block {b}: load {fmt_time(load)} exceeds 2 x {fmt_time(length)}", b))
    for j in instance.ids:
        if totals[j] != 1:
            out.append(Violation("total", f"job {j}: total amount {fmt_time(totals[j])} instead of 1", job=j))
    for j in instance.ids:
        par = instance.parent(j)
        if par is None or j not in partition._first_last or par not in partition._first_last:
            continue
        if partition.first_block(par) <= partition.tau(j):
            out.append(Violation(
                "precedence",
                f"block {partition.first_block(par)}: job {par} runs before predecessor {j} is finished",
                partition.first_block(par), par,
            ))
    return ValidationReport(tuple(out))


def mcnaughton_block(
    amounts: Mapping[int, object], block_start, block_end, order=None
) -> tuple[list[Piece], list[Piece]]:
    """Wrap-around fill of one block, jobs in ascending id order unless
    ``order`` (a sequence of the job ids) says otherwise."""
    lo, hi = parse_time(block_start), parse_time(block_end)
    length = hi - lo
    amts = {j: parse_time(v) for j, v in amounts.items() if parse_time(v) != 0}
    for j, v in amts.items():
        if v < 0 or v > length:
            raise CapacityError(f"job {j}: amount {fmt_time(v)} does not fit a block of length {fmt_time(length)}")
    if sum(amts.values(), ZERO) > 2 * length:
        raise CapacityError(f"total amount exceeds twice the block length {fmt_time(length)}")
    m1: list[Piece] = []
    m2: list[Piece] = []
    t, machine = lo, m1
    seq = sorted(amts) if order is None else [j for j in order if j in amts]
    if len(seq) != len(amts):
        raise ValueError("order must list every job with a positive amount")
    for j in seq:
        v = amts[j]
        if machine is m1 and t + v > hi:
            head = hi - t
            if head > 0:
                m1.append(Piece(t, hi, j))
            machine, t = m2, lo
            v -= head
        machine.append(Piece(t, t + v, j))
        t += v
        if machine is m1 and t == hi:
            machine, t = m2, lo
    return m1, m2


def _completing_first(partition: BlockPartition, block: int) -> list[int]:
    blk = partition.xi[block - 1]
    return sorted(blk, key=lambda j: (partition.tau(j) != block, blk[j], j))


def realize(instance: Instance, partition: BlockPartition, completing_first: bool = False) -> IntervalSchedule:
    """Canonical schedule: McNaughton inside every block.

    With ``completing_first`` the jobs whose last block this is are packed
    first, shortest first: each of them still ends by the block end, and the
    shortest one ends before it unless it spans the block.
    """
    rep = partition_feasible(instance, partition)
    if not rep:
        raise InfeasibleError(rep)
    m1: list[Piece] = []
    m2: list[Piece] = []
    for b in range(1, partition.num_blocks + 1):
        order = _completing_first(partition, b) if completing_first else None
        a, c = mcnaughton_block(partition.xi[b - 1], partition.start_of(b), partition.end_of(b), order)
        m1 += a
        m2 += c
    return IntervalSchedule((tuple(m1), tuple(m2)))


def derive_partition(instance: Instance, schedule: IntervalSchedule) -> BlockPartition:
    """Events of ``schedule`` (0, starts, completions) and per-block amounts."""
    rep = validate_schedule(instance, schedule)
    if not rep:
        raise InfeasibleError(rep)
    points = {ZERO}
    for j in schedule.jobs():
        points.add(schedule.start(j))
        points.add(schedule.completion(j))
    events = sorted(points)
    xi = [defaultdict(Fraction) for _ in events[1:]]
    for p in schedule.pieces():
        k = bisect.bisect_right(events, p.start) - 1
        t = p.start
        while t < p.end:
            hi = min(events[k + 1], p.end)
            xi[k][p.job] += hi - t
            t = hi
            k += 1
    return BlockPartition(tuple(events), tuple(dict(b) for b in xi))


def partition_cost(instance: Instance, partition: BlockPartition) -> Fraction:
    """Total completion time of the completing-first realization."""
    return total_completion_time(realize(instance, partition, completing_first=True))


def canonical(instance: Instance, partition: BlockPartition) -> tuple[BlockPartition, IntervalSchedule]:
    """Realize ``partition`` and re-derive its events from the realization."""
    sched = realize(instance, partition)
    return derive_partition(instance, sched), sched


# ---------------------------------------------------------------------------
# JSON helpers


def dumps(obj, deterministic: bool = True) -> str:
    if hasattr(obj, "to_json"):
        obj = obj.to_json()
    return json.dumps(obj, indent=2, sort_keys=deterministic) + "\n"


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
