"""Structural diagnostics: normality, resolution, preemptions and the
configurations that cannot occur in an optimal schedule.

Partition-level predicates use block-level start/completion
(``e_{first block}``, ``e_{tau+1}``), which are exact for partitions derived
from a schedule.  Piece-level predicates (non-preemptive execution) need a
realization; when none is given the canonical McNaughton layout of the
partition is used, so results are layout-relative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .dyadic import fmt_time
from .timeline import (
    BlockPartition,
    Instance,
    IntervalSchedule,
    realize,
)

INF = math.inf

KINDS = (
    "NonSpanningCompletion",
    "TooManyJobsInBlock",
    "IdleTimeViolation",
    "Interlace",
    "CcdConfiguration",
    "BetweenPreemptions",
    "AbnormalBlock",
)


def is_l_normal(x, l: int) -> bool:
    """True iff ``x * 2**l`` is an integer."""
    return (Fraction(x) * 2**l).denominator == 1


def block_is_normal(partition: BlockPartition, block: int, level: int | None = None) -> bool:
    level = block if level is None else level
    if not is_l_normal(partition.length(block), level):
        return False
    return all(is_l_normal(v, level + 1) for v in partition.xi[block - 1].values())


def abnormality_point(partition: BlockPartition):
    """First block ``i`` (1-based) that is not ``i``-normal, or ``math.inf``."""
    for b in range(1, partition.num_blocks + 1):
        if not block_is_normal(partition, b):
            return b
    return INF


def abnormal_jobs(partition: BlockPartition, block: int) -> set[int]:
    """``A_i``: jobs whose amount in block ``i`` is not ``(i+1)``-normal."""
    return {j for j, v in partition.xi[block - 1].items() if not is_l_normal(v, block + 1)}


def shifts_and_resolution(schedule: IntervalSchedule) -> tuple[list[Fraction], Fraction | None]:
    """Consecutive gaps between piece boundaries and their minimum.

    Returns ``([], None)`` when the schedule has fewer than two time points.
    """
    points = sorted({t for p in schedule.pieces() for t in (p.start, p.end)})
    shifts = sorted(b - a for a, b in zip(points, points[1:]))
    if not shifts:
        return [], None
    return shifts, shifts[0]


def time_points(schedule: IntervalSchedule) -> list[Fraction]:
    return sorted({t for p in schedule.pieces() for t in (p.start, p.end)})


def count_preemptions(schedule: IntervalSchedule, job: int) -> int:
    runs = schedule.runs(job)
    if not runs:
        raise KeyError(f"job {job} does not appear in the schedule")
    return len(runs) - 1


# ---------------------------------------------------------------------------
# diagnoses


@dataclass(frozen=True)
class Diagnosis:
    kind: str
    block: int | None = None
    jobs: tuple[int, ...] = ()
    witness: dict = field(default_factory=dict, compare=False, hash=False)
    message: str = field(default="", compare=False)

    def to_json(self) -> dict:
        loc = {"jobs": list(self.jobs)}
        if self.block is not None:
            loc["block"] = self.block
        return {
            "kind": self.kind,
            "location": loc,
            "witness": {k: (fmt_time(v) if isinstance(v, Fraction) else v) for k, v in self.witness.items()},
            "message": self.message,
        }


def _independent_of_all(instance: Instance, a: int, jobs) -> bool:
    return all(instance.independent(a, b) for b in jobs)


def _active_union(partition: BlockPartition, lo: int, hi: int) -> set[int]:
    out: set[int] = set()
    for b in range(max(lo, 1), min(hi, partition.num_blocks) + 1):
        out |= partition.active(b)
    return out


def interlace_witnesses(instance: Instance, partition: BlockPartition):
    """All ``(a, b, t)`` with ``a`` and ``b`` interlacing at block ``t``, in
    order of ``tau(a)``, then ``t``, then job ids."""
    P = partition
    out = []
    for a in P.jobs:
        ta = P.tau(a)
        for t in range(1, ta):
            if P.spans(t, a) or instance.release(a) >= P.end_of(t):
                continue
            if not _independent_of_all(instance, a, _active_union(P, t, ta)):
                continue
            for b in sorted(P.active(t)):
                if b == a or P.tau(b) <= ta or P.spans(ta, b):
                    continue
                out.append((a, b, t))
    out.sort(key=lambda w: (P.tau(w[0]), w[2], w[0], w[1]))
    return out


def find_interlace(instance: Instance, partition: BlockPartition):
    w = interlace_witnesses(instance, partition)
    return w[0] if w else None


def _completing_at(partition: BlockPartition, event_index: int) -> list[int]:
    """Jobs whose block-level completion is ``events[event_index]`` (0-based)."""
    return [j for j in partition.jobs if partition.tau(j) == event_index]


def ccd_witnesses(instance: Instance, partition: BlockPartition):
    """``(c, c', d, j)`` with c, c' completing at ``e_j`` and d at ``e_{j+1}``."""
    P = partition
    out = []
    for j in range(2, P.num_blocks + 1):  # e_j with a block j after it
        done = _completing_at(P, j - 1)
        if len(done) < 2:
            continue
        for d in _completing_at(P, j):
            if P.start_time(d) >= P.events[j - 1]:
                continue
            for x in range(len(done)):
                for y in range(x + 1, len(done)):
                    c, c2 = done[x], done[y]
                    group = {c, c2} | P.active(j)
                    if all(instance.independent(u, v) for u in group for v in group):
                        out.append((c, c2, d, j))
    return out


def between_preemption_witnesses(instance: Instance, partition: BlockPartition):
    """Pairs violating the conclusion ``s(a') >= e_{j+1}`` and ``tau(a) > j'``."""
    P = partition
    out = []
    nb = P.num_blocks
    for a in P.jobs:
        blocks = [b for b in range(1, nb + 1) if P.amount(b, a) > 0]
        for j in blocks:
            for jp in blocks:
                if jp <= j + 1:
                    continue
                if not all(P.spans(t, a) for t in range(j + 1, jp)):
                    continue
                for a2 in P.jobs:
                    if a2 == a or P.amount(j, a2) != 0 or P.tau(a2) != jp - 1:
                        continue
                    succ = instance.parent(a2)
                    if succ is not None and succ in P.jobs and P.start_time(succ) == P.events[jp - 1]:
                        continue
                    if P.start_time(a2) < P.end_of(j) or P.tau(a) <= jp:
                        out.append((a, a2, j, jp))
    return out


def lint(instance: Instance, partition: BlockPartition, maximal: bool = False) -> list[Diagnosis]:
    """Necessary conditions for optimality that ``partition`` violates.

    An empty list does not certify optimality.  With ``maximal=True`` the
    abnormality-point structure that only maximal optimal schedules satisfy
    is checked as well.
    """
    P = partition
    out: list[Diagnosis] = []
    nb = P.num_blocks
    for a in P.jobs:
        b = P.tau(a)
        if not P.spans(b, a):
            out.append(Diagnosis(
                "NonSpanningCompletion", b, (a,),
                {"amount": P.amount(b, a), "block_length": P.length(b)},
                f"job {a} completes in block {b} without spanning it",
            ))
    for b in range(1, nb + 1):
        act = sorted(P.active(b))
        completes = [a for a in act if P.tau(a) == b]
        if len(act) > 3 or (len(act) == 3 and not completes):
            out.append(Diagnosis(
                "TooManyJobsInBlock", b, tuple(act), {"count": len(act)},
                f"block {b} has {len(act)} jobs" + ("" if len(act) > 3 else " and none completes at its end"),
            ))
    for b in range(1, nb - 1 + 1):
        if b > nb - 1 or P.idle(b) <= 0:
            continue
        for a in P.jobs:
            if P.spans(b, a):
                continue
            if P.first_block(a) <= b < P.tau(a):
                out.append(Diagnosis(
                    "IdleTimeViolation", b, (a,), {"idle": P.idle(b)},
                    f"block {b} has idle time while job {a} is started, unfinished and not spanning",
                ))
                break
    for a, b, t in interlace_witnesses(instance, P):
        out.append(Diagnosis("Interlace", t, (a, b), {"t": t}, f"jobs {a} and {b} interlace at block {t}"))
    for c, c2, d, j in ccd_witnesses(instance, P):
        out.append(Diagnosis(
            "CcdConfiguration", j, (c, c2, d), {"event": P.events[j - 1]},
            f"jobs {c}, {c2} complete at e_{j} and job {d} at e_{j + 1}",
        ))
    for a, a2, j, jp in between_preemption_witnesses(instance, P):
        out.append(Diagnosis(
            "BetweenPreemptions", j, (a, a2), {"j": j, "j_prime": jp},
            f"job {a2} completes between two pieces of job {a} (blocks {j}, {jp})",
        ))
    if maximal:
        i = abnormality_point(P)
        if i != INF:
            A = abnormal_jobs(P, i)
            if len(A) != 2 or len(P.active(i)) != 3:
                out.append(Diagnosis(
                    "AbnormalBlock", i, tuple(sorted(A)), {"abnormal": len(A), "active": len(P.active(i))},
                    f"abnormality point {i} has |A_i| = {len(A)} and {len(P.active(i))} jobs",
                ))
    return out


def recheck(instance: Instance, partition: BlockPartition, diagnosis: Diagnosis) -> bool:
    """Re-run the defining predicate and confirm ``diagnosis`` is reproduced."""
    return diagnosis in lint(instance, partition, maximal=diagnosis.kind == "AbnormalBlock")


# ---------------------------------------------------------------------------
# piece-level configurations


def _layout(instance, partition, schedule):
    if schedule is None:
        schedule = realize(instance, partition)
    return partition, schedule


@dataclass(frozen=True)
class AConfiguration:
    a: int
    b: int
    at_event: Fraction
    length: Fraction
    b_completes_at: Fraction

    def to_json(self) -> dict:
        return {
            "a": self.a, "b": self.b, "at_event": fmt_time(self.at_event),
            "length": fmt_time(self.length), "b_completes_at": fmt_time(self.b_completes_at),
        }


def find_a_configurations(instance: Instance, partition: BlockPartition, schedule: IntervalSchedule | None = None):
    P, S = _layout(instance, partition, schedule)
    ev = P.events
    index = {e: k for k, e in enumerate(ev, start=1)}
    out = []
    for a in P.jobs:
        ej = S.completion(a)
        j = index.get(ej)
        if j is None:
            continue
        lo, hi = S.runs(a)[-1]
        ell = hi - lo
        if ell <= 0:
            continue
        for b in P.jobs:
            if b == a:
                continue
            ejp = S.completion(b)
            jp = index.get(ejp)
            if jp is None or jp <= j:
                continue
            if not S.runs_throughout(b, ej, ejp):
                continue
            if S.amount_in(b, lo, hi) > 0:
                continue
            if not S.start(b) < lo:
                continue
            if not _independent_of_all(instance, a, _active_union(P, j, jp)):
                continue
            out.append(AConfiguration(a, b, ej, ell, ejp))
    out.sort(key=lambda c: (c.at_event, c.a, c.b))
    return out


@dataclass(frozen=True)
class AlternatingChain:
    jobs: tuple[int, ...]
    anchor_event: Fraction
    abnormality_point: int

    def to_json(self) -> dict:
        return {"jobs": list(self.jobs), "anchor_event": fmt_time(self.anchor_event),
                "abnormality_point": self.abnormality_point}


class NormalScheduleError(ValueError):
    """Chains are only defined relative to a finite abnormality point."""


def is_alternating_chain(instance, partition, schedule, chain) -> bool:
    P, S = partition, schedule
    i = abnormality_point(P)
    if i == INF:
        return False
    anchor = P.events[i]
    A = abnormal_jobs(P, i)
    d = list(chain)
    if not d or d[0] not in A:
        return False
    C = [S.completion(x) for x in d]
    if not S.runs_throughout(d[0], anchor, C[0]):
        return False
    if len(d) == 1:
        return True
    if A != {d[0], d[1]} or P.tau(d[0]) != i + 1:
        return False
    if any(C[k] >= C[k + 1] for k in range(len(d) - 1)):
        return False
    for k in range(1, len(d)):
        lo = anchor if k < 2 else C[k - 2]
        if not S.runs_throughout(d[k], lo, C[k]):
            return False
    return True


def find_alternating_chains(instance: Instance, partition: BlockPartition, schedule: IntervalSchedule | None = None):
    """Greedy maximal alternating chains rooted at each job of ``A_i``.

    Raises ``NormalScheduleError`` when the partition is normal.
    """
    P, S = _layout(instance, partition, schedule)
    i = abnormality_point(P)
    if i == INF:
        raise NormalScheduleError("normal schedule: no abnormality point")
    anchor = P.events[i]
    A = abnormal_jobs(P, i)
    chains = []
    for d1 in sorted(A, key=lambda j: (S.completion(j), j)):
        chain = [d1]
        if not is_alternating_chain(instance, P, S, chain):
            continue
        others = sorted(A - {d1})
        if len(A) == 2 and is_alternating_chain(instance, P, S, chain + others):
            chain += others
            while True:
                cands = [
                    x for x in P.jobs
                    if x not in chain and S.completion(x) > S.completion(chain[-1])
                    and is_alternating_chain(instance, P, S, chain + [x])
                ]
                if not cands:
                    break
                chain.append(min(cands, key=lambda x: (S.completion(x), x)))
        chains.append(AlternatingChain(tuple(chain), anchor, i))
    return chains
