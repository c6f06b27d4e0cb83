"""Lower-bound family J_p, its explicit schedules P_p, and random corpora.

Job numbering for the family: level ``i`` owns ids ``4i .. 4i+3``, i.e.
``a_1^i, a_2^i, a_3^i, a_4^i``.  The theorem instance appends job ``a``
(id ``4(p+1)``) and the chain ``b_1 .. b_l`` after it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .timeline import Instance, IntervalSchedule, Job, Piece, mcnaughton_block

CHAIN_CAP = 10**7


@dataclass(frozen=True)
class FamilyParams:
    p: int = 0
    chain_length: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.p < 0:
            raise ValueError("p must be nonnegative")
        if self.chain_length is not None and self.chain_length < 1:
            raise ValueError("chain_length must be positive")


def job_id(level: int, j: int) -> int:
    """Id of ``a_j^level`` (``j`` in 1..4)."""
    return 4 * level + (j - 1)


def make_jp(p: int) -> Instance:
    if p < 0:
        raise ValueError("p must be nonnegative")
    jobs = []
    for i in range(p + 1):
        for j in (1, 2, 3):
            jobs.append(Job(job_id(i, j), 2 * i, job_id(i, 4)))
        jobs.append(Job(job_id(i, 4), 2 * i + 1, job_id(i + 1, 4) if i < p else None))
    return Instance(tuple(jobs), {"family": "jp", "p": p})


def a4_completion(p: int) -> Fraction:
    """``2p + 3 - 1/2^(p+1)``."""
    return 2 * p + 3 - Fraction(1, 2 ** (p + 1))


def _pp_pieces(p: int) -> list[tuple[int, Fraction, Fraction, int]]:
    m1, m2 = mcnaughton_block({0: 1, 1: 1, 2: 1}, 0, Fraction(3, 2))
    out = [(0, x.start, x.end, x.job) for x in m1] + [(1, x.start, x.end, x.job) for x in m2]
    out.append((0, Fraction(3, 2), Fraction(5, 2), job_id(0, 4)))
    for i in range(1, p + 1):
        lo, hi = Fraction(1, 2**i), Fraction(1, 2 ** (i + 1))
        out += [
            (1, Fraction(2 * i), Fraction(2 * i + 1), job_id(i, 1)),
            (0, 2 * i + 1 - lo, 2 * i + 1 - hi, job_id(i, 2)),
            (1, Fraction(2 * i + 1), 2 * i + 2 - hi, job_id(i, 2)),
            (0, 2 * i + 1 - hi, 2 * i + 2 - hi, job_id(i, 3)),
            (0, 2 * i + 2 - hi, 2 * i + 3 - hi, job_id(i, 4)),
        ]
    return out


def make_pp_schedule(p: int) -> IntervalSchedule:
    """The iterative construction: level ``i`` on machine 1 (a_2 head, a_3, a_4)
    and machine 2 (a_1, a_2 tail)."""
    if p < 0:
        raise ValueError("p must be nonnegative")
    return IntervalSchedule.from_pieces(_pp_pieces(p))


def default_chain_length(p: int) -> int:
    c = 2 * 4 * (p + 1) + 3
    val = a4_completion(p) * 2**c
    assert val.denominator == 1
    return int(val)


def make_theorem_instance(p: int, chain_length: int | None = None) -> Instance:
    """``{a} + J_p + {b_1..b_l}`` with ``a_4^p -> b_1``, ``a -> b_1`` and a b-chain."""
    base = make_jp(p)
    meta = {"family": "theorem", "p": p}
    if chain_length is None:
        chain_length = default_chain_length(p)
        if chain_length > CHAIN_CAP:
            raise ValueError(
                f"default chain length {chain_length} exceeds the cap {CHAIN_CAP}; pass chain_length"
            )
    else:
        meta["chain_length_override"] = True
        meta["default_chain_length"] = str(default_chain_length(p))
    meta["chain_length"] = chain_length
    n0 = base.n
    a = n0
    b1 = n0 + 1
    jobs = [Job(j.id, j.release, j.parent if j.id != job_id(p, 4) else b1) for j in base.jobs]
    jobs.append(Job(a, 0, b1))
    for k in range(chain_length):
        bid = b1 + k
        jobs.append(Job(bid, 0, bid + 1 if k + 1 < chain_length else None))
    return Instance(tuple(jobs), meta)


def make_theorem_schedule(p: int, chain_length: int | None = None) -> tuple[Instance, IntervalSchedule]:
    """P_p with ``a`` in the idle gaps on machine 2 and the b-chain after ``a_4^p``."""
    inst = make_theorem_instance(p, chain_length)
    l = inst.meta["chain_length"]
    a = 4 * (p + 1)
    pieces = _pp_pieces(p)
    for i in range(p):
        gap = Fraction(1, 2 ** (i + 1))
        pieces.append((1, 2 * i + 2 - gap, Fraction(2 * i + 2), a))
    tail = Fraction(1, 2 ** (p + 1))
    pieces.append((1, 2 * p + 2 - tail, 2 * p + 2 + tail, a))
    t = a4_completion(p)
    for k in range(l):
        pieces.append((0, t + k, t + k + 1, a + 1 + k))
    return inst, IntervalSchedule.from_pieces(pieces)


def random_intree(n: int, max_release: int, seed: int) -> Instance:
    if n < 1:
        raise ValueError("n must be positive")
    rng = random.Random(seed)
    # build on topological positions, then relabel
    parent_pos = [None if rng.randrange(n - k) == 0 else rng.randrange(k + 1, n) for k in range(n - 1)] + [None]
    perm = list(range(n))
    rng.shuffle(perm)
    parents = [None] * n
    for pos in range(n):
        if parent_pos[pos] is not None:
            parents[perm[pos]] = perm[parent_pos[pos]]
    releases = [rng.randint(0, max_release) for _ in range(n)]
    return Instance.from_lists(releases, parents, {"family": "random", "n": n, "max_release": max_release, "seed": seed})


def random_feasible_schedule(instance: Instance, K: int, seed: int, sticky: bool = False) -> IntervalSchedule:
    """Randomized list scheduling on slots of width ``2**-K``.

    Each slot runs up to two available jobs chosen by a fresh random priority;
    with ``sticky`` the priority is drawn once per job instead.
    """
    rng = random.Random(seed)
    unit = 2**K
    rem = [unit] * instance.n
    horizon = (max((j.release for j in instance.jobs), default=0) + instance.n) * unit
    prio = [rng.random() for _ in instance.ids]
    done_at: dict[int, int] = {}
    slots: list[tuple[int, ...]] = []
    t = 0
    while len(done_at) < instance.n:
        assert t < horizon, "horizon exhausted"
        avail = [
            j for j in instance.ids
            if rem[j] > 0 and instance.release(j) * unit <= t
            and all(c in done_at for c in instance.children[j])
        ]
        if not sticky:
            prio = [rng.random() for _ in instance.ids]
        chosen = tuple(sorted(avail, key=lambda j: prio[j])[:2])
        for j in chosen:
            rem[j] -= 1
        t += 1
        for j in chosen:
            if rem[j] == 0:
                done_at[j] = t
        slots.append(chosen)
    return slots_to_schedule(slots, K)


def slots_to_schedule(slots, K: int, offset: int = 0) -> IntervalSchedule:
    """Turn per-slot job tuples into machine pieces, keeping running jobs in place."""
    width = Fraction(1, 2**K)
    lanes: list[list[Piece]] = [[], []]
    prev: list[int | None] = [None, None]
    for s, chosen in enumerate(slots, start=offset):
        cur: list[int | None] = [None, None]
        rest = []
        for j in chosen:
            if j in prev:
                cur[prev.index(j)] = j
            else:
                rest.append(j)
        for j in rest:
            cur[cur.index(None)] = j
        for m in (0, 1):
            if cur[m] is not None:
                lanes[m].append(Piece(s * width, (s + 1) * width, cur[m]))
        prev = cur
    return IntervalSchedule((tuple(lanes[0]), tuple(lanes[1])))


def chain_fixture(b, length: int, x_share, chain_releases=None) -> tuple[Instance, IntervalSchedule]:
    """Schedule whose abnormality point (block 3) seeds an alternating chain.

    Jobs: x=0, y=1, c=2, then the chain d_1..d_length as 3..length+2.
    ``b`` (0 < b < 1/2, not a multiple of 1/16) is the amount of d_2 in the
    abnormal block; ``x_share`` in (0, 1) splits the free space at the end
    of the chain between x and y.  ``chain_releases`` optionally sets the
    releases of d_3, d_4, ... (each must not exceed its start).
    """
    b = Fraction(b)
    if not 0 < b < Fraction(1, 2):
        raise ValueError("b must lie strictly between 0 and 1/2")
    if length < 2:
        raise ValueError("the chain needs at least two jobs")
    half = Fraction(1, 2)
    x, y, c = 0, 1, 2
    d = [3 + k for k in range(length)]
    C = [Fraction(3, 2) + b, Fraction(5, 2) - b]
    while len(C) < length:
        C.append(C[-2] + 1)
    lane = {0: 1, 1: 0}  # chain index parity -> machine
    pieces = [
        (0, 0, half, x), (1, 0, half, y),
        (0, half, Fraction(3, 2), c),
        (1, half, 1, d[0]), (1, 1, 1 + b, d[1]), (1, 1 + b, Fraction(3, 2), d[0]),
    ]
    for k in range(length):
        lo = Fraction(3, 2) if k < 2 else C[k - 2]
        pieces.append((lane[k % 2], lo, C[k], d[k]))
    gap = C[-1] - C[-2]
    lo_x, hi_x = max(Fraction(0), gap - half), min(gap, half)
    ax = lo_x + (hi_x - lo_x) * Fraction(x_share)
    ay = gap - ax
    if not (0 < ax < gap):
        raise ValueError("x_share must leave both x and y some room")
    free = lane[(length - 2) % 2]
    pieces += [(free, C[-2], C[-2] + ax, x), (free, C[-2] + ax, C[-1], y)]
    pieces += [(0, C[-1], C[-1] + half - ax, x), (1, C[-1], C[-1] + half - ay, y)]
    releases = [0] * (length + 3)
    for k, r in enumerate(chain_releases or (), start=2):
        if k >= length:
            break
        if r > C[k - 2]:
            raise ValueError(f"release {r} of chain job {k + 1} exceeds its start")
        releases[d[k]] = r
    inst = Instance.from_lists(releases, [None] * len(releases), {"family": "chain", "length": length})
    return inst, IntervalSchedule.from_pieces(pieces)
