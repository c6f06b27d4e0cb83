"""Schedule transformations: cyclic shifts, job swaps, epsilon-pushing along
an alternating chain, and a small engine that chains them while the total
completion time keeps dropping.

Transformations either return a partition that ``partition_feasible``
accepts or raise ``TransformError``; nothing invalid is returned silently.
Costs are compared with ``partition_cost`` (completing-first realization).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .analysis import (
    INF,
    AlternatingChain,
    NormalScheduleError,
    abnormality_point,
    ccd_witnesses,
    find_alternating_chains,
    interlace_witnesses,
    is_alternating_chain,
)
from .dyadic import fmt_time
from .timeline import (
    BlockPartition,
    Instance,
    IntervalSchedule,
    ValidationReport,
    Violation,
    derive_partition,
    mcnaughton_block,
    partition_cost,
    partition_feasible,
    realize,
    validate_schedule,
)


class TransformError(ValueError):
    """A transformation could not be applied; ``report`` says why."""

    def __init__(self, message: str, report: ValidationReport | None = None):
        super().__init__(message)
        self.report = report if report is not None else ValidationReport((Violation("precondition", message),))


def _with_xi(partition: BlockPartition, xi) -> BlockPartition:
    return BlockPartition(partition.events, tuple(xi))


def _checked(instance, partition: BlockPartition, what: str) -> BlockPartition:
    rep = partition_feasible(instance, partition)
    if not rep:
        raise TransformError(f"{what} produced an infeasible partition: {rep}", rep)
    return partition


# ---------------------------------------------------------------------------
# cyclic shift


@dataclass(frozen=True)
class CycleSpec:
    """Cycle ``i_1 -a_1-> i_2 -a_2-> ... -a_j-> i_1`` moving ``epsilon``."""

    blocks: tuple[int, ...]
    jobs: tuple[int, ...]
    epsilon: Fraction

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "jobs", tuple(self.jobs))
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))

    def to_json(self) -> dict:
        return {"blocks": list(self.blocks), "jobs": list(self.jobs), "epsilon": fmt_time(self.epsilon)}


def cycle_violations(partition: BlockPartition, spec: CycleSpec) -> list[Violation]:
    out = []
    k = len(spec.blocks)
    eps = spec.epsilon
    if k == 0 or k != len(spec.jobs):
        return [Violation("cycle", "blocks and jobs must be non-empty and of equal length")]
    if len(set(spec.jobs)) != k:
        out.append(Violation("cycle", "cycle jobs must be distinct"))
    if eps <= 0:
        out.append(Violation("cycle", "epsilon must be positive"))
    for b in spec.blocks:
        if not 1 <= b <= partition.num_blocks:
            return out + [Violation("cycle", f"block {b} out of range", b)]
    for idx, (b, a) in enumerate(zip(spec.blocks, spec.jobs)):
        nxt = spec.blocks[(idx + 1) % k]
        if partition.amount(b, a) < eps:
            out.append(Violation("cycle", f"job {a} has less than epsilon in block {b}", b, a))
        if partition.amount(nxt, a) > partition.length(nxt) - eps:
            out.append(Violation("cycle", f"job {a} has no room for epsilon more in block {nxt}", nxt, a))
    return out


def cyclic_shift(instance: Instance, partition: BlockPartition, spec: CycleSpec) -> BlockPartition:
    """Move ``epsilon`` of ``a_k`` from block ``i_k`` to block ``i_{k+1}``.

    The raw move may break release dates or precedence; such results are
    rejected with the violated conditions, not repaired.
    """
    bad = cycle_violations(partition, spec)
    if bad:
        raise TransformError("cycle specification violated", ValidationReport(tuple(bad)))
    xi = [dict(b) for b in partition.xi]
    k = len(spec.blocks)
    for idx, (b, a) in enumerate(zip(spec.blocks, spec.jobs)):
        nxt = spec.blocks[(idx + 1) % k]
        xi[b - 1][a] = xi[b - 1].get(a, Fraction(0)) - spec.epsilon
        xi[nxt - 1][a] = xi[nxt - 1].get(a, Fraction(0)) + spec.epsilon
    return _checked(instance, _with_xi(partition, xi), "cyclic shift")


# ---------------------------------------------------------------------------
# swapping


@dataclass(frozen=True)
class SwapPlan:
    a: int
    a_prime: int
    last_block: int
    moved: dict  # block -> epsilon(block)

    def to_json(self) -> dict:
        return {
            "a": self.a, "a_prime": self.a_prime, "last_block": self.last_block,
            "moved": {str(b): fmt_time(v) for b, v in sorted(self.moved.items())},
        }


def swap_violations(instance: Instance, partition: BlockPartition, a: int, a_prime: int) -> list[Violation]:
    P = partition
    out = []
    if a == a_prime:
        return [Violation("precondition", "a and a' must differ", job=a)]
    for j in (a, a_prime):
        if j not in P.jobs:
            return [Violation("precondition", f"job {j} is not scheduled", job=j)]
    k = P.tau(a)
    if P.completion_time(a_prime) != P.start_of(k):
        out.append(Violation("completion", f"C(a') must equal e_{k}", k, a_prime))
    if P.start_time(a) > P.start_time(a_prime):
        out.append(Violation("start", "a must not start after a'", job=a))
    dep = sorted(b for b in P.active(k) if not instance.independent(a_prime, b))
    if dep:
        out.append(Violation("independence", f"a' depends on jobs {dep} of block {k}", k, a_prime))
    return out


def plan_swap(instance: Instance, partition: BlockPartition, a: int, a_prime: int) -> SwapPlan:
    bad = swap_violations(instance, partition, a, a_prime)
    if bad:
        raise TransformError("swap preconditions unmet", ValidationReport(tuple(bad)))
    P = partition
    k = P.tau(a)
    target = P.amount(k, a)
    caps = {j: min(P.length(j) - P.amount(j, a), P.amount(j, a_prime)) for j in range(1, k)}
    # smallest last block that can absorb the target, earlier blocks filled first
    acc = Fraction(0)
    for m in range(1, k):
        if acc + caps[m] >= target:
            moved = {j: caps[j] for j in range(1, m) if caps[j] > 0}
            rest = target - acc
            if rest > 0:
                moved[m] = rest
            return SwapPlan(a, a_prime, max(moved), moved)
        acc += caps[m]
    raise TransformError("no room to swap: a' has too little work where a can take more")


def swap_jobs(instance: Instance, partition: BlockPartition, a: int, a_prime: int) -> BlockPartition:
    """Give ``a``'s final-block work to ``a'`` and the same amount of ``a'``'s
    earlier work to ``a``."""
    plan = plan_swap(instance, partition, a, a_prime)
    P = partition
    k = P.tau(a)
    xi = [dict(b) for b in P.xi]
    for j, eps in plan.moved.items():
        xi[j - 1][a_prime] -= eps
        xi[j - 1][a] = xi[j - 1].get(a, Fraction(0)) + eps
    amount = xi[k - 1].pop(a)
    xi[k - 1][a_prime] = xi[k - 1].get(a_prime, Fraction(0)) + amount
    return _checked(instance, _with_xi(P, xi), "swap")


def swap_is_strict(partition: BlockPartition, a: int, a_prime: int) -> bool:
    """The condition under which a swap must strictly lower the cost."""
    k = partition.tau(a)
    return (
        partition.start_time(a) < partition.start_time(a_prime)
        and k >= 2
        and partition.amount(k - 1, a) < partition.length(k - 1)
    )


# ---------------------------------------------------------------------------
# epsilon-pushing


@dataclass(frozen=True)
class PushBounds:
    alpha: Fraction
    beta: Fraction
    gamma: Fraction | float
    xy_cap: Fraction

    def admissible(self):
        return min(self.alpha, self.beta, self.gamma, self.xy_cap)

    def binding(self) -> str:
        eps = self.admissible()
        for name in ("alpha", "beta", "gamma", "xy_cap"):
            if getattr(self, name) == eps:
                return name
        raise AssertionError("unreachable")

    def to_json(self) -> dict:
        return {k: (None if v == INF else fmt_time(v)) for k, v in vars(self).items()}


def _chain_jobs(chain) -> tuple[int, ...]:
    return tuple(chain.jobs) if isinstance(chain, AlternatingChain) else tuple(chain)


def push_bounds(instance: Instance, partition: BlockPartition, chain, x: int, y: int) -> PushBounds:
    P = partition
    d = _chain_jobs(chain)
    l = len(d)
    i = abnormality_point(P)
    if i == INF:
        raise NormalScheduleError("normal schedule: nothing to push")
    u = u_of(l)
    U = [j for j in range(1, l + 1) if j % 2 == l % 2]
    alpha = P.amount(i, d[u - 1])
    beta = min(P.length(P.tau(d[j - 1])) for j in U) / 2
    gammas = [P.start_of(P.tau(d[j - 2])) - instance.release(d[j - 1]) for j in U if j >= 3]
    gamma = min(gammas) if gammas else INF
    last = P.tau(d[-1])
    xy = min(P.amount(last, x), P.amount(last, y))
    return PushBounds(alpha, beta, gamma, xy)


def epsilon_push(
    instance: Instance,
    partition: BlockPartition,
    chain,
    x: int,
    y: int,
    cap=None,
    schedule: IntervalSchedule | None = None,
) -> tuple[BlockPartition, Fraction, str]:
    """Trade epsilon between the two abnormal jobs and ripple it along the chain.

    Jobs of the chain whose index has the parity of its length finish
    epsilon earlier, the others epsilon later; ``x`` and ``y`` are repacked
    into the space left at the end of the chain.  Returns the partition
    derived from the new schedule, the epsilon used and the name of the
    binding bound (``"cap"`` when the caller's cap is smallest).
    """
    P = partition
    S = realize(instance, P) if schedule is None else schedule
    d = _chain_jobs(chain)
    l = len(d)
    if l < 2:
        raise TransformError("pushing needs a chain of at least two jobs")
    if not is_alternating_chain(instance, P, S, d):
        raise TransformError(f"{list(d)} is not an alternating chain")
    last = P.tau(d[-1])
    if P.active(last) != {x, y, d[-1]} or len({x, y, d[-1]}) != 3:
        raise TransformError(f"block {last} must hold exactly x, y and the last chain job")
    bounds = push_bounds(instance, P, d, x, y)
    eps, binding = bounds.admissible(), bounds.binding()
    if cap is not None and Fraction(cap) < eps:
        eps, binding = Fraction(cap), "cap"
    if eps <= 0:
        raise TransformError(f"degenerate bound {binding}: epsilon would be {fmt_time(eps)}")

    i = abnormality_point(P)
    e_i, anchor = P.start_of(i), P.end_of(i)
    C = [S.completion(j) for j in d]
    hi = C[-1]
    chain_set = set(d)
    for job in S.jobs():
        if job in chain_set:
            continue
        inside = S.amount_in(job, anchor, hi)
        if job in (x, y):
            inside -= S.amount_in(job, C[-2], hi)
        if inside:
            raise TransformError(f"job {job} runs between e_{i + 1} and the end of the chain")
    parity = l % 2
    lanes = {}
    for j in range(1, l + 1):
        lo = anchor if j <= 2 else C[j - 3]
        if S.amount_in(d[j - 1], lo, C[j - 1]) != C[j - 1] - lo or S.amount_in(d[j - 1], anchor, hi) != C[j - 1] - lo:
            raise TransformError(f"chain job {d[j - 1]} is not laid out along its lane")
        shift = -eps if j % 2 == parity else eps
        lanes[j] = (anchor if j <= 2 else lo + shift, C[j - 1] + shift)
    ax = S.amount_in(x, C[-2], hi)
    ay = S.amount_in(y, C[-2], hi)

    pieces = []
    for m, mach in enumerate(S.restricted(None, e_i).machines):
        pieces += [(m, p.start, p.end, p.job) for p in mach]
    for m, mach in enumerate(S.restricted(hi, None).machines):
        pieces += [(m, p.start, p.end, p.job) for p in mach]
    block = dict(P.xi[i - 1])
    u = u_of(l)
    block[d[2 - u]] = block.get(d[2 - u], Fraction(0)) + eps
    block[d[u - 1]] -= eps
    for m, mach in enumerate(mcnaughton_block(block, e_i, anchor)):
        pieces += [(m, p.start, p.end, p.job) for p in mach]
    push_lane = 0
    for j, (lo, end) in lanes.items():
        lane = push_lane if j % 2 == parity else 1 - push_lane
        pieces.append((lane, lo, end, d[j - 1]))
    pieces.append((push_lane, hi - eps, hi, y))
    t0 = C[-2] + eps
    pieces.append((1 - push_lane, t0, t0 + ay - eps, y))
    pieces.append((1 - push_lane, t0 + ay - eps, t0 + ay - eps + ax, x))
    new = IntervalSchedule.from_pieces(pieces)
    rep = validate_schedule(instance, new)
    if not rep:
        raise TransformError(f"pushing produced an infeasible schedule: {rep}", rep)
    return derive_partition(instance, new), eps, binding


def u_of(l: int) -> int:
    """Index of the abnormal job that loses work in block i."""
    return 2 if l % 2 else 1


# ---------------------------------------------------------------------------
# improvement engine


@dataclass
class Move:
    kind: str
    detail: dict
    cost_before: Fraction
    cost_after: Fraction
    round: int = 0
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "round": self.round,
            "kind": self.kind,
            "detail": self.detail,
            "cost_before": fmt_time(self.cost_before),
            "cost_after": fmt_time(self.cost_after),
        }


def _swap_candidates(instance, P):
    for c, c2, dd, _ in ccd_witnesses(instance, P):
        for cc in (c, c2):
            try:
                yield "swap", {"a": dd, "a_prime": cc}, swap_jobs(instance, P, dd, cc)
            except TransformError:
                continue


def _shift_candidates(instance, P):
    for a, b, t in interlace_witnesses(instance, P):
        ta = P.tau(a)
        eps = min(P.amount(t, b), P.length(ta) - P.amount(ta, b), P.amount(ta, a), P.length(t) - P.amount(t, a))
        spec = CycleSpec((t, ta), (b, a), eps)
        try:
            yield "cyclic_shift", spec.to_json(), cyclic_shift(instance, P, spec)
        except TransformError:
            continue


def _push_candidates(instance, P):
    if abnormality_point(P) == INF:
        return
    try:
        chains = find_alternating_chains(instance, P)
    except NormalScheduleError:
        return
    for ch in chains:
        if len(ch.jobs) < 2:
            continue
        rest = sorted(P.active(P.tau(ch.jobs[-1])) - {ch.jobs[-1]})
        if len(rest) != 2:
            continue
        try:
            out, eps, binding = epsilon_push(instance, P, ch, rest[0], rest[1])
        except TransformError:
            continue
        yield "push", {"chain": list(ch.jobs), "x": rest[0], "y": rest[1],
                       "epsilon": fmt_time(eps), "binding": binding}, out


def improve(instance: Instance, partition: BlockPartition, max_rounds: int = 100):
    """Apply improving moves (ccd swap, interlace shift, push) until none helps.

    A swap or shift is kept only if the cost strictly drops; a push is also
    kept when the cost is unchanged but the abnormality point moves later.
    Returns the final partition and the list of applied moves.
    """
    P = _checked(instance, partition, "input")
    trace: list[Move] = []
    for rnd in range(1, max_rounds + 1):
        cost = partition_cost(instance, P)
        point = abnormality_point(P)
        applied = None
        for gen in (_swap_candidates, _shift_candidates, _push_candidates):
            for kind, detail, cand in gen(instance, P):
                new_cost = partition_cost(instance, cand)
                later = abnormality_point(cand) > point
                if new_cost < cost or (kind == "push" and new_cost == cost and later):
                    applied = Move(kind, detail, cost, new_cost, rnd)
                    P = cand
                    break
            if applied:
                break
        if not applied:
            break
        trace.append(applied)
    return P, trace
