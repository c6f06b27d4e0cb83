"""Two independent exact optimizers.

``grid_dp_solve`` is a best-first search over slot schedules on the grid of
width ``2**-K``; it is exact over that grid.  ``solve_exact`` enumerates
event structures (which job starts and completes at which event) and solves
one LP per structure, with an incumbent from a coarse grid run and a prefix
lower bound to cut the enumeration.
"""

from __future__ import annotations

import heapq
import itertools
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .instances import slots_to_schedule
from .ratlp import LinearProgram, solve_lp
from .timeline import (
    BlockPartition,
    Instance,
    IntervalSchedule,
    derive_partition,
    realize,
    total_completion_time,
)

FLOAT_TOL = 1e-7


class SolverError(RuntimeError):
    pass


class HorizonError(SolverError):
    """The grid horizon is too short for every job to finish."""


@dataclass
class SolveResult:
    optimal_value: Fraction
    partition: BlockPartition
    schedule: IntervalSchedule
    stats: dict = field(default_factory=dict)
    certified: bool = True
    method: str = ""

    def to_json(self) -> dict:
        from .dyadic import fmt_time
        from .timeline import schedule_metrics

        return {
            "method": self.method,
            "certified": self.certified,
            "value": fmt_time(self.optimal_value),
            "metrics": schedule_metrics(self.schedule).to_json(),
            "schedule": self.schedule.to_json(),
            "partition": self.partition.to_json(),
            "stats": dict(sorted(self.stats.items())),
        }


# ---------------------------------------------------------------------------
# grid oracle


def _critical_tails(instance: Instance) -> list[int]:
    """Number of jobs on the path from each job to its root, itself excluded."""
    tail = [0] * instance.n
    for j in reversed(instance.topological_order):
        par = instance.parent(j)
        tail[j] = 0 if par is None else tail[par] + 1
    return tail


def grid_dp_solve(instance: Instance, K: int, horizon=None) -> SolveResult:
    """Minimum total completion time over slot schedules of width ``2**-K``.

    Each slot runs at most two distinct available jobs for its whole width.
    Best-first search over ``(slot, remaining work)`` states; the heuristic
    is the larger of a precedence-chain bound and a two-machine load bound,
    both admissible.  Machines never idle while a job is available.
    """
    if K < 0:
        raise ValueError("K must be nonnegative")
    n = instance.n
    unit = 1 << K
    rel = [instance.release(j) * unit for j in instance.ids]
    if horizon is None:
        H = (max(instance.release(j) for j in instance.ids) + n) * unit
    else:
        H = int(Fraction(horizon) * unit)
    children = instance.children
    order = instance.topological_order

    def available(t, rem):
        return [
            j for j in range(n)
            if rem[j] and rel[j] <= t and all(rem[c] == 0 for c in children[j])
        ]

    def heuristic(t, rem):
        ef = [0] * n
        chain = 0
        for j in order:
            if rem[j] == 0:
                continue
            ready = max(t, rel[j])
            for c in children[j]:
                if rem[c]:
                    ready = max(ready, ef[c])
            ef[j] = ready + rem[j]
            chain += ef[j] - t
        rs = sorted(r for r in rem if r)
        load, acc = 0, 0
        for r in rs:
            acc += r
            load += max((acc + 1) // 2, r)
        return max(chain, load)

    start = (0, tuple([unit] * n))
    best_g = {start: 0}
    came: dict = {start: None}
    counter = itertools.count()
    heap = [(heuristic(0, start[1]), 0, next(counter), start)]
    expanded = 0
    goal = None
    while heap:
        f, g, _, state = heapq.heappop(heap)
        if best_g.get(state, None) != g:
            continue
        t, rem = state
        unfinished = sum(1 for r in rem if r)
        if unfinished == 0:
            goal = state
            break
        expanded += 1
        if t >= H:
            continue
        av = available(t, rem)
        moves = []
        if not av:
            nxt = min(rel[j] for j in range(n) if rem[j] and rel[j] > t) if any(
                rem[j] and rel[j] > t for j in range(n)) else None
            if nxt is None:
                raise SolverError("no job can run: inconsistent instance")
            moves.append(((), nxt - t))
        elif len(av) <= 2:
            future = [rel[j] for j in range(n) if rem[j] and rel[j] > t]
            dt = min(rem[j] for j in av)
            if future:
                dt = min(dt, min(future) - t)
            moves.append((tuple(av), dt))
        else:
            for pair in itertools.combinations(av, 2):
                moves.append((pair, 1))
        for chosen, dt in moves:
            if t + dt > H:
                continue
            nrem = list(rem)
            for j in chosen:
                nrem[j] -= dt
            ns = (t + dt, tuple(nrem))
            ng = g + unfinished * dt
            if ng < best_g.get(ns, ng + 1):
                best_g[ns] = ng
                came[ns] = (state, chosen, dt)
                heapq.heappush(heap, (ng + heuristic(ns[0], ns[1]), ng, next(counter), ns))
    if goal is None:
        raise HorizonError(f"horizon {H}/{unit} is too small to finish every job")
    slots = []
    s = goal
    while came[s] is not None:
        prev, chosen, dt = came[s]
        slots.extend([chosen] * dt)
        s = prev
    slots.reverse()
    sched = slots_to_schedule(slots, K)
    value = Fraction(best_g[goal], unit)
    assert total_completion_time(sched) == value
    part = derive_partition(instance, sched)
    return SolveResult(value, part, sched, {"dp_states": expanded, "grid_k": K}, True, f"grid(K={K})")


# ---------------------------------------------------------------------------
# event structures


@dataclass(frozen=True)
class EventStructure:
    """``start_block[a]``..``completion_block[a]`` is the span of job ``a``."""

    block_count: int
    start_block: tuple[int, ...]
    completion_block: tuple[int, ...]

    def active(self, block: int) -> list[int]:
        return [a for a, (s, t) in enumerate(zip(self.start_block, self.completion_block)) if s <= block <= t]

    def to_json(self) -> dict:
        return {"blocks": self.block_count, "start": list(self.start_block), "completion": list(self.completion_block)}


def default_max_blocks(instance: Instance) -> int:
    n = instance.n
    return 2 * n - 1 if any(instance.release(j) == 0 for j in instance.ids) else 2 * n


@dataclass
class _Counters:
    nodes: int = 0
    pruned_by_rule: int = 0
    pruned_by_bound: int = 0


def _subsets(items, max_size):
    """Largest subsets first so compact structures (and good bounds) come early."""
    for k in range(min(len(items), max_size), -1, -1):
        yield from itertools.combinations(items, k)


def _occupancy_cut(active, comp, start, k, spanning) -> bool:
    """Block ``k-1`` is over-occupied given the jobs completing at event ``k``.

    Three jobs in a block need one of them to complete at its end.  Two
    spanning completions fill both machines, so a job that starts in the
    block without completing there would have no room to start.
    """
    if len(active) == 3 and not comp:
        return True
    if spanning and len(comp) == 2:
        return any(start[a] == k - 1 and a not in comp for a in active)
    return False


def _enumerate(instance, max_blocks, prune_active, spanning, counters, bound=None):
    """Depth-first generator of structures; ``bound(prefix) -> bool`` may cut."""
    n = instance.n
    preds = instance.children
    start = [0] * n
    done = [0] * n  # completion block, 0 = not yet

    def rec(k, active, remaining):
        counters.nodes += 1
        # decide completions and starts at event k
        comp_choices = list(_subsets(sorted(active), 2 if spanning else len(active))) if k > 1 else [()]
        for comp in comp_choices:
            if prune_active and k > 1 and _occupancy_cut(active, comp, start, k, spanning):
                counters.pruned_by_rule += 1
                continue
            for a in comp:
                done[a] = k - 1
            completed_now = set(comp)
            avail = sorted(
                j for j in remaining
                if all(done[p] and done[p] <= k - 1 for p in preds[j])
            )
            left = remaining
            for starts in _subsets(avail, len(avail)):
                if k > 1 and not comp and not starts:
                    continue
                if prune_active and k == 1 and not starts and any(instance.release(j) == 0 for j in avail):
                    counters.pruned_by_rule += 1
                    continue
                new_active = (active - completed_now) | set(starts)
                rest = left - set(starts)
                if not new_active and not rest:
                    if starts:
                        continue
                    yield EventStructure(k - 1, tuple(start), tuple(done))
                    continue
                if k > max_blocks:
                    continue
                if prune_active and len(new_active) > 3:
                    counters.pruned_by_rule += 1
                    continue
                if not new_active and not any(True for _ in rest):
                    continue
                for a in starts:
                    start[a] = k
                if bound is not None and comp and bound(k, tuple(start), tuple(done), new_active, rest):
                    counters.pruned_by_bound += 1
                else:
                    yield from rec(k + 1, frozenset(new_active), rest)
                for a in starts:
                    start[a] = 0
            for a in comp:
                done[a] = 0

    yield from rec(1, frozenset(), frozenset(instance.ids))


def enumerate_structures(instance: Instance, max_blocks: int | None = None, prune_active: bool = True,
                         spanning: bool = True, stats: dict | None = None):
    """Every event structure with at most ``max_blocks`` blocks, in canonical
    order (events left to right, job subsets by size then id)."""
    counters = _Counters()
    mb = default_max_blocks(instance) if max_blocks is None else max_blocks
    count = 0
    for st in _enumerate(instance, mb, prune_active, spanning, counters):
        count += 1
        yield st
    if stats is not None:
        stats.update(structures_explored=count, pruned_by_rule=counters.pruned_by_rule, nodes=counters.nodes)


# ---------------------------------------------------------------------------
# structure LPs


def _structure_rows(instance: Instance, st: EventStructure, spanning: bool = True):
    """Variables: e_2..e_q (indices 0..q-2), then xi for (block, job) pairs."""
    q = st.block_count + 1
    evar = lambda k: None if k == 1 else k - 2  # noqa: E731
    xvar = {}
    for b in range(1, q):
        for a in st.active(b):
            xvar[(b, a)] = (q - 1) + len(xvar)
    nv = (q - 1) + len(xvar)
    rows = []

    def diff(k):  # e_{k+1} - e_k
        d = {evar(k + 1): 1}
        if evar(k) is not None:
            d[evar(k)] = -1
        return d

    for k in range(1, q):
        rows.append((diff(k), ">=", 0))
    for (b, a), v in xvar.items():
        d = {kk: -c for kk, c in diff(b).items()}
        d[v] = 1
        rows.append((d, "<=", 0))
    for b in range(1, q):
        d = {kk: -2 * c for kk, c in diff(b).items()}
        for a in st.active(b):
            d[xvar[(b, a)]] = 1
        rows.append((d, "<=", 0))
    for a in instance.ids:
        rows.append(({xvar[(b, a)]: 1 for b in range(st.start_block[a], st.completion_block[a] + 1)}, "=", 1))
        r = instance.release(a)
        s = st.start_block[a]
        if r > 0:
            if s == 1:
                rows.append(({}, ">=", r))  # e_1 = 0 cannot meet a positive release
            else:
                rows.append(({evar(s): 1}, ">=", r))
        if spanning:
            t = st.completion_block[a]
            d = {kk: -c for kk, c in diff(t).items()}
            d[xvar[(t, a)]] = d.get(xvar[(t, a)], 0) + 1
            rows.append((d, "=", 0))
    obj = [0] * nv
    for a in instance.ids:
        obj[evar(st.completion_block[a] + 1)] += 1
    return nv, obj, rows, xvar


def structure_to_lp(instance: Instance, structure: EventStructure, spanning: bool = True) -> LinearProgram:
    nv, obj, rows, _ = _structure_rows(instance, structure, spanning)
    return LinearProgram(obj, rows)


def _float_lp(nv, obj, rows):
    ub, bub, eq, beq = [], [], [], []
    for d, rel, rhs in rows:
        vec = np.zeros(nv)
        for k, v in d.items():
            vec[k] += float(v)
        if rel == "<=":
            ub.append(vec), bub.append(float(rhs))
        elif rel == ">=":
            ub.append(-vec), bub.append(-float(rhs))
        else:
            eq.append(vec), beq.append(float(rhs))
    res = linprog(
        np.array(obj, dtype=float),
        A_ub=np.array(ub) if ub else None, b_ub=np.array(bub) if ub else None,
        A_eq=np.array(eq) if eq else None, b_eq=np.array(beq) if eq else None,
        bounds=(0, None), method="highs",
    )
    return res.fun if res.status == 0 else None


def _prefix_rows(instance, k, start, done, active, rest, spanning):
    """LP lower bound on any completion of a structure prefix up to event ``k``."""
    q = k
    sb = [s if s else None for s in start]
    evar = lambda kk: None if kk == 1 else kk - 2  # noqa: E731
    xvar = {}
    for b in range(1, q):
        for a in instance.ids:
            s = sb[a]
            if s is None or s > b:
                continue
            if done[a] and done[a] < b:
                continue
            xvar[(b, a)] = (q - 1) + len(xvar)
    unstarted = sorted(j for j in instance.ids if sb[j] is None)
    cvar = {a: (q - 1) + len(xvar) + i for i, a in enumerate(unstarted)}
    nv = (q - 1) + len(xvar) + len(cvar)
    rows = []

    def diff(kk):
        d = {evar(kk + 1): 1}
        if evar(kk) is not None:
            d[evar(kk)] = -1
        return d

    for kk in range(1, q):
        rows.append((diff(kk), ">=", 0))
    for (b, a), v in xvar.items():
        d = {x: -c for x, c in diff(b).items()}
        d[v] = 1
        rows.append((d, "<=", 0))
    for b in range(1, q):
        d = {x: -2 * c for x, c in diff(b).items()}
        for (bb, a), v in xvar.items():
            if bb == b:
                d[v] = 1
        rows.append((d, "<=", 0))
    obj = [Fraction(0)] * nv
    ek = evar(k)
    for a in instance.ids:
        s = sb[a]
        r = instance.release(a)
        if s is None:
            cv = cvar[a]
            d = {cv: 1}
            if ek is not None:
                d[ek] = -1
            rows.append((d, ">=", 1))
            rows.append(({cv: 1}, ">=", r + 1))
            for c in instance.children[a]:
                if sb[c] is None:
                    rows.append(({cv: 1, cvar[c]: -1}, ">=", 1))
                elif not done[c]:
                    # C(a) >= C(c) + 1 >= e_k + (1 - work of c so far) + 1
                    d = {cv: 1}
                    if ek is not None:
                        d[ek] = -1
                    for (b, j), v in xvar.items():
                        if j == c:
                            d[v] = 1
                    rows.append((d, ">=", 2))
            obj[cv] += 1
            continue
        if r > 0:
            rows.append(({evar(s): 1} if s > 1 else {}, ">=", r))
        last = done[a] if done[a] else k - 1
        own = {xvar[(b, a)]: 1 for b in range(s, last + 1) if (b, a) in xvar}
        if done[a]:
            rows.append((own, "=", 1))
            obj[evar(done[a] + 1)] += 1
            if spanning:
                d = {x: -c for x, c in diff(done[a]).items()}
                d[xvar[(done[a], a)]] = d.get(xvar[(done[a], a)], 0) + 1
                rows.append((d, "=", 0))
        else:
            rows.append((own, "<=", 1))
            # C(a) >= e_k + 1 - (work so far)
            if ek is not None:
                obj[ek] += 1
            for v in own:
                obj[v] -= 1
    if unstarted:
        # u unit jobs on two machines: the i-th of them ends no earlier than e_k + i/2
        u = len(unstarted)
        d = {cvar[a]: 1 for a in unstarted}
        if ek is not None:
            d[ek] = -u
        rows.append((d, ">=", Fraction(u * (u + 1), 4)))
    const = sum(1 for a in instance.ids if sb[a] is not None and not done[a])
    return nv, obj, rows, const


@dataclass
class SolveOptions:
    max_blocks: int | None = None
    prune_active: bool = True
    spanning: bool = True
    prefix_bound: bool = True
    incumbent_k: int = 1
    node_budget: int = 2_000_000
    time_limit: float | None = None
    threads: int | None = None


def _lp_partition(instance: Instance, st: EventStructure, sol, xvar) -> BlockPartition:
    q = st.block_count + 1
    ev = [Fraction(0)] + [sol.assignment[k] for k in range(q - 1)]
    events, xi = [Fraction(0)], []
    for b in range(1, q):
        if ev[b] == ev[b - 1]:
            continue
        blk = {a: sol.assignment[xvar[(b, a)]] for a in st.active(b) if sol.assignment[xvar[(b, a)]]}
        events.append(ev[b])
        xi.append(blk)
    return BlockPartition(tuple(events), tuple(xi))


def solve_exact(instance: Instance, options: SolveOptions | None = None) -> SolveResult:
    """Optimal schedule by structure enumeration with exact per-structure LPs.

    The search is complete for the default block budget.  When the node
    budget or time limit runs out, the best schedule found so far is
    returned with ``certified=False``.
    """
    opt = options or SolveOptions()
    threads = opt.threads or int(os.environ.get("NORMSCHED_THREADS", "1") or 1)
    t0 = time.monotonic()
    inc = grid_dp_solve(instance, opt.incumbent_k)
    best_val = inc.optimal_value
    best = None  # (value, partition)
    stats = {"lps_solved": 0, "exact_lps": 0, "incumbent": str(inc.optimal_value), "dp_states": inc.stats["dp_states"]}
    counters = _Counters()
    mb = default_max_blocks(instance) if opt.max_blocks is None else opt.max_blocks
    out_of_budget = False

    class _Stop(Exception):
        pass

    def bound(k, start, done, active, rest):
        nonlocal out_of_budget
        if counters.nodes > opt.node_budget or (opt.time_limit and time.monotonic() - t0 > opt.time_limit):
            out_of_budget = True
            raise _Stop
        if not opt.prefix_bound or k < 3:
            return False
        nv, obj, rows, const = _prefix_rows(instance, k, start, done, active, rest, opt.spanning)
        stats["lps_solved"] += 1
        lb = _float_lp(nv, obj, rows)
        if lb is None:
            return True
        # before any structure is solved only strictly worse prefixes go; after
        # that, ties cannot improve on the structure already in hand
        if best is None:
            return lb + const > float(best_val) + FLOAT_TOL
        return lb + const > float(best_val) - FLOAT_TOL

    def evaluate(st):
        nv, obj, rows, xvar = _structure_rows(instance, st, opt.spanning)
        return st, nv, obj, rows, xvar, _float_lp(nv, obj, rows)

    def consider(item):
        nonlocal best_val, best
        st, nv, obj, rows, xvar, fv = item
        stats["lps_solved"] += 1
        if fv is None:
            return
        limit = float(best_val) + FLOAT_TOL if best is None else float(best_val) - FLOAT_TOL
        if fv > limit:
            return
        sol = solve_lp(LinearProgram(obj, rows))
        stats["exact_lps"] += 1
        if not sol.optimal:
            return
        if best is None or sol.value < best_val:
            if best is not None or sol.value <= best_val:
                best_val = sol.value
                best = (sol.value, _lp_partition(instance, st, sol, xvar), st)

    gen = _enumerate(instance, mb, opt.prune_active, opt.spanning, counters, bound)
    structures = 0
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        while True:
            batch = list(itertools.islice(gen, 64 if pool else 1))
            if not batch:
                break
            structures += len(batch)
            results = list(pool.map(evaluate, batch)) if pool else [evaluate(b) for b in batch]
            for item in results:
                consider(item)
    except _Stop:
        pass
    finally:
        if pool:
            pool.shutdown()
    stats.update(
        structures_explored=structures,
        pruned_by_rule=counters.pruned_by_rule,
        pruned_by_bound=counters.pruned_by_bound,
        nodes=counters.nodes,
        seconds=round(time.monotonic() - t0, 3),
    )
    if best is None:
        if out_of_budget:
            return SolveResult(inc.optimal_value, inc.partition, inc.schedule, stats, False, "exact")
        raise SolverError("no structure admits a feasible schedule")
    value, lp_part, st = best
    sched = realize(instance, lp_part)
    real = total_completion_time(sched)
    if real > value:
        raise SolverError("realized schedule is worse than its LP value")
    stats["structure"] = st.to_json()
    part = derive_partition(instance, sched)
    return SolveResult(real, part, sched, stats, not out_of_budget, "exact")
