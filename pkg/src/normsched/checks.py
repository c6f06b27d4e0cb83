"""The acceptance suite as named checks, shared by ``normsched bench`` and the tests."""

from __future__ import annotations

import os
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .analysis import INF, abnormality_point, count_preemptions, lint
from .instances import (
    a4_completion,
    chain_fixture,
    job_id,
    make_jp,
    make_pp_schedule,
    make_theorem_schedule,
    random_feasible_schedule,
    random_intree,
)
from .solver import SolveOptions, grid_dp_solve, solve_exact
from .timeline import derive_partition, partition_cost, total_completion_time, validate_schedule
from .transform import CycleSpec, TransformError, cyclic_shift, epsilon_push, swap_is_strict, swap_jobs, swap_violations

LIMITS = {1: 1, 2: 1, 3: 5, 4: 120, 5: 60, 6: 5, 7: 600, 8: 60, 9: None, 10: 30}
TITLES = {
    1: "family size",
    2: "constructed schedule formula",
    3: "oracle agreement on J_0",
    4: "J_1 optimum",
    5: "tail work of a_4^p",
    6: "resolution stratification",
    7: "grid stabilization",
    8: "transformation contracts",
    9: "lint on optima",
    10: "preemption construction",
}


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    @property
    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:>2} {self.name}: {self.detail} ({self.seconds:.2f}s)"

    def to_json(self) -> dict:
        return {
            "criterion": self.number, "name": self.name, "passed": self.passed,
            "detail": self.detail, "seconds": round(self.seconds, 3),
            "limit_seconds": LIMITS[self.number], **({"data": self.data} if self.data else {}),
        }


def _multiple_of_pow2(t: Fraction, k: int) -> bool:
    return (t * 2**k).denominator == 1


class Suite:
    """Runs criteria 1-10; solver outputs are kept for the lint check.

    ``j1_budget`` caps the exact solve of J_1 in seconds (the check falls
    back to grid agreement when it runs out); ``scale`` shrinks the random
    sample sizes for quick runs.
    """

    def __init__(self, j1_budget: float | None = None, scale: float = 1.0, seed: int = 0):
        env = os.environ.get("NORMSCHED_J1_BUDGET")
        self.j1_budget = float(env) if j1_budget is None and env else (j1_budget if j1_budget is not None else 60.0)
        self.scale = scale
        self.seed = seed
        self.optima: list[tuple[str, object, object]] = []  # (label, instance, SolveResult)
        self.results: dict[int, CheckResult] = {}

    def _n(self, count: int) -> int:
        return max(1, int(count * self.scale))

    # -- criteria -------------------------------------------------------

    def c1(self):
        sizes = {p: make_jp(p).n for p in range(5)}
        ok = all(sizes[p] == 4 * (p + 1) for p in sizes)
        return ok, "sizes " + ", ".join(f"p={p}:{n}" for p, n in sizes.items()), {"sizes": sizes}

    def c2(self):
        rows, ok = [], True
        for p in range(7):
            inst, sched = make_jp(p), make_pp_schedule(p)
            feasible = validate_schedule(inst, sched).ok
            normal = abnormality_point(derive_partition(inst, sched)) == INF
            c = sched.completion(job_id(p, 4))
            good = feasible and normal and c == a4_completion(p)
            ok &= good
            rows.append(f"{c}")
        return ok, "C(a_4^p) = " + ", ".join(rows), {"completions": rows}

    def c3(self):
        J0 = make_jp(0)
        g1, g2, ex = grid_dp_solve(J0, 1), grid_dp_solve(J0, 2), solve_exact(J0)
        target = Fraction(13, 2)
        a4 = job_id(0, 4)
        for label, r in (("grid K=1", g1), ("grid K=2", g2), ("exact", ex)):
            self.optima.append((f"J_0 {label}", J0, r))
        values = [g1.optimal_value, g2.optimal_value, ex.optimal_value]
        comps = [r.schedule.completion(a4) for r in (g1, g2, ex)]
        ok = all(v == target for v in values) and all(c == Fraction(5, 2) for c in comps) and ex.certified
        return ok, f"values {', '.join(map(str, values))}; C(a_4^0) {', '.join(map(str, comps))}", {
            "values": [str(v) for v in values]}

    def c4(self):
        J1 = make_jp(1)
        g2, g3 = grid_dp_solve(J1, 2), grid_dp_solve(J1, 3)
        self.optima.append(("J_1 grid K=2", J1, g2))
        a4 = job_id(1, 4)
        pp_cost = total_completion_time(make_pp_schedule(1))
        ok = g2.schedule.completion(a4) == a4_completion(1) and g2.optimal_value <= pp_cost
        ex = solve_exact(J1, SolveOptions(time_limit=self.j1_budget, incumbent_k=2))
        if ex.certified:
            ok &= ex.optimal_value == g2.optimal_value
            self.optima.append(("J_1 exact", J1, ex))
            how = f"exact {ex.optimal_value} certified"
        else:
            ok &= g2.optimal_value == g3.optimal_value
            how = f"exact not certified in {self.j1_budget:g}s, grid K=3 {g3.optimal_value}"
        detail = f"grid K=2 {g2.optimal_value} <= {pp_cost}, C(a_4^1) {g2.schedule.completion(a4)}; {how}"
        return ok, detail, {"grid_k2": str(g2.optimal_value), "grid_k3": str(g3.optimal_value),
                            "exact": str(ex.optimal_value), "exact_certified": ex.certified,
                            "exact_stats": ex.stats}

    def c5(self):
        draws = self._n(1000)
        bad, worst = 0, {}
        for p in (0, 1, 2):
            inst = make_jp(p)
            a4 = job_id(p, 4)
            need = 1 - Fraction(1, 2 ** (p + 1))
            lo = Fraction(2 * p + 2)
            low = None
            for s in range(draws):
                K = s % (p + 3)
                sched = random_feasible_schedule(inst, K, self.seed * 100_003 + s, sticky=bool(s % 2))
                got = sched.amount_in(a4, lo, lo + 10 * inst.n)
                low = got if low is None else min(low, got)
                bad += got < need
            worst[p] = str(low)
        return bad == 0, f"{3 * draws} draws, {bad} violations; least tail work {worst}", {"least": worst}

    def c6(self):
        seen = []

        def stratified(sched, p):
            return any(_multiple_of_pow2(c, p + 1) and not _multiple_of_pow2(c, p)
                       for c in (sched.completion(j) for j in sched.jobs()))

        ok = True
        for p in range(7):
            good = stratified(make_pp_schedule(p), p)
            ok &= good
            seen.append(f"P_{p}:{'y' if good else 'n'}")
        for p, K in ((0, 1), (1, 2)):
            r = grid_dp_solve(make_jp(p), K)
            good = stratified(r.schedule, p)
            ok &= good
            seen.append(f"grid J_{p}:{'y' if good else 'n'}")
        r = solve_exact(make_jp(0))
        good = stratified(r.schedule, 0)
        ok &= good
        seen.append(f"exact J_0:{'y' if good else 'n'}")
        return ok, " ".join(seen), {}

    def c7(self):
        count = self._n(50)
        failures, stab = [], []
        for s in range(count):
            n = 1 + s % 3
            inst = random_intree(n, 1, self.seed * 1000 + s)
            ex = solve_exact(inst)
            self.optima.append((f"random seed {s} exact", inst, ex))
            vals, last = [], None
            for K in range(2 * n + 1):
                r = grid_dp_solve(inst, K)
                vals.append(r.optimal_value)
                last = r
            monotone = all(a >= b for a, b in zip(vals, vals[1:]))
            at = next((K for K in range(2 * n + 1) if all(v == ex.optimal_value for v in vals[K:])), None)
            if last.optimal_value == ex.optimal_value:
                self.optima.append((f"random seed {s} grid K={2 * n}", inst, last))
            if not (monotone and at is not None and ex.certified):
                failures.append(s)
            stab.append(at)
        hist = {str(k): stab.count(k) for k in sorted(set(k for k in stab if k is not None))}
        return not failures, f"{count} instances, stabilized at K histogram {hist}, failures {failures}", {
            "stabilized_at": hist}

    def c8(self):
        target = self._n(500)
        rng = random.Random(self.seed + 8)
        swaps = strict = pushes = shifts = 0
        bad = []
        seed = 0
        while swaps < target or shifts < target:
            seed += 1
            n = rng.randint(3, 6)
            inst = random_intree(n, rng.randint(0, 2), seed)
            sched = random_feasible_schedule(inst, rng.randint(1, 3), seed, sticky=rng.random() < 0.5)
            P = derive_partition(inst, sched)
            cost = total_completion_time(sched)
            if swaps < target:
                for a in P.jobs:
                    for ap in P.jobs:
                        if a == ap or swap_violations(inst, P, a, ap):
                            continue
                        try:
                            Q = swap_jobs(inst, P, a, ap)
                        except TransformError:
                            continue
                        swaps += 1
                        new = partition_cost(inst, Q)
                        if new > cost:
                            bad.append(("swap", seed, a, ap))
                        if swap_is_strict(P, a, ap):
                            strict += 1
                            if not new < cost:
                                bad.append(("strict swap", seed, a, ap))
            if shifts < target and P.num_blocks >= 2:
                for _ in range(4):
                    spec = _random_cycle(P, rng)
                    if spec is None:
                        continue
                    try:
                        Q = cyclic_shift(inst, P, spec)
                    except TransformError:
                        continue
                    shifts += 1
                    same_len = Q.events == P.events
                    same_tot = all(
                        sum((Q.amount(b, j) for b in range(1, Q.num_blocks + 1)), Fraction(0)) == 1 for j in P.jobs
                    )
                    if not (same_len and same_tot):
                        bad.append(("shift", seed, spec.to_json()))
        while pushes < target:
            b = Fraction(rng.randrange(1, 128), 256)
            if (16 * b).denominator == 1:
                continue
            length = rng.randint(2, 6)
            share = Fraction(rng.randrange(1, 16), 16)
            inst, S = chain_fixture(b, length, share)
            P = derive_partition(inst, S)
            cap = None if rng.random() < 0.7 else Fraction(rng.randrange(1, 64), 1024)
            try:
                Q, eps, binding = epsilon_push(inst, P, tuple(range(3, 3 + length)), 0, 1, cap=cap, schedule=S)
            except TransformError:
                continue
            pushes += 1
            if partition_cost(inst, Q) > total_completion_time(S):
                bad.append(("push", str(b), length, str(share)))
        ok = not bad and strict > 0
        return ok, (f"{swaps} swaps ({strict} strict), {pushes} pushes, {shifts} cyclic shifts; "
                    f"{len(bad)} contract breaks"), {"breaks": [list(map(str, x)) for x in bad[:10]]}

    def c9(self):
        if not self.optima:
            for k in (3, 4, 7):
                self.run(k)
        dirty = []
        for label, inst, res in self.optima:
            diags = lint(inst, res.partition)
            if diags:
                dirty.append((label, [d.kind for d in diags]))
        return not dirty, f"{len(self.optima)} optima linted, {len(dirty)} with findings {dirty[:3]}", {}

    def c10(self):
        rows, ok = [], True
        for p, length in ((0, None), (1, 64), (2, 64)):
            inst, sched = make_theorem_schedule(p, length)
            a = 4 * (p + 1)
            feasible = validate_schedule(inst, sched).ok
            pre = count_preemptions(sched, a)
            good = feasible and pre >= p
            ok &= good
            rows.append(f"p={p} l={inst.meta['chain_length']} n={inst.n} feasible={feasible} preemptions={pre}")
        return ok, "; ".join(rows), {}

    # -- driver ---------------------------------------------------------

    def run(self, number: int) -> CheckResult:
        if number in self.results:
            return self.results[number]
        t0 = time.monotonic()
        try:
            passed, detail, data = getattr(self, f"c{number}")()
        except Exception as exc:  # a crash is a failed criterion, reported as such
            passed, detail, data = False, f"error: {type(exc).__name__}: {exc}", {}
        secs = time.monotonic() - t0
        limit = LIMITS[number]
        if limit is not None and secs > limit:
            passed = False
            detail += f"; over the {limit}s limit"
        res = CheckResult(number, TITLES[number], bool(passed), detail, secs, data)
        self.results[number] = res
        return res

    def run_all(self, numbers=range(1, 11)) -> list[CheckResult]:
        return [self.run(k) for k in numbers]


def _random_cycle(P, rng: random.Random):
    """A 2- or 3-block cycle through jobs with work to give and room to take."""
    k = rng.choice((2, 3)) if P.num_blocks >= 3 else 2
    blocks = rng.sample(range(1, P.num_blocks + 1), k)
    jobs, eps = [], None
    for idx, b in enumerate(blocks):
        nxt = blocks[(idx + 1) % k]
        cands = [j for j in sorted(P.active(b))
                 if j not in jobs and P.amount(b, j) > 0 and P.amount(nxt, j) < P.length(nxt)]
        if not cands:
            return None
        j = rng.choice(cands)
        jobs.append(j)
        room = min(P.amount(b, j), P.length(nxt) - P.amount(nxt, j))
        eps = room if eps is None else min(eps, room)
    eps = eps * Fraction(rng.randrange(1, 5), 4)
    return CycleSpec(tuple(blocks), tuple(jobs), eps)
