from fractions import Fraction as F

import pytest
from hypothesis import assume, given, strategies as st

from conftest import independent, part
from normsched.analysis import abnormality_point, find_alternating_chains, lint
from normsched.instances import chain_fixture, make_jp, make_pp_schedule, random_feasible_schedule, random_intree
from normsched.timeline import (
    Instance,
    derive_partition,
    partition_cost,
    partition_feasible,
    total_completion_time,
)
from normsched.transform import (
    CycleSpec,
    TransformError,
    cyclic_shift,
    epsilon_push,
    improve,
    plan_swap,
    push_bounds,
    swap_is_strict,
    swap_jobs,
    swap_violations,
)


def test_cyclic_shift_moves_epsilon_around_the_cycle():
    inst = independent(0, 0)
    P = part([0, 1, 2], [{0: "1/2", 1: "1/2"}, {0: "1/2", 1: "1/2"}])
    Q = cyclic_shift(inst, P, CycleSpec((1, 2), (0, 1), F(1, 4)))
    assert Q.xi == ({0: F(1, 4), 1: F(3, 4)}, {0: F(3, 4), 1: F(1, 4)})


def test_cyclic_shift_rejects_bad_specs_and_release_breaks():
    inst = independent(0, 0)
    P = part([0, 1, 2], [{0: "1/2", 1: "1/2"}, {0: "1/2", 1: "1/2"}])
    with pytest.raises(TransformError) as err:
        cyclic_shift(inst, P, CycleSpec((1, 2), (0, 1), 0))
    assert "cycle" in err.value.report.conditions
    late = Instance.from_lists([0, 1], [None, None])
    P2 = part([0, 1, 2], [{0: "1/2"}, {0: "1/2", 1: 1}])
    with pytest.raises(TransformError) as err:
        cyclic_shift(late, P2, CycleSpec((2, 1), (1, 0), F(1, 4)))
    assert "release" in err.value.report.conditions


def test_swap_example():
    u, v, w = 0, 1, 2
    inst = independent(0, 0, 0)
    P = part([0, "1/2", 1, 2], [{u: "1/2", v: "1/2"}, {v: "1/2", w: "1/2"}, {u: "1/2", w: "1/2"}])
    assert plan_swap(inst, P, u, v).moved == {2: F(1, 2)}
    Q = swap_jobs(inst, P, u, v)
    assert Q.xi[1] == {u: F(1, 2), w: F(1, 2)}
    assert Q.xi[2] == {v: F(1, 2), w: F(1, 2)}
    assert partition_cost(inst, Q) <= partition_cost(inst, P)
    assert not swap_is_strict(P, u, v)


def test_swap_preconditions_are_reported_individually():
    # 1 is a predecessor of 2, which runs in the last block of 0
    inst = Instance.from_lists([0, 0, 0], [None, 2, None])
    P = part([0, "1/2", 1, 2], [{0: "1/2", 1: "1/2"}, {1: "1/2", 2: "1/2"}, {0: "1/2", 2: "1/2"}])
    assert "independence" in {v.condition for v in swap_violations(inst, P, 0, 1)}
    with pytest.raises(TransformError):
        swap_jobs(inst, P, 0, 1)


def test_push_on_odd_chain_gains_exactly_epsilon():
    inst, sched = chain_fixture(F(3, 32), 3, F(1, 2))
    P = derive_partition(inst, sched)
    chain = find_alternating_chains(inst, P, sched)[0]
    bounds = push_bounds(inst, P, chain, 0, 1)
    assert bounds.binding() == "beta"
    Q, eps, binding = epsilon_push(inst, P, chain, 0, 1, schedule=sched)
    assert (eps, binding) == (F(3, 64), "beta")
    assert partition_cost(inst, Q) == total_completion_time(sched) - eps
    Q, eps, binding = epsilon_push(inst, P, chain, 0, 1, cap=F(1, 64), schedule=sched)
    assert (eps, binding) == (F(1, 64), "cap")
    assert partition_cost(inst, Q) == total_completion_time(sched) - eps


def test_push_with_alpha_binding_normalizes_the_block():
    inst, sched = chain_fixture(F(3, 32), 2, F(1, 2))
    P = derive_partition(inst, sched)
    chain = find_alternating_chains(inst, P, sched)[0]
    Q, eps, binding = epsilon_push(inst, P, chain, 0, 1, schedule=sched)
    assert binding == "alpha"
    assert abnormality_point(Q) > abnormality_point(P)
    assert partition_cost(inst, Q) <= total_completion_time(sched)


def test_push_rejects_degenerate_epsilon():
    inst, sched = chain_fixture(F(3, 32), 2, F(1, 2))
    P = derive_partition(inst, sched)
    chain = find_alternating_chains(inst, P, sched)[0]
    with pytest.raises(TransformError, match="degenerate"):
        epsilon_push(inst, P, chain, 0, 1, cap=0, schedule=sched)


def test_push_rejects_short_or_invalid_chain():
    inst, sched = chain_fixture(F(3, 32), 2, F(1, 2))
    P = derive_partition(inst, sched)
    with pytest.raises(TransformError):
        epsilon_push(inst, P, (3,), 0, 1, schedule=sched)
    with pytest.raises(TransformError):
        epsilon_push(inst, P, (4, 3), 0, 1, schedule=sched)


def test_improve_applies_one_ccd_swap():
    inst = independent(0, 0, 0)
    P = part([0, 1, "3/2", 2], [{0: "1/2", 1: "1/2", 2: "1/2"}, {0: "1/2", 1: "1/2"}, {2: "1/2"}])
    Q, trace = improve(inst, P)
    assert [m.kind for m in trace] == ["swap"]
    assert trace[0].cost_before == 5 and trace[0].cost_after == F(9, 2)
    assert partition_cost(inst, Q) == F(9, 2)


def test_improve_leaves_clean_partitions_alone():
    j0 = make_jp(0)
    P = derive_partition(j0, make_pp_schedule(0))
    assert lint(j0, P) == []
    Q, trace = improve(j0, P)
    assert trace == [] and Q == P


schedules = st.builds(
    lambda n, r, K, seed: (random_intree(n, r, seed), K, seed),
    st.integers(2, 6), st.integers(0, 2), st.integers(1, 3), st.integers(0, 10**6),
)


@given(schedules, st.data())
def test_cyclic_shift_preserves_totals_and_lengths(case, data):
    inst, K, seed = case
    P = derive_partition(inst, random_feasible_schedule(inst, K, seed))
    pairs = [(b, j) for b in range(1, P.num_blocks + 1) for j in P.active(b)]
    b1, a1 = data.draw(st.sampled_from(pairs))
    others = [(b, j) for b, j in pairs if b != b1 and j != a1]
    assume(others)
    b2, a2 = data.draw(st.sampled_from(others))
    eps = min(P.amount(b1, a1), P.amount(b2, a2), P.length(b2) - P.amount(b2, a1), P.length(b1) - P.amount(b1, a2))
    assume(eps > 0)
    try:
        Q = cyclic_shift(inst, P, CycleSpec((b1, b2), (a1, a2), eps))
    except TransformError as exc:
        assert not exc.report.ok
        return
    assert partition_feasible(inst, Q)
    assert Q.events == P.events
    for j in inst.ids:
        assert sum(Q.amount(b, j) for b in range(1, Q.num_blocks + 1)) == 1


@given(schedules)
def test_swaps_never_increase_the_cost(case):
    inst, K, seed = case
    sched = random_feasible_schedule(inst, K, seed)
    P = derive_partition(inst, sched)
    before = total_completion_time(sched)
    for a in inst.ids:
        for a2 in inst.ids:
            if a == a2 or swap_violations(inst, P, a, a2):
                continue
            try:
                Q = swap_jobs(inst, P, a, a2)
            except TransformError:
                continue
            after = partition_cost(inst, Q)
            assert after <= before
            if swap_is_strict(P, a, a2):
                assert after < before


@given(st.sampled_from([F(k, 32) for k in range(1, 16) if k % 2]), st.integers(2, 5),
       st.sampled_from([F(1, 4), F(1, 2), F(3, 4)]))
def test_pushes_never_increase_the_cost(b, length, share):
    inst, sched = chain_fixture(b, length, share)
    P = derive_partition(inst, sched)
    chain = find_alternating_chains(inst, P, sched)[0]
    Q, eps, _ = epsilon_push(inst, P, chain, 0, 1, schedule=sched)
    assert partition_feasible(inst, Q)
    before, after = total_completion_time(sched), partition_cost(inst, Q)
    assert after <= before
    if len(chain.jobs) % 2:
        assert after == before - eps
