from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from conftest import independent, part
from normsched.instances import make_pp_schedule, random_feasible_schedule, random_intree
from normsched.timeline import (
    CapacityError,
    InfeasibleError,
    Instance,
    IntervalSchedule,
    canonical,
    derive_partition,
    mcnaughton_block,
    partition_cost,
    partition_feasible,
    realize,
    total_completion_time,
    validate_instance,
    validate_schedule,
)


def test_instance_round_trip_and_relations(j0):
    again = Instance.from_json(j0.to_json())
    assert again == j0
    assert j0.precedes(0, 3) and not j0.precedes(3, 0)
    assert j0.independent(0, 1) and not j0.independent(1, 3)
    order = j0.topological_order
    assert order.index(3) > max(order.index(j) for j in (0, 1, 2))


@pytest.mark.parametrize("releases, parents, condition", [
    ([0, 0], [1, 0], "cycle"),
    ([0, -1], [None, None], "negative_release"),
    ([0, 0], [None, 7], "unknown_parent"),
])
def test_instance_validation_names_the_condition(releases, parents, condition):
    rep = validate_instance(Instance.from_lists(releases, parents))
    assert not rep
    assert condition in rep.conditions


def test_fractional_release_is_rejected():
    inst = Instance.from_json({"jobs": [{"id": 0, "release": 0.5}]})
    assert "release" in validate_instance(inst).conditions


def test_partition_accessors(p0_partition):
    P = p0_partition
    assert P.num_blocks == 2
    assert P.length(1) == F(3, 2)
    assert (P.start_of(2), P.end_of(2)) == (F(3, 2), F(5, 2))
    assert P.tau(3) == 2 and P.first_block(3) == 2
    assert P.active(1) == {0, 1, 2}
    assert P.idle(2) == 1
    assert P.spans(2, 3)


def test_partition_feasible_itemizes_every_condition(j0):
    bad = part([0, 1, 2], [{0: 2, 1: 1, 2: 1, 3: "1/2"}, {3: "1/2"}])
    rep = partition_feasible(j0, bad)
    assert {"job_capacity", "block_capacity", "release", "total", "precedence"} <= rep.conditions


def test_realize_and_derive_recover_the_events(j0, p0_partition):
    sched = realize(j0, p0_partition)
    assert validate_schedule(j0, sched)
    assert total_completion_time(sched) == 1 + F(3, 2) * 2 + F(5, 2)
    P, _ = canonical(j0, p0_partition)
    # wrap-around puts job 2 on the second machine from 1/2, which is a start event
    assert P.events == (0, F(1, 2), 1, F(3, 2), F(5, 2))


def test_completing_first_layout_is_cheaper_or_equal():
    inst = independent(0, 0, 0)
    P = part([0, 1, 2], [{0: "1/2", 1: "1/2", 2: "1/2"}, {0: "1/2", 1: "1/2", 2: "1/2"}])
    plain = total_completion_time(realize(inst, P))
    assert partition_cost(inst, P) <= plain


def test_mcnaughton_wraps_at_block_end():
    m1, m2 = mcnaughton_block({0: F(3, 4), 1: F(3, 4), 2: F(1, 2)}, 0, 1)
    assert [(p.job, p.start, p.end) for p in m1] == [(0, 0, F(3, 4)), (1, F(3, 4), 1)]
    assert [(p.job, p.start, p.end) for p in m2] == [(1, 0, F(1, 2)), (2, F(1, 2), 1)]
    with pytest.raises(CapacityError):
        mcnaughton_block({0: 2}, 0, 1)
    with pytest.raises(CapacityError):
        mcnaughton_block({0: 1, 1: 1, 2: F(1, 2)}, 0, 1)


def test_mcnaughton_honours_an_explicit_order():
    m1, _ = mcnaughton_block({0: F(1, 2), 1: F(1, 2)}, 0, 1, order=[1, 0])
    assert [p.job for p in m1] == [1, 0]


def test_schedule_violations():
    inst = Instance.from_lists([0, 1], [1, None])
    sched = IntervalSchedule.from_pieces([(1, 0, 1, 0), (0, F(1, 2), F(3, 2), 1)])
    rep = validate_schedule(inst, sched)
    assert {"release", "precedence"} <= rep.conditions
    with pytest.raises(InfeasibleError):
        derive_partition(inst, sched)


def test_pp_schedule_is_feasible_for_small_levels():
    from normsched.instances import make_jp

    for p in range(4):
        assert validate_schedule(make_jp(p), make_pp_schedule(p))


@given(st.integers(1, 6), st.integers(0, 2), st.integers(0, 3), st.integers(0, 10**6))
def test_derive_then_realize_round_trips(n, r, K, seed):
    inst = random_intree(n, r, seed)
    sched = random_feasible_schedule(inst, K, seed)
    P = derive_partition(inst, sched)
    assert partition_feasible(inst, P)
    again = realize(inst, P)
    assert validate_schedule(inst, again)
    # realization keeps every job's completion inside its last block
    for j in inst.ids:
        assert P.start_of(P.tau(j)) < again.completion(j) <= P.end_of(P.tau(j))
    assert partition_cost(inst, P) <= total_completion_time(sched)
