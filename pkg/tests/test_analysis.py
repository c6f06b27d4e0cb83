from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from conftest import independent, part
from normsched.analysis import (
    INF,
    AConfiguration,
    NormalScheduleError,
    abnormal_jobs,
    abnormality_point,
    ccd_witnesses,
    count_preemptions,
    find_a_configurations,
    find_alternating_chains,
    find_interlace,
    is_l_normal,
    lint,
    recheck,
    shifts_and_resolution,
)
from normsched.instances import chain_fixture, job_id, make_jp, make_pp_schedule, random_feasible_schedule, random_intree
from normsched.timeline import IntervalSchedule, derive_partition, realize


@pytest.mark.parametrize("x, level, expected", [(F(3, 2), 1, True), (F(3, 2), 0, False), (0, 7, True), (F(1, 3), 30, False)])
def test_is_l_normal(x, level, expected):
    assert is_l_normal(x, level) is expected


def test_abnormality_point(j0, p0_partition):
    assert abnormality_point(p0_partition) == INF
    assert abnormality_point(part([0, "1/3", "4/3"], [{0: "1/3"}, {0: "2/3"}])) == 1
    # block 2 amounts must be multiples of 1/8
    assert abnormality_point(part([0, 1, 2], [{0: 1}, {1: "1/8", 2: "7/8"}])) == INF
    assert abnormality_point(part([0, 1, 2], [{0: 1}, {1: "1/16", 2: "15/16"}])) == 2
    assert abnormality_point(part([0, 1, 2], [{0: 1}, {1: "1/9", 2: "8/9"}])) == 2


def test_abnormal_jobs_lists_off_grid_amounts():
    P = part([0, 1, 2], [{0: 1, 1: "3/8", 2: "5/8"}, {1: "5/8", 2: "3/8"}])
    assert abnormality_point(P) == 1
    assert abnormal_jobs(P, 1) == {1, 2}


def test_shifts_and_resolution(j0, p0_partition):
    shifts, res = shifts_and_resolution(realize(j0, p0_partition))
    assert shifts == [F(1, 2)] * 3 + [1]
    assert res == F(1, 2)
    assert shifts_and_resolution(IntervalSchedule.from_pieces([(0, 0, 1, 0)]))[1] == 1
    assert shifts_and_resolution(make_pp_schedule(1))[1] == F(1, 4)
    assert shifts_and_resolution(IntervalSchedule(((), ()))) == ([], None)


def test_count_preemptions():
    s0 = make_pp_schedule(0)
    assert count_preemptions(s0, job_id(0, 2)) == 1
    assert count_preemptions(s0, job_id(0, 1)) == 0
    s1 = make_pp_schedule(1)
    assert s1.runs(job_id(1, 2)) == [(F(5, 2), F(11, 4)), (3, F(15, 4))]
    assert count_preemptions(s1, job_id(1, 2)) == 1
    with pytest.raises(KeyError):
        count_preemptions(s0, 99)


def test_cross_machine_continuation_is_one_run():
    s = IntervalSchedule.from_pieces([(0, 0, F(1, 2), 0), (1, F(1, 2), 1, 0)])
    assert count_preemptions(s, 0) == 0


def test_interlace_witness():
    inst = independent(0, 0, 1)
    P = part([0, 1, "3/2", "5/2"], [{0: "1/2", 1: "1/2"}, {0: "1/2"}, {1: "1/2", 2: 1}])
    assert find_interlace(inst, P) == (0, 1, 1)


def test_optimal_layout_is_lint_clean(j0, p0_partition):
    P = derive_partition(j0, realize(j0, p0_partition))
    assert find_interlace(j0, P) is None
    assert find_a_configurations(j0, P) == []
    assert lint(j0, P, maximal=True) == []
    assert find_interlace(independent(0, 0), part([0, 1], [{0: 1, 1: 1}])) is None


def test_a_configuration_detection():
    inst = independent(0, 0)
    sched = IntervalSchedule.from_pieces([(0, 0, "1/2", 1), (0, "1/2", "3/2", 0), (0, "3/2", 2, 1)])
    P = derive_partition(inst, sched)
    assert find_a_configurations(inst, P, sched) == [AConfiguration(0, 1, F(3, 2), 1, 2)]
    # b starting exactly where a's run starts is not enough
    late = IntervalSchedule.from_pieces([(0, "1/2", "3/2", 0), (1, "1/2", 1, 1), (0, "3/2", 2, 1)])
    assert find_a_configurations(inst, derive_partition(inst, late), late) == []


def test_alternating_chains():
    inst, sched = chain_fixture(F(3, 32), 3, F(1, 2))
    P = derive_partition(inst, sched)
    assert abnormality_point(P) == 3
    chains = find_alternating_chains(inst, P, sched)
    assert chains[0].jobs == (3, 4, 5)
    assert chains[0].anchor_event == F(3, 2)
    with pytest.raises(NormalScheduleError):
        find_alternating_chains(make_jp(0), derive_partition(make_jp(0), make_pp_schedule(0)))


def test_preempted_seed_gives_no_chain():
    inst, sched = chain_fixture(F(3, 32), 2, F(1, 2))
    P = derive_partition(inst, sched)
    # split both seeds right after the anchor so neither runs through it
    pieces = []
    for m, lane in enumerate(sched.machines):
        for p in lane:
            if p.job in (3, 4) and p.start <= F(3, 2) < p.end:
                mid = F(3, 2) + F(1, 64)
                pieces += [(m, p.start, mid, p.job), (m, mid + F(1, 64), p.end + F(1, 64), p.job)]
            else:
                pieces.append((m, p.start, p.end, p.job))
    broken = IntervalSchedule.from_pieces(pieces)
    assert find_alternating_chains(inst, P, broken) == []


def test_lint_kinds():
    one = lint(independent(0, 0), part([0, 1, 2], [{0: 1, 1: "1/2"}, {1: "1/2"}]))
    assert "NonSpanningCompletion" in {d.kind for d in one}
    four = lint(independent(0, 0, 0, 0), part([0, 2], [{0: 1, 1: 1, 2: 1, 3: 1}]))
    assert "TooManyJobsInBlock" in {d.kind for d in four}
    inst = independent(0, 0, 0)
    P = part([0, 1, "3/2", 2], [{0: "1/2", 1: "1/2", 2: "1/2"}, {0: "1/2", 1: "1/2"}, {2: "1/2"}])
    assert ccd_witnesses(inst, P) == [(0, 1, 2, 3)]
    diags = lint(inst, P)
    assert {"TooManyJobsInBlock", "IdleTimeViolation", "Interlace", "CcdConfiguration"} <= {d.kind for d in diags}
    assert all(recheck(inst, P, d) for d in diags)


def test_abnormal_block_needs_maximal_flag():
    P = part([0, 1, 2], [{0: "1/3", 1: "1/3"}, {0: "2/3", 1: "2/3"}])
    inst = independent(0, 0)
    assert "AbnormalBlock" not in {d.kind for d in lint(inst, P)}
    assert "AbnormalBlock" in {d.kind for d in lint(inst, P, maximal=True)}


@given(st.integers(1, 6), st.integers(0, 2), st.integers(0, 3), st.integers(0, 10**6))
def test_resolution_and_normality_invariants(n, r, K, seed):
    inst = random_intree(n, r, seed)
    sched = random_feasible_schedule(inst, K, seed)
    shifts, res = shifts_and_resolution(sched)
    points = sorted({t for p in sched.pieces() for t in (p.start, p.end)})
    assert sum(shifts) == points[-1] - points[0]
    assert res == min(shifts)
    P = derive_partition(inst, sched)
    if abnormality_point(P) == INF:
        q = len(P.events)
        assert all(is_l_normal(e, q - 1) for e in P.events)
        assert all(is_l_normal(v, b + 1) for b in range(1, P.num_blocks + 1) for v in P.xi[b - 1].values())
    for d in lint(inst, P):
        assert recheck(inst, P, d)
    for d in lint(inst, P):
        if d.kind == "TooManyJobsInBlock":
            break
    else:
        for b in range(1, P.num_blocks + 1):
            if len(P.active(b)) == 3:
                assert any(P.tau(a) == b for a in P.active(b))
