"""Cross-module invariants checked on generated inputs."""

from fractions import Fraction as F

from hypothesis import given, settings, strategies as st

from normsched.analysis import find_a_configurations, find_interlace, lint
from normsched.instances import random_feasible_schedule, random_intree
from normsched.solver import solve_exact
from normsched.timeline import derive_partition, mcnaughton_block, realize

amount = st.integers(1, 16).map(lambda k: F(k, 16))


@given(st.lists(amount, min_size=1, max_size=5), st.integers(0, 4), st.data())
def test_wrap_around_fill(amts, start, data):
    length = max(max(amts), (sum(amts) + 1) / 2)
    length = F(-(-length * 16 // 1), 16)
    order = data.draw(st.permutations(range(len(amts))))
    m1, m2 = mcnaughton_block(dict(enumerate(amts)), start, start + length, order)
    for lane in (m1, m2):
        assert sum(p.length for p in lane) <= length
        assert all(start <= p.start < p.end <= start + length for p in lane)
    assert sum(p.length for p in m1 + m2) == sum(amts)
    split = {p.job for p in m1} & {p.job for p in m2}
    assert len(split) <= 1
    for j in split:
        (a,), (b,) = [p for p in m1 if p.job == j], [p for p in m2 if p.job == j]
        assert b.end <= a.start or a.end <= b.start


@given(st.integers(1, 6), st.integers(0, 2), st.integers(0, 3), st.integers(0, 10**6), st.booleans())
def test_realize_preserves_block_amounts_and_completions(n, r, K, seed, completing_first):
    inst = random_intree(n, r, seed)
    P = derive_partition(inst, random_feasible_schedule(inst, K, seed))
    S = realize(inst, P, completing_first=completing_first)
    for b in range(1, P.num_blocks + 1):
        for j in P.active(b):
            assert S.amount_in(j, P.start_of(b), P.end_of(b)) == P.amount(b, j)
    # a job that spans its last block completes exactly at the block end
    for j in inst.ids:
        b = P.tau(j)
        if P.spans(b, j):
            assert S.completion(j) == P.end_of(b)


@settings(max_examples=10)
@given(st.integers(1, 3), st.integers(0, 1), st.integers(0, 10**6))
def test_solver_optima_satisfy_the_necessary_conditions(n, r, seed):
    inst = random_intree(n, r, seed)
    res = solve_exact(inst)
    P = derive_partition(inst, res.schedule)
    assert lint(inst, P) == []
    assert find_interlace(inst, P) is None
    assert find_a_configurations(inst, P, res.schedule) == []
