from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from normsched.dyadic import Dyadic, fmt_time, is_dyadic, parse_time


def test_normalized_storage():
    d = Dyadic(12, 3)  # 12/8 = 3/2
    assert (d.numerator, d.exponent) == (3, 1)
    z = Dyadic(0, 9)
    assert (z.numerator, z.exponent) == (0, 0)


def test_arithmetic_and_order():
    a, b = Dyadic.parse("3/2"), Dyadic.parse("1/4")
    assert a + b == F(7, 4)
    assert a - b == F(5, 4)
    assert a.half() == F(3, 4)
    assert a.scale(4) == 6
    assert min(a, b) == b and max(a, b) == a
    assert b < a and a >= b


def test_leaving_the_dyadic_ring_is_rejected():
    with pytest.raises(ValueError):
        Dyadic.coerce(F(1, 3))
    with pytest.raises(ValueError):
        Dyadic(1) / 3
    assert not is_dyadic(F(2, 3))
    assert is_dyadic(F(5, 64))


def test_formatting_round_trip():
    assert fmt_time(F(13, 2)) == "13/2"
    assert fmt_time(F(4)) == "4"
    assert fmt_time(Dyadic(3, 1)) == "3/2"
    assert parse_time("19/4") == F(19, 4)


@given(st.integers(-10**6, 10**6), st.integers(0, 40), st.integers(-10**6, 10**6), st.integers(0, 40))
def test_operations_stay_normalized_and_exact(n1, e1, n2, e2):
    a, b = Dyadic(n1, e1), Dyadic(n2, e2)
    fa, fb = F(n1, 2**e1), F(n2, 2**e2)
    for got, want in ((a + b, fa + fb), (a - b, fa - fb), (a * b, fa * fb), (a.half(), fa / 2)):
        assert got == want
        assert got.exponent == 0 or got.numerator % 2 == 1
    assert (a < b) == (fa < fb)
    assert a.is_multiple_of_pow2(e1)
