"""Exact dyadic rationals ``numerator / 2**exponent``.

Schedule times for this problem live on dyadic grids, so a dedicated type
keeps them normalized and makes grid membership (``is_multiple_of_pow2``)
a bit operation.  Values interoperate with ``int`` and
``fractions.Fraction``; operations that would leave the dyadic ring
(division by a non power of two) raise ``ValueError``.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


class Dyadic:
    """Normalized dyadic rational: numerator odd (or zero, with exponent 0)."""

    __slots__ = ("_num", "_exp")

    def __init__(self, numerator: int = 0, exponent: int = 0):
        if exponent < 0:
            numerator <<= -exponent
            exponent = 0
        if numerator == 0:
            exponent = 0
        else:
            tz = (numerator & -numerator).bit_length() - 1
            shift = min(tz, exponent)
            numerator >>= shift
            exponent -= shift
        self._num = numerator
        self._exp = exponent

    @property
    def numerator(self) -> int:
        return self._num

    @property
    def exponent(self) -> int:
        return self._exp

    @classmethod
    def coerce(cls, value) -> Dyadic:
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, int):
            return cls(value, 0)
        if isinstance(value, str):
            return cls.parse(value)
        if isinstance(value, Rational):
            num, den = value.numerator, value.denominator
            if not _is_pow2(den):
                raise ValueError(f"{value} is not dyadic")
            return cls(num, den.bit_length() - 1)
        raise TypeError(f"cannot convert {type(value).__name__} to Dyadic")

    @classmethod
    def parse(cls, text: str) -> Dyadic:
        return cls.coerce(Fraction(text.strip()))

    def to_fraction(self) -> Fraction:
        return Fraction(self._num, 1 << self._exp)

    def __str__(self) -> str:
        if self._exp == 0:
            return str(self._num)
        return f"{self._num}/{1 << self._exp}"

    def __repr__(self) -> str:
        return f"Dyadic({str(self)!r})"

    def __hash__(self) -> int:
        return hash(self.to_fraction())

    # arithmetic -----------------------------------------------------------

    def _align(self, other: Dyadic) -> tuple[int, int, int]:
        e = max(self._exp, other._exp)
        return self._num << (e - self._exp), other._num << (e - other._exp), e

    def __add__(self, other):
        try:
            other = Dyadic.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        a, b, e = self._align(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = Dyadic.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        a, b, e = self._align(other)
        return Dyadic(a - b, e)

    def __rsub__(self, other):
        try:
            other = Dyadic.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return other - self

    def __mul__(self, other):
        try:
            other = Dyadic.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return Dyadic(self._num * other._num, self._exp + other._exp)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, int):
            if not _is_pow2(abs(other)):
                raise ValueError(f"division by {other} leaves the dyadic ring")
            sign = -1 if other < 0 else 1
            return Dyadic(sign * self._num, self._exp + abs(other).bit_length() - 1)
        return NotImplemented

    def __neg__(self):
        return Dyadic(-self._num, self._exp)

    def __abs__(self):
        return Dyadic(abs(self._num), self._exp)

    def __bool__(self):
        return self._num != 0

    def half(self) -> Dyadic:
        return Dyadic(self._num, self._exp + 1)

    def scale(self, k: int) -> Dyadic:
        return Dyadic(self._num * k, self._exp)

    # comparison -----------------------------------------------------------

    def _cmp_key(self, other):
        if isinstance(other, Dyadic):
            a, b, _ = self._align(other)
            return a, b
        if isinstance(other, (int, Rational)):
            return self.to_fraction(), Fraction(other)
        return None

    def __eq__(self, other):
        key = self._cmp_key(other)
        return NotImplemented if key is None else key[0] == key[1]

    def __lt__(self, other):
        key = self._cmp_key(other)
        return NotImplemented if key is None else key[0] < key[1]

    def __le__(self, other):
        key = self._cmp_key(other)
        return NotImplemented if key is None else key[0] <= key[1]

    def __gt__(self, other):
        key = self._cmp_key(other)
        return NotImplemented if key is None else key[0] > key[1]

    def __ge__(self, other):
        key = self._cmp_key(other)
        return NotImplemented if key is None else key[0] >= key[1]

    def is_multiple_of_pow2(self, level: int) -> bool:
        """True iff ``self * 2**level`` is an integer."""
        return self._exp <= level


def is_dyadic(value) -> bool:
    if isinstance(value, (Dyadic, int)):
        return True
    return _is_pow2(Fraction(value).denominator)


def fmt_time(value) -> str:
    """Lowest-terms ``num/den`` string (bare integer when den == 1)."""
    f = value.to_fraction() if isinstance(value, Dyadic) else Fraction(value)
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def parse_time(text) -> Fraction:
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, Dyadic):
        return text.to_fraction()
    return Fraction(str(text).strip())
