"""p-bit floating-point numbers <m, e> and their correctly rounded operations.

A value is ``m * 2**e`` with ``2**(p-1) <= |m| < 2**p`` (or ``m == 0``) and
``-2**p <= e < 2**p``. There are no infinities, NaNs or subnormals. Results
that fall outside the representable range are clamped to the nearest
representable value and reported through :class:`FpFlags`.

All exact intermediate arithmetic uses Python integers, so iterated sums and
products are rounded exactly once.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

__all__ = [
    "FpNum",
    "FpFlags",
    "Ordering",
    "round_p",
    "round_dyadic",
    "fp_add",
    "fp_sub",
    "fp_mul",
    "fp_div",
    "fp_cmp",
    "fp_neg",
    "iter_add",
    "iter_mul",
    "from_float",
    "parse_literal",
    "all_values",
    "e_min",
    "e_max",
    "max_value",
    "min_positive",
]

Real = Union[int, Fraction, float]


def e_min(p: int) -> int:
    return -(1 << p)


def e_max(p: int) -> int:
    return (1 << p) - 1


@dataclass
class FpFlags:
    """Sticky range flags accumulated over a sequence of operations."""

    overflow: bool = False
    underflow: bool = False

    def clear(self) -> None:
        self.overflow = False
        self.underflow = False

    def __bool__(self) -> bool:
        return self.overflow or self.underflow


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True, slots=True)
class FpNum:
    m: int
    e: int
    p: int

    def __post_init__(self) -> None:
        m, e, p = self.m, self.e, self.p
        if p < 2:
            raise ValueError(f"precision must be >= 2, got {p}")
        if m == 0:
            if e != 0:
                raise ValueError("zero must be encoded as <0, 0>")
            return
        if not (1 << (p - 1)) <= abs(m) < (1 << p):
            raise ValueError(f"significand {m} not normalized for p={p}")
        if not -(1 << p) <= e < (1 << p):
            raise ValueError(f"exponent {e} out of range for p={p}")

    @classmethod
    def zero(cls, p: int) -> "FpNum":
        return cls(0, 0, p)

    @classmethod
    def one(cls, p: int) -> "FpNum":
        return cls(1 << (p - 1), -(p - 1), p)

    @property
    def value(self) -> Fraction:
        """Exact rational value."""
        if self.e >= 0:
            return Fraction(self.m << self.e)
        return Fraction(self.m, 1 << -self.e)

    def is_zero(self) -> bool:
        return self.m == 0

    def is_negative(self) -> bool:
        return self.m < 0

    def __float__(self) -> float:
        # exact int/int division; huge exponents degrade to inf/0 gracefully
        v = self.value
        try:
            return v.numerator / v.denominator
        except OverflowError:
            return float("inf") if self.m > 0 else float("-inf")

    def __neg__(self) -> "FpNum":
        return FpNum(-self.m, self.e, self.p)

    def __lt__(self, other: "FpNum") -> bool:
        return fp_cmp(self, other) is Ordering.LESS

    def __le__(self, other: "FpNum") -> bool:
        return fp_cmp(self, other) is not Ordering.GREATER

    def __gt__(self, other: "FpNum") -> bool:
        return fp_cmp(self, other) is Ordering.GREATER

    def __ge__(self, other: "FpNum") -> bool:
        return fp_cmp(self, other) is not Ordering.LESS

    def __str__(self) -> str:
        return f"fp(p={self.p}, m={self.m}, e={self.e})"


_LITERAL = re.compile(
    r"^\s*fp\(\s*p\s*=\s*(-?\d+)\s*,\s*m\s*=\s*(-?\d+)\s*,\s*e\s*=\s*(-?\d+)\s*\)\s*$"
)


def parse_literal(text: str) -> FpNum:
    """Parse ``fp(p=3, m=5, e=-4)``."""
    match = _LITERAL.match(text)
    if match is None:
        raise ValueError(f"not an FpNum literal: {text!r}")
    p, m, e = (int(g) for g in match.groups())
    return FpNum(m, e, p)


def max_value(p: int) -> FpNum:
    return FpNum((1 << p) - 1, e_max(p), p)


def min_positive(p: int) -> FpNum:
    return FpNum(1 << (p - 1), e_min(p), p)


def _check_p(*xs: FpNum) -> int:
    p = xs[0].p
    for x in xs[1:]:
        if x.p != p:
            raise ValueError(f"precision mismatch: {p} vs {x.p}")
    return p


def _round_ratio(num: int, den: int, p: int, flags: Optional[FpFlags]) -> FpNum:
    """Round ``num/den`` (den > 0) to the nearest p-bit value, ties to even."""
    if num == 0:
        return FpNum(0, 0, p)
    neg = num < 0
    a = -num if neg else num
    b = den
    # leading-one exponent of a/b: 2**lead <= a/b < 2**(lead+1)
    lead = a.bit_length() - b.bit_length()
    if (a << -lead if lead < 0 else a) < (b << lead if lead > 0 else b):
        lead -= 1
    lo = e_min(p)
    e0 = lead - (p - 1)
    if e0 < lo:
        # below the smallest positive value: nearest of 0 and min_positive,
        # a tie resolves to 0
        if flags is not None:
            flags.underflow = True
        if e0 == lo - 1:
            # |x| in [minpos/2, minpos); compare with minpos/2 = 2**(lo+p-2)
            k = lo + p - 2
            lhs = a if k >= 0 else a << -k
            rhs = b << k if k >= 0 else b
            if lhs > rhs:
                m = 1 << (p - 1)
                return FpNum(-m if neg else m, lo, p)
        return FpNum(0, 0, p)
    # q = floor(a / (b * 2**e0)), remainder r / (b * 2**e0)
    if e0 >= 0:
        q, r = divmod(a, b << e0)
        d = b << e0
    else:
        q, r = divmod(a << -e0, b)
        d = b
    twice_r = 2 * r
    if twice_r > d or (twice_r == d and q & 1):
        q += 1
    if q == 1 << p:
        q >>= 1
        e0 += 1
    if e0 > e_max(p):
        if flags is not None:
            flags.overflow = True
        q, e0 = (1 << p) - 1, e_max(p)
    return FpNum(-q if neg else q, e0, p)


def round_dyadic(n: int, k: int, p: int, flags: Optional[FpFlags] = None) -> FpNum:
    """Round the exact value ``n * 2**k``."""
    if k >= 0:
        return _round_ratio(n << k, 1, p, flags)
    return _round_ratio(n, 1 << -k, p, flags)


def round_p(x: Real, p: int, flags: Optional[FpFlags] = None) -> FpNum:
    """Nearest p-bit value to ``x``; ties go to the even significand.

    ``x`` may be an int, a Fraction or a float (floats are taken exactly).
    """
    if isinstance(x, float):
        x = Fraction(x)
    if isinstance(x, int):
        return _round_ratio(x, 1, p, flags)
    return _round_ratio(x.numerator, x.denominator, p, flags)


def from_float(x: float, p: int, flags: Optional[FpFlags] = None) -> FpNum:
    return round_p(Fraction(x), p, flags)


def fp_neg(x: FpNum) -> FpNum:
    return -x


def _dyadic_sum(xs: Iterable[FpNum]) -> tuple[int, int]:
    terms = [(x.m, x.e) for x in xs if x.m != 0]
    if not terms:
        return 0, 0
    base = min(e for _, e in terms)
    return sum(m << (e - base) for m, e in terms), base


def fp_add(x: FpNum, y: FpNum, flags: Optional[FpFlags] = None) -> FpNum:
    p = _check_p(x, y)
    if y.m == 0:
        return x
    if x.m == 0:
        return y
    n, k = _dyadic_sum((x, y))
    return round_dyadic(n, k, p, flags)


def fp_sub(x: FpNum, y: FpNum, flags: Optional[FpFlags] = None) -> FpNum:
    return fp_add(x, -y, flags)


def fp_mul(x: FpNum, y: FpNum, flags: Optional[FpFlags] = None) -> FpNum:
    p = _check_p(x, y)
    if x.m == 0 or y.m == 0:
        return FpNum(0, 0, p)
    return round_dyadic(x.m * y.m, x.e + y.e, p, flags)


def fp_div(x: FpNum, y: FpNum, flags: Optional[FpFlags] = None) -> FpNum:
    p = _check_p(x, y)
    if y.m == 0:
        raise ZeroDivisionError("fp_div by zero")
    if x.m == 0:
        return FpNum(0, 0, p)
    num, den = x.m, y.m
    shift = x.e - y.e
    if shift >= 0:
        num <<= shift
    else:
        den <<= -shift
    if den < 0:
        num, den = -num, -den
    return _round_ratio(num, den, p, flags)


def fp_cmp(x: FpNum, y: FpNum) -> Ordering:
    _check_p(x, y)
    if x.m == y.m and x.e == y.e:
        return Ordering.EQUAL
    sx = (x.m > 0) - (x.m < 0)
    sy = (y.m > 0) - (y.m < 0)
    if sx != sy:
        return Ordering.LESS if sx < sy else Ordering.GREATER
    # same nonzero sign; normalization makes (e, |m|) order magnitudes
    mag_less = (x.e, abs(x.m)) < (y.e, abs(y.m))
    if sx < 0:
        mag_less = not mag_less
    return Ordering.LESS if mag_less else Ordering.GREATER


def iter_add(xs: Iterable[FpNum], p: Optional[int] = None,
             flags: Optional[FpFlags] = None) -> FpNum:
    """Exact sum of all terms, rounded once. Empty input gives zero."""
    xs = list(xs)
    if not xs:
        if p is None:
            raise ValueError("precision required for an empty sum")
        return FpNum(0, 0, p)
    p = _check_p(*xs)
    n, k = _dyadic_sum(xs)
    return round_dyadic(n, k, p, flags)


def iter_mul(xs: Iterable[FpNum], p: Optional[int] = None,
             flags: Optional[FpFlags] = None) -> FpNum:
    """Exact product of all factors, rounded once. Empty input gives one."""
    xs = list(xs)
    if not xs:
        if p is None:
            raise ValueError("precision required for an empty product")
        return FpNum.one(p)
    p = _check_p(*xs)
    n, k = 1, 0
    for x in xs:
        if x.m == 0:
            return FpNum(0, 0, p)
        n *= x.m
        k += x.e
    return round_dyadic(n, k, p, flags)


def all_values(p: int) -> list[FpNum]:
    """Every element of F_p, in ascending order of value."""
    pos = [FpNum(m, e, p)
           for e in range(e_min(p), e_max(p) + 1)
           for m in range(1 << (p - 1), 1 << p)]
    return [-v for v in reversed(pos)] + [FpNum(0, 0, p)] + pos
