"""exp and sqrt on p-bit floats, correctly rounded.

exp reduces ``x = k*ln2 + r`` in fixed point, sums the Taylor series of
``e**r`` and rounds the enclosing interval. If the two interval ends round
differently the working precision is doubled and the evaluation repeated.
Because ``e**x`` is irrational for rational nonzero ``x`` this terminates, and
the returned value is the nearest p-bit float, so the relative error is at
most ``2**-p``.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional

from .number import FpFlags, FpNum, e_max, e_min, max_value, round_dyadic

__all__ = ["fp_exp", "fp_sqrt", "ln2_fixed"]

_LN2_UPPER = Fraction(6932, 10000)
_ln2_cache: tuple[int, int] = (0, 0)


def ln2_fixed(bits: int) -> int:
    """floor(ln2 * 2**bits), via ln2 = 2*atanh(1/3)."""
    global _ln2_cache
    have_bits, have = _ln2_cache
    if have_bits >= bits:
        return have >> (have_bits - bits)
    guard = bits + 32
    one = 1 << guard
    total = 0
    # atanh(1/3) = sum_{j>=0} 1 / ((2j+1) * 3**(2j+1))
    power = one // 3
    j = 0
    while power:
        total += power // (2 * j + 1)
        power //= 9
        j += 1
    value = (2 * total) >> 32
    _ln2_cache = (bits, value)
    return value


def _exp_fixed(x: Fraction, work: int) -> tuple[int, int, int]:
    """Return (s, shift, err) with e**x in [s-err, s+err] * 2**shift."""
    # x truncated to `work` fractional bits
    xs = (x.numerator << work) // x.denominator
    k = round(Fraction(xs, 1 << work) / Fraction(ln2_fixed(work + 8), 1 << (work + 8)))
    extra = max(k.bit_length(), 1) + 8
    r = ((xs << extra) - k * ln2_fixed(work + extra)) >> extra
    one = 1 << work
    term = one
    total = one
    n = 1
    while term != 0:
        term = (term * r >> work) // n
        total += term
        n += 1
    err = 4 * n + 32
    return total, k - work, err


def fp_exp(x: FpNum, flags: Optional[FpFlags] = None) -> FpNum:
    p = x.p
    if x.m == 0:
        return FpNum.one(p)
    v = x.value
    if v >= (e_max(p) + p + 1) * _LN2_UPPER:
        if flags is not None:
            flags.overflow = True
        return max_value(p)
    if v <= (e_min(p) + p - 2) * _LN2_UPPER:
        if flags is not None:
            flags.underflow = True
        return FpNum.zero(p)
    work = max(4 * p, 64) + 16
    while True:
        s, shift, err = _exp_fixed(v, work)
        lo = round_dyadic(s - err, shift, p)
        hi = round_dyadic(s + err, shift, p)
        if lo == hi:
            return round_dyadic(s, shift, p, flags)
        work *= 2


def fp_sqrt(x: FpNum, flags: Optional[FpFlags] = None) -> FpNum:
    p = x.p
    if x.m < 0:
        raise ValueError("fp_sqrt of a negative number")
    if x.m == 0:
        return x
    m, e = x.m, x.e
    if e & 1:
        m <<= 1
        e -= 1
    guard = p + 4
    n = m << (2 * guard)
    s = math.isqrt(n)
    k = (e - 2 * guard) // 2
    if s * s == n:
        return round_dyadic(s, k, p, flags)
    # true root lies strictly inside (s, s+1); s has >= p+2 bits, so s+1/2
    # sits on the same side of every rounding boundary
    return round_dyadic(2 * s + 1, k - 1, p, flags)
