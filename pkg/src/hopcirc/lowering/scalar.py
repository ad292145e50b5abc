"""Gate-level circuits for p-bit float add, mul, cmp and iterated addition.

All circuits consume and produce the fixed two's complement encoding of
:mod:`hopcirc.encoding`. They reproduce the reference arithmetic exactly,
including round-to-nearest-even, overflow clamping and underflow to zero or
the smallest positive value.
"""
from __future__ import annotations

import functools
import os

from ..circuit.ir import Builder, Circuit
from ..fp.number import e_max, e_min
from .gadgets import (Bits, Gates, add, add_const, any_bit, cond_neg, eq_const,
                      mux_vec, multi_add, multiply_unsigned, sext, shift_left,
                      signed_lt_const, sub, suffix_or, unsigned_ge_const, zext)

__all__ = ["scalar_template", "max_concrete_p", "SCALAR_KINDS", "ConcreteLimitError"]

SCALAR_KINDS = ("add", "mul", "cmp", "iter_add")


class ConcreteLimitError(ValueError):
    pass


def max_concrete_p() -> int:
    return int(os.environ.get("HOPCIRC_MAX_CONCRETE_P", "8"))


def _split(x: Bits, p: int) -> tuple[Bits, Bits]:
    return x[:p + 1], x[p + 1:]


def _magnitude(g: Gates, m: Bits) -> tuple[int, Bits]:
    """Sign and p-bit magnitude of a (p+1)-bit signed significand."""
    s = m[-1]
    return s, cond_neg(g, m, s)[:-1]


def pack(g: Gates, sign: int, mag: Bits, e0: Bits, p: int) -> Bits:
    """Round ``(-1)**sign * mag * 2**e0`` to an encoded p-bit float.

    ``mag`` is unsigned, ``e0`` signed. Mirrors the reference rounding:
    ties to even, overflow to the largest magnitude, and below the range the
    nearer of 0 and the smallest positive value (a tie goes to 0).
    """
    mag = zext(g, mag, max(len(mag), p + 2))
    w = len(mag)
    above = suffix_or(g, mag) + [g.const(0)]
    nz = above[0]
    lead = [g.AND(mag[i], g.NOT(above[i + 1])) for i in range(w)]
    nl = max(1, (w - 1).bit_length())
    L = [any_bit(g, [lead[i] for i in range(w) if (i >> j) & 1]) for j in range(nl)]
    sh = [any_bit(g, [lead[i] for i in range(w) if ((w - 1 - i) >> j) & 1])
          for j in range(nl)]
    N = shift_left(g, mag, sh, w)
    mant = N[w - p:]
    guard = N[w - p - 1]
    sticky = any_bit(g, N[:w - p - 1])
    # unbiased exponent before rounding: e0 + L - (p - 1)
    we = max(len(e0), nl + 1, p + 2) + 3
    E = add(g, sext(e0, we), zext(g, L, we))
    E = add_const(g, E, -(p - 1))
    up = g.AND(guard, g.OR(sticky, mant[0]))
    m1 = add(g, zext(g, mant, p + 1), [g.const(0)] * (p + 1), cin=up)
    carry = m1[p]
    rounded = mux_vec(g, carry, m1[:p], m1[1:p + 1])
    E1 = add(g, E, [g.const(0)] * we, cin=carry)
    lo, hi = e_min(p), e_max(p)
    under = signed_lt_const(g, E, lo)
    not_pow2 = any_bit(g, N[:w - 1])
    half_up = g.AND(eq_const(g, E, lo - 1), not_pow2)
    over = g.NOT(signed_lt_const(g, E1, hi + 1))
    is_zero = g.OR(g.NOT(nz), g.AND(under, g.NOT(half_up)))
    M = mux_vec(g, over, rounded, g.const_bits((1 << p) - 1, p))
    M = mux_vec(g, under, M, g.const_bits(1 << (p - 1), p))
    Ex = mux_vec(g, over, E1[:p + 1], g.const_bits(hi, p + 1))
    Ex = mux_vec(g, under, Ex, g.const_bits(lo, p + 1))
    m_enc = cond_neg(g, zext(g, M, p + 1), sign)
    keep = g.NOT(is_zero)
    return [g.AND(b, keep) for b in m_enc + Ex]


def _add_bits(g: Gates, x: Bits, y: Bits, p: int) -> Bits:
    mx, ex = _split(x, p)
    my, ey = _split(y, p)
    zx = g.NOT(any_bit(g, mx))
    zy = g.NOT(any_bit(g, my))
    diff = sub(g, sext(ex, p + 2), sext(ey, p + 2))
    x_big = g.NOT(diff[-1])
    mb = mux_vec(g, x_big, my, mx)
    ms = mux_vec(g, x_big, mx, my)
    eb = mux_vec(g, x_big, ey, ex)
    es = mux_vec(g, x_big, ex, ey)
    d = cond_neg(g, diff, g.NOT(x_big))
    far = unsigned_ge_const(g, d[:-1], p + 3)
    k = (p + 2).bit_length()
    ww = 2 * p + 5
    shifted = shift_left(g, sext(mb, ww), d[:k], ww)
    total = add(g, shifted, sext(ms, ww))
    sign = total[-1]
    mag = cond_neg(g, total, sign)[:-1]
    near = pack(g, sign, mag, es, p)
    res = mux_vec(g, far, near, mb + eb)
    res = mux_vec(g, zy, res, x)
    return mux_vec(g, zx, res, y)


def _mul_bits(g: Gates, x: Bits, y: Bits, p: int) -> Bits:
    mx, ex = _split(x, p)
    my, ey = _split(y, p)
    sx, ax = _magnitude(g, mx)
    sy, ay = _magnitude(g, my)
    prod = multiply_unsigned(g, ax, ay)
    e0 = add(g, sext(ex, p + 2), sext(ey, p + 2))
    return pack(g, g.XOR(sx, sy), prod, e0, p)


def _key(g: Gates, x: Bits, p: int) -> Bits:
    """Signed integer ordered like the float value."""
    m, e = _split(x, p)
    s, a = _magnitude(g, m)
    nz = any_bit(g, m)
    e_off = e[:-1] + [g.NOT(e[-1])]
    k = [g.AND(b, nz) for b in a + e_off]
    return cond_neg(g, zext(g, k, 2 * p + 3), s)


def _cmp_bits(g: Gates, x: Bits, y: Bits, p: int) -> Bits:
    kx, ky = _key(g, x, p), _key(g, y, p)
    n = len(kx) + 1
    lt = sub(g, sext(kx, n), sext(ky, n))[-1]
    eq = g.AND(*[g.XNOR(a, b) for a, b in zip(x, y)])
    gt = g.AND(g.NOT(lt), g.NOT(eq))
    return [lt, eq, gt]


def _iter_add_bits(g: Gates, xs: list[Bits], p: int) -> Bits:
    n = len(xs)
    span = 1 << (p + 1)
    W = p + span + max(1, (n - 1).bit_length()) + 2
    rows = []
    for x in xs:
        m, e = _split(x, p)
        offset = e[:-1] + [g.NOT(e[-1])]  # e - e_min as unsigned
        rows.append(shift_left(g, sext(m, W), offset, W))
    total = multi_add(g, rows, W)
    sign = total[-1]
    mag = cond_neg(g, total, sign)[:-1]
    e0 = g.const_bits(e_min(p), p + 2)
    return pack(g, sign, mag, e0, p)


@functools.lru_cache(maxsize=None)
def scalar_template(kind: str, p: int, n: int = 2) -> Circuit:
    """Concrete, macro-free circuit for one scalar operation.

    Inputs are the operand encodings in order; ``cmp`` outputs the three
    bits ``[lt, eq, gt]``, the others one encoding.
    """
    if kind not in SCALAR_KINDS:
        raise ValueError(f"unknown scalar kind {kind!r}")
    if p > max_concrete_p():
        raise ConcreteLimitError(f"p={p} exceeds the concrete-lowering cap {max_concrete_p()}")
    if p < 2:
        raise ValueError("precision must be at least 2")
    b = Builder(p)
    g = Gates(b)
    arity = n if kind == "iter_add" else 2
    if arity < 1:
        raise ValueError("iter_add needs at least one operand")
    ops = [b.input_bits(b.width) for _ in range(arity)]
    if kind == "add":
        out = _add_bits(g, ops[0], ops[1], p)
    elif kind == "mul":
        out = _mul_bits(g, ops[0], ops[1], p)
    elif kind == "cmp":
        out = _cmp_bits(g, ops[0], ops[1], p)
    else:
        out = _iter_add_bits(g, ops, p)
    return b.build(out)
