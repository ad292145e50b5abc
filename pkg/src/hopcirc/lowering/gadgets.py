"""Bit-level building blocks on top of :class:`~hopcirc.circuit.Builder`.

Bit vectors are lists of gate ids, least significant bit first. Signed
vectors are two's complement. :class:`Gates` folds constants so templates
built from generic gadgets stay small.
"""
from __future__ import annotations

from typing import Sequence

from ..circuit.ir import Builder

Bits = list[int]


class Gates:
    """Constant-folding gate factory over a builder."""

    def __init__(self, b: Builder):
        self.b = b
        self._val: dict[int, int] = {}

    # constants -----------------------------------------------------------
    def const(self, bit: int) -> int:
        g = self.b.const(bit)
        self._val[g] = bit
        return g

    def value(self, g: int):
        return self._val.get(g)

    def const_bits(self, value: int, n: int) -> Bits:
        u = value & ((1 << n) - 1)
        return [self.const((u >> i) & 1) for i in range(n)]

    # basic gates ---------------------------------------------------------
    def NOT(self, a: int) -> int:
        v = self._val.get(a)
        if v is not None:
            return self.const(1 - v)
        return self.b.NOT(a)

    def _assoc(self, xs: Sequence[int], absorbing: int, fn) -> int:
        keep: list[int] = []
        seen = set()
        for x in xs:
            v = self._val.get(x)
            if v == absorbing:
                return self.const(absorbing)
            if v is None and x not in seen:
                seen.add(x)
                keep.append(x)
        if not keep:
            return self.const(1 - absorbing)
        if len(keep) == 1:
            return keep[0]
        return fn(*keep)

    def AND(self, *xs: int) -> int:
        return self._assoc(xs, 0, self.b.AND)

    def OR(self, *xs: int) -> int:
        return self._assoc(xs, 1, self.b.OR)

    def MAJ(self, *xs: int) -> int:
        ones = sum(1 for x in xs if self._val.get(x) == 1)
        free = [x for x in xs if self._val.get(x) is None]
        n = len(xs)
        if 2 * ones > n:
            return self.const(1)
        if 2 * (ones + len(free)) <= n:
            return self.const(0)
        return self.b.MAJ(*xs)

    def XOR(self, a: int, c: int) -> int:
        va, vc = self._val.get(a), self._val.get(c)
        if va is not None and vc is not None:
            return self.const(va ^ vc)
        if va is not None:
            return c if va == 0 else self.NOT(c)
        if vc is not None:
            return a if vc == 0 else self.NOT(a)
        if a == c:
            return self.const(0)
        return self.AND(self.OR(a, c), self.NOT(self.AND(a, c)))

    def XNOR(self, a: int, c: int) -> int:
        return self.NOT(self.XOR(a, c))

    def MUX(self, s: int, a: int, c: int) -> int:
        """``c`` if ``s`` else ``a``."""
        v = self._val.get(s)
        if v is not None:
            return c if v else a
        if a == c:
            return a
        return self.OR(self.AND(self.NOT(s), a), self.AND(s, c))

    def full_adder(self, a: int, c: int, d: int) -> tuple[int, int]:
        """(sum, carry) of three bits; sum is one MAJ over the carry complement."""
        live = [x for x in (a, c, d) if self._val.get(x) != 0]
        if len(live) <= 2:
            if not live:
                return self.const(0), self.const(0)
            if len(live) == 1:
                return live[0], self.const(0)
            return self.XOR(live[0], live[1]), self.AND(live[0], live[1])
        cout = self.MAJ(a, c, d)
        nc = self.NOT(cout)
        return self.MAJ(a, c, d, nc, nc), cout


# vectors -------------------------------------------------------------------

def sext(xs: Bits, n: int) -> Bits:
    return list(xs[:n]) + [xs[-1]] * (n - len(xs))


def zext(g: Gates, xs: Bits, n: int) -> Bits:
    return list(xs[:n]) + [g.const(0)] * (n - len(xs))


def mux_vec(g: Gates, s: int, xs: Bits, ys: Bits) -> Bits:
    """``ys`` if ``s`` else ``xs``."""
    return [g.MUX(s, a, c) for a, c in zip(xs, ys)]


def and_vec(g: Gates, xs: Bits, s: int) -> Bits:
    return [g.AND(x, s) for x in xs]


def any_bit(g: Gates, xs: Sequence[int]) -> int:
    return g.OR(*xs) if len(xs) else g.const(0)


def add(g: Gates, xs: Bits, ys: Bits, cin: int | None = None) -> Bits:
    """``xs + ys (+ cin)`` modulo ``2**n`` with a parallel-prefix carry network."""
    n = len(xs)
    assert len(ys) == n
    gen = [g.AND(a, c) for a, c in zip(xs, ys)]
    prop = [g.XOR(a, c) for a, c in zip(xs, ys)]
    if cin is not None and g.value(cin) != 0:
        gen[0] = g.OR(gen[0], g.AND(prop[0], cin))
    G, P = list(gen), list(prop)
    k = 1
    while k < n:
        G2, P2 = list(G), list(P)
        for i in range(k, n):
            G2[i] = g.OR(G[i], g.AND(P[i], G[i - k]))
            P2[i] = g.AND(P[i], P[i - k])
        G, P = G2, P2
        k *= 2
    c0 = g.const(0) if cin is None else cin
    carries = [c0] + G[:-1]
    return [g.XOR(pp, c) for pp, c in zip(prop, carries)]


def add_const(g: Gates, xs: Bits, value: int) -> Bits:
    return add(g, xs, g.const_bits(value, len(xs)))


def cond_neg(g: Gates, xs: Bits, s: int) -> Bits:
    """``-xs`` if ``s`` else ``xs`` (two's complement, same width)."""
    return add(g, [g.XOR(x, s) for x in xs], [g.const(0)] * len(xs), cin=s)


def sub(g: Gates, xs: Bits, ys: Bits) -> Bits:
    return add(g, xs, [g.NOT(y) for y in ys], cin=g.const(1))


def signed_lt_const(g: Gates, xs: Bits, c: int) -> int:
    """``xs < c`` for signed ``xs``; needs two bits of headroom over both values."""
    return add_const(g, xs, -c)[-1]


def eq_const(g: Gates, xs: Bits, c: int) -> int:
    u = c & ((1 << len(xs)) - 1)
    return g.AND(*[x if (u >> i) & 1 else g.NOT(x) for i, x in enumerate(xs)])


def unsigned_ge_const(g: Gates, xs: Bits, c: int) -> int:
    n = len(xs)
    if c <= 0:
        return g.const(1)
    if c >= 1 << n:
        return g.const(0)
    return g.NOT(signed_lt_const(g, zext(g, xs, n + 2), c))


def shift_left(g: Gates, xs: Bits, amount: Bits, n: int) -> Bits:
    """``xs << amount`` truncated to ``n`` bits; ``amount`` is unsigned."""
    cur = zext(g, xs, n)
    zero = g.const(0)
    for k, s in enumerate(amount):
        step = 1 << k
        if step >= n:
            cur = [g.AND(g.NOT(s), x) for x in cur]
            continue
        shifted = [zero] * step + cur[:n - step]
        cur = mux_vec(g, s, cur, shifted)
    return cur


def suffix_or(g: Gates, xs: Bits) -> Bits:
    """``out[i] = OR(xs[i:])`` with a doubling scan."""
    n = len(xs)
    cur = list(xs)
    k = 1
    while k < n:
        cur = [g.OR(cur[i], cur[i + k]) if i + k < n else cur[i] for i in range(n)]
        k *= 2
    return cur


def multi_add(g: Gates, rows: list[Bits], n: int) -> Bits:
    """Sum of bit vectors modulo ``2**n``: carry-save reduction then one adder."""
    rows = [zext(g, r, n) if len(r) < n else list(r[:n]) for r in rows]
    if not rows:
        return [g.const(0)] * n
    while len(rows) > 2:
        nxt = []
        for i in range(0, len(rows) - 2, 3):
            a, c, d = rows[i], rows[i + 1], rows[i + 2]
            s_row, c_row = [], [g.const(0)]
            for j in range(n):
                s, cy = g.full_adder(a[j], c[j], d[j])
                s_row.append(s)
                c_row.append(cy)
            nxt.append(s_row)
            nxt.append(c_row[:n])
        nxt.extend(rows[len(rows) - len(rows) % 3:])
        rows = nxt
    if len(rows) == 1:
        return rows[0]
    return add(g, rows[0], rows[1])


def multiply_unsigned(g: Gates, xs: Bits, ys: Bits) -> Bits:
    n = len(xs) + len(ys)
    zero = g.const(0)
    rows = [[zero] * i + [g.AND(x, y) for x in xs] for i, y in enumerate(ys)]
    return multi_add(g, rows, n)
