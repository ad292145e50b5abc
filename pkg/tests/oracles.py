"""Independent reference implementations used only by the tests.

Nothing here calls the package's rounding, exp, sqrt or matmul code; values
are found by enumeration, exact rational arithmetic, or mpmath at high
precision.
"""
from __future__ import annotations

import bisect
from fractions import Fraction
from functools import lru_cache

import mpmath


@lru_cache(maxsize=None)
def grid(p: int) -> tuple[list[Fraction], list[tuple[int, int]]]:
    """Every value of F_p in increasing order, with its (m, e) pair."""
    pairs = [(0, 0)]
    for e in range(-(1 << p), 1 << p):
        for m in range(1 << (p - 1), 1 << p):
            pairs.append((m, e))
            pairs.append((-m, e))
    vals = [Fraction(m) * Fraction(2) ** e for m, e in pairs]
    order = sorted(range(len(pairs)), key=vals.__getitem__)
    return [vals[i] for i in order], [pairs[i] for i in order]


def nearest(x: Fraction, p: int) -> tuple[int, int]:
    """Nearest F_p value by search over the enumerated grid.

    Ties go to the even significand; a tie between 0 and the smallest
    magnitude goes to 0. Values beyond the largest magnitude clamp to it.
    """
    vals, pairs = grid(p)
    i = bisect.bisect_left(vals, x)
    cands = [j for j in (i - 1, i) if 0 <= j < len(vals)]
    best = min(abs(vals[j] - x) for j in cands)
    tied = [j for j in cands if abs(vals[j] - x) == best]
    if len(tied) == 1:
        return pairs[tied[0]]
    for j in tied:
        if pairs[j][0] == 0:
            return pairs[j]
    even = [j for j in tied if pairs[j][0] % 2 == 0]
    return pairs[even[0]]


def value(m: int, e: int) -> Fraction:
    return Fraction(m) * Fraction(2) ** e


def mp_of(x) -> mpmath.mpf:
    v = x.value
    return mpmath.mpf(v.numerator) / v.denominator


def rel_err(got, exact) -> float:
    g = mp_of(got)
    if exact == 0:
        return float(abs(g))
    return float(abs(g - exact) / abs(exact))


def mp_matrix(M):
    return [[mp_of(x) for x in M.row(i)] for i in range(M.rows)]


def mp_matmul(A, B):
    return [[mpmath.fsum(A[i][k] * B[k][j] for k in range(len(B)))
             for j in range(len(B[0]))] for i in range(len(A))]


def mp_softmax_rows(S, beta):
    out = []
    for row in S:
        w = [mpmath.exp(beta * s) for s in row]
        t = mpmath.fsum(w)
        out.append([x / t for x in w])
    return out
