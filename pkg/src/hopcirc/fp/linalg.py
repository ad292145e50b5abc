"""Matrix operations over FpNum.

Every inner product multiplies entrywise with one rounding per product and
then sums the products exactly with a single final rounding (``iter_add``),
so the summation order never matters.
"""
from __future__ import annotations

from typing import Optional, Sequence

import mpmath

from .matrix import FpMatrix
from .number import (FpFlags, FpNum, fp_add, fp_div, fp_mul, iter_add,
                     round_dyadic)
from .transcendental import fp_exp

__all__ = [
    "matmul",
    "mat_add",
    "softmax_rows",
    "softmax_cols",
    "relu",
    "relu_scalar",
    "lse",
    "dot",
]


def _require_positive(beta: FpNum) -> None:
    if beta.m <= 0:
        raise ValueError(f"beta must be > 0, got {float(beta)}")


def dot(xs: Sequence[FpNum], ys: Sequence[FpNum], p: int,
        flags: Optional[FpFlags] = None) -> FpNum:
    if len(xs) != len(ys):
        raise ValueError("length mismatch in dot product")
    return iter_add([fp_mul(x, y, flags) for x, y in zip(xs, ys)], p, flags)


def matmul(a: FpMatrix, b: FpMatrix, flags: Optional[FpFlags] = None) -> FpMatrix:
    if a.cols != b.rows:
        raise ValueError(f"shape mismatch: {a.shape} @ {b.shape}")
    if a.p != b.p:
        raise ValueError("precision mismatch")
    cols = [b.col(j) for j in range(b.cols)]
    entries = []
    for i in range(a.rows):
        row = a.row(i)
        entries.extend(dot(row, c, a.p, flags) for c in cols)
    return FpMatrix(a.rows, b.cols, tuple(entries), a.p)


def mat_add(a: FpMatrix, b: FpMatrix, flags: Optional[FpFlags] = None) -> FpMatrix:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} + {b.shape}")
    return FpMatrix(a.rows, a.cols,
                    tuple(fp_add(x, y, flags) for x, y in zip(a.entries, b.entries)), a.p)


def _normalize(values: Sequence[FpNum], p: int, flags: Optional[FpFlags]) -> list[FpNum]:
    total = iter_add(values, p, flags)
    if total.m == 0:
        raise ZeroDivisionError("softmax normalizer is zero (exp underflow)")
    return [fp_div(v, total, flags) for v in values]


def softmax_rows(mat: FpMatrix, beta: FpNum,
                 flags: Optional[FpFlags] = None) -> FpMatrix:
    """Row-wise softmax of ``beta * mat``, without max subtraction."""
    _require_positive(beta)
    out = []
    for row in mat.iter_rows():
        scores = [fp_exp(fp_mul(beta, x, flags), flags) for x in row]
        out.extend(_normalize(scores, mat.p, flags))
    return FpMatrix(mat.rows, mat.cols, tuple(out), mat.p)


def softmax_cols(mat: FpMatrix, beta: FpNum,
                 flags: Optional[FpFlags] = None) -> FpMatrix:
    return softmax_rows(mat.transpose(), beta, flags).transpose()


def relu_scalar(x: FpNum) -> FpNum:
    return FpNum.zero(x.p) if x.m < 0 else x


def relu(mat: FpMatrix) -> FpMatrix:
    return mat.map(relu_scalar)


def _to_mpf(x: FpNum) -> mpmath.mpf:
    return mpmath.ldexp(mpmath.mpf(x.m), x.e)


def lse(beta: FpNum, z: FpMatrix, flags: Optional[FpFlags] = None) -> FpNum:
    """``log(sum exp(beta*z)) / beta`` evaluated at extended precision, rounded once."""
    _require_positive(beta)
    if z.cols != 1 and z.rows != 1:
        raise ValueError("lse expects a vector")
    if not z.entries:
        raise ValueError("lse of an empty vector")
    p = z.p
    with mpmath.workprec(max(8 * p, 128)):
        b = _to_mpf(beta)
        terms = [b * _to_mpf(x) for x in z.entries]
        top = max(terms)
        # shifted for range only; the value is exact up to working precision
        s = mpmath.fsum(mpmath.exp(t - top) for t in terms)
        val = (top + mpmath.log(s)) / b
        # man_exp carries no sign
        man, exp = abs(val).man_exp if val != 0 else (0, 0)
        if val < 0:
            man = -man
    return round_dyadic(int(man), int(exp), p, flags)
