"""Random instance builders shared by the tests."""
from __future__ import annotations

import random

from hopcirc.fp import FpMatrix, FpNum


def rand_num(rng: random.Random, p: int, lo: int = -3, hi: int = 0, positive: bool = False) -> FpNum:
    """Nonzero value with magnitude in [2**lo, 2**(hi+1))."""
    m = rng.randrange(1 << (p - 1), 1 << p)
    if not positive and rng.random() < 0.5:
        m = -m
    return FpNum(m, rng.randint(lo, hi) - (p - 1), p)


def rand_matrix(rng: random.Random, rows: int, cols: int, p: int, lo: int = -3, hi: int = 0,
                zeros: float = 0.0) -> FpMatrix:
    vals = [FpNum.zero(p) if rng.random() < zeros else rand_num(rng, p, lo, hi)
            for _ in range(rows * cols)]
    return FpMatrix(rows, cols, tuple(vals), p)


def rand_beta(rng: random.Random, p: int) -> FpNum:
    return rand_num(rng, p, -1, 1, positive=True)
