"""Fixed bit layout for p-bit floats inside circuits.

``width(p) = 2 * (p + 1)`` bits, least significant first: the significand as
a (p+1)-bit two's complement integer, followed by the exponent as a (p+1)-bit
two's complement integer.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .fp import FpMatrix, FpNum

__all__ = ["width", "encode", "decode", "encode_many", "decode_many",
           "encode_matrices", "to_twos", "from_twos"]


def width(p: int) -> int:
    return 2 * (p + 1)


def to_twos(value: int, nbits: int) -> list[int]:
    if not -(1 << (nbits - 1)) <= value < (1 << (nbits - 1)):
        raise ValueError(f"{value} does not fit in {nbits} bits")
    u = value & ((1 << nbits) - 1)
    return [(u >> i) & 1 for i in range(nbits)]


def from_twos(bits: Sequence[int]) -> int:
    u = 0
    for i, b in enumerate(bits):
        u |= (int(b) & 1) << i
    n = len(bits)
    return u - (1 << n) if bits[n - 1] else u


def encode(x: FpNum) -> list[int]:
    return to_twos(x.m, x.p + 1) + to_twos(x.e, x.p + 1)


def decode(bits: Sequence[int], p: int) -> FpNum:
    """Inverse of :func:`encode`; non-normalized patterns raise ValueError."""
    if len(bits) != width(p):
        raise ValueError(f"expected {width(p)} bits, got {len(bits)}")
    m = from_twos(bits[:p + 1])
    e = from_twos(bits[p + 1:])
    return FpNum(m, e, p)


def encode_many(xs: Iterable[FpNum]) -> np.ndarray:
    return np.array([b for x in xs for b in encode(x)], dtype=np.uint8)


def decode_many(bits: Sequence[int], p: int) -> list[FpNum]:
    w = width(p)
    if len(bits) % w:
        raise ValueError("bit count is not a multiple of the encoding width")
    return [decode(bits[i:i + w], p) for i in range(0, len(bits), w)]


def encode_matrices(mats: Iterable[FpMatrix]) -> np.ndarray:
    parts = [encode_many(m.entries) for m in mats]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint8)
