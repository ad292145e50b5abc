"""Dense immutable matrices of FpNum plus the plain-text fixture format.

Fixture format::

    2 3 10
    512:-9 0:0 -640:-9
    ...

The first line is ``rows cols p``; every further token is an ``m:e`` pair in
row-major order (line breaks are not significant).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence, Union

from .number import FpNum, round_p

__all__ = ["FpMatrix", "parse_fixture", "format_fixture", "load_fixture"]


@dataclass(frozen=True)
class FpMatrix:
    rows: int
    cols: int
    entries: tuple[FpNum, ...]
    p: int

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative shape")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix")
        for x in self.entries:
            if x.p != self.p:
                raise ValueError(f"entry precision {x.p} != matrix precision {self.p}")

    # construction ---------------------------------------------------------
    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[FpNum]], p: int | None = None) -> "FpMatrix":
        r = len(rows)
        c = len(rows[0]) if r else 0
        if any(len(row) != c for row in rows):
            raise ValueError("ragged rows")
        flat = tuple(x for row in rows for x in row)
        if p is None:
            if not flat:
                raise ValueError("precision required for an empty matrix")
            p = flat[0].p
        return cls(r, c, flat, p)

    @classmethod
    def from_values(cls, values: Sequence[Sequence[Union[int, float, Fraction]]],
                    p: int) -> "FpMatrix":
        """Round a nested list of reals entrywise."""
        return cls.from_rows([[round_p(v, p) for v in row] for row in values], p)

    @classmethod
    def build(cls, rows: int, cols: int, p: int,
              fn: Callable[[int, int], FpNum]) -> "FpMatrix":
        return cls(rows, cols, tuple(fn(i, j) for i in range(rows) for j in range(cols)), p)

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int) -> "FpMatrix":
        z = FpNum.zero(p)
        return cls(rows, cols, (z,) * (rows * cols), p)

    @classmethod
    def identity(cls, n: int, p: int) -> "FpMatrix":
        one, z = FpNum.one(p), FpNum.zero(p)
        return cls.build(n, n, p, lambda i, j: one if i == j else z)

    @classmethod
    def scalar(cls, x: FpNum) -> "FpMatrix":
        return cls(1, 1, (x,), x.p)

    @classmethod
    def column(cls, xs: Sequence[FpNum]) -> "FpMatrix":
        return cls(len(xs), 1, tuple(xs), xs[0].p)

    # access ---------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij: tuple[int, int]) -> FpNum:
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(ij)
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[FpNum, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> tuple[FpNum, ...]:
        return self.entries[j::self.cols] if self.cols else ()

    def iter_rows(self) -> Iterator[tuple[FpNum, ...]]:
        for i in range(self.rows):
            yield self.row(i)

    def transpose(self) -> "FpMatrix":
        return FpMatrix.build(self.cols, self.rows, self.p, lambda i, j: self[j, i])

    @property
    def T(self) -> "FpMatrix":
        return self.transpose()

    def map(self, fn: Callable[[FpNum], FpNum]) -> "FpMatrix":
        return FpMatrix(self.rows, self.cols, tuple(fn(x) for x in self.entries), self.p)

    def to_floats(self) -> list[list[float]]:
        return [[float(x) for x in row] for row in self.iter_rows()]

    def to_fractions(self) -> list[list[Fraction]]:
        return [[x.value for x in row] for row in self.iter_rows()]

    def select_rows(self, order: Iterable[int]) -> "FpMatrix":
        return FpMatrix.from_rows([self.row(i) for i in order], self.p)

    def __str__(self) -> str:
        return format_fixture(self)


def format_fixture(mat: FpMatrix) -> str:
    lines = [f"{mat.rows} {mat.cols} {mat.p}"]
    for row in mat.iter_rows():
        lines.append(" ".join(f"{x.m}:{x.e}" for x in row))
    return "\n".join(lines) + "\n"


def parse_fixture(text: str) -> FpMatrix:
    tokens = text.split()
    if len(tokens) < 3:
        raise ValueError("fixture needs a 'rows cols p' header")
    rows, cols, p = (int(t) for t in tokens[:3])
    body = tokens[3:]
    if len(body) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, found {len(body)}")
    entries = []
    for tok in body:
        m, sep, e = tok.partition(":")
        if not sep:
            raise ValueError(f"bad entry {tok!r}, expected m:e")
        entries.append(FpNum(int(m), int(e), p))
    return FpMatrix(rows, cols, tuple(entries), p)


def load_fixture(path: Union[str, Path]) -> FpMatrix:
    return parse_fixture(Path(path).read_text())
