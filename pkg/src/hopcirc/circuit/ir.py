"""Threshold-circuit intermediate representation.

A circuit is a flat, topologically ordered gate list stored as numpy arrays:
``kind[g]``, the fan-in of ``g`` at ``idx[ptr[g]:ptr[g+1]]``, a per-gate
integer ``param`` and a ``region`` id (``-1`` for none).

Gate kinds:

* ``INPUT``, ``CONST0``, ``CONST1``: sources
* ``NOT`` (fan-in 1), ``AND``, ``OR``, ``MAJ`` (unbounded fan-in)
* ``MACRO``: an opaque multi-bit floating-point operation; ``param`` indexes
  ``Circuit.macros``. Its fan-in is the concatenated operand encodings.
* ``PROJ``: bit ``param`` of the MACRO gate it reads. Pure wiring.

``MAJ`` outputs 1 iff strictly more than half of its inputs are 1, so an even
fan-in tie gives 0.

Regions mark which gates implement one scalar operation. Each region carries
a symbolic depth charge; an optional group (e.g. a whole component function)
can stand in for all regions inside it when measuring.
"""
from __future__ import annotations

import enum
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .depth import DepthExpr

__all__ = [
    "Kind",
    "Gate",
    "MacroSpec",
    "Region",
    "Group",
    "Circuit",
    "Builder",
    "macro_semantics",
    "MACRO_TAGS",
]


class Kind(enum.IntEnum):
    INPUT = 0
    CONST0 = 1
    CONST1 = 2
    NOT = 3
    AND = 4
    OR = 5
    MAJ = 6
    MACRO = 7
    PROJ = 8


class Gate(NamedTuple):
    id: int
    kind: Kind
    fan_in: tuple[int, ...]
    param: int
    region: int


@dataclass(frozen=True)
class MacroSpec:
    """Macro gate signature: ``n_operands`` encoded floats in, ``out_width`` bits out."""

    tag: str
    n_operands: int
    out_width: int


@dataclass(frozen=True)
class Region:
    op: str
    charge: DepthExpr
    group: int = -1


@dataclass(frozen=True)
class Group:
    name: str
    charge: DepthExpr


def _cmp_bits(order: int) -> list[int]:
    return [int(order < 0), int(order == 0), int(order > 0)]


def macro_semantics(tag: str, p: int) -> Callable[[np.ndarray, int], np.ndarray]:
    """Bit-level semantics of a macro tag at precision ``p``.

    The returned function takes the concatenated operand bits and the operand
    count, and returns the output bits.
    """
    from .. import encoding
    from ..fp import (fp_add, fp_cmp, fp_div, fp_exp, fp_mul, fp_sqrt,
                      iter_add, iter_mul)

    unary = {"exp": fp_exp, "sqrt": fp_sqrt}
    binary = {"div": fp_div, "add": fp_add, "mul": fp_mul}
    nary = {"iter_mul": iter_mul, "iter_add": iter_add}

    def run(bits: np.ndarray, n: int) -> np.ndarray:
        xs = encoding.decode_many([int(b) for b in bits], p)
        if tag in unary:
            out = encoding.encode(unary[tag](xs[0]))
        elif tag in binary:
            out = encoding.encode(binary[tag](xs[0], xs[1]))
        elif tag in nary:
            out = encoding.encode(nary[tag](xs, p))
        elif tag == "cmp":
            out = _cmp_bits(int(fp_cmp(xs[0], xs[1])))
        else:
            raise ValueError(f"unknown macro tag {tag!r}")
        return np.asarray(out, dtype=np.uint8)

    return run


MACRO_TAGS = ("exp", "div", "sqrt", "iter_mul", "add", "mul", "cmp", "iter_add")


class Circuit:
    """Immutable gate DAG. Build with :class:`Builder`."""

    def __init__(self, kind: np.ndarray, ptr: np.ndarray, idx: np.ndarray,
                 param: np.ndarray, region: np.ndarray, inputs: Sequence[int],
                 outputs: Sequence[int], p: int,
                 macros: Sequence[MacroSpec] = (), regions: Sequence[Region] = (),
                 groups: Sequence[Group] = ()):
        self.kind = np.ascontiguousarray(kind, dtype=np.int8)
        self.ptr = np.ascontiguousarray(ptr, dtype=np.int64)
        self.idx = np.ascontiguousarray(idx, dtype=np.int64)
        self.param = np.ascontiguousarray(param, dtype=np.int64)
        self.region = np.ascontiguousarray(region, dtype=np.int64)
        self.inputs = np.ascontiguousarray(inputs, dtype=np.int64)
        self.outputs = np.ascontiguousarray(outputs, dtype=np.int64)
        self.p = p
        self.macros = tuple(macros)
        self.regions = tuple(regions)
        self.groups = tuple(groups)
        for arr in (self.kind, self.ptr, self.idx, self.param, self.region,
                    self.inputs, self.outputs):
            arr.flags.writeable = False
        self._cache: dict = {}

    @property
    def width(self) -> int:
        return 2 * (self.p + 1)

    @property
    def size(self) -> int:
        return len(self.kind)

    def __len__(self) -> int:
        return len(self.kind)

    def gate(self, g: int) -> Gate:
        lo, hi = self.ptr[g], self.ptr[g + 1]
        return Gate(g, Kind(int(self.kind[g])), tuple(int(i) for i in self.idx[lo:hi]),
                    int(self.param[g]), int(self.region[g]))

    def gates(self) -> Iterator[Gate]:
        for g in range(self.size):
            yield self.gate(g)

    def fan_in(self, g: int) -> np.ndarray:
        return self.idx[self.ptr[g]:self.ptr[g + 1]]

    def macro_offsets(self) -> tuple[np.ndarray, int]:
        """Offset of each MACRO gate's output bits in the auxiliary buffer."""
        if "aux" not in self._cache:
            off = np.full(self.size, -1, dtype=np.int64)
            total = 0
            for g in np.flatnonzero(self.kind == Kind.MACRO):
                off[g] = total
                total += self.macros[self.param[g]].out_width
            self._cache["aux"] = (off, total)
        return self._cache["aux"]

    def macro_callback(self) -> Callable[[int, np.ndarray], np.ndarray]:
        """``cb(macro_index, in_bits) -> out_bits`` for the evaluation kernels."""
        if "cb" not in self._cache:
            fns = [macro_semantics(m.tag, self.p) for m in self.macros]
            specs = self.macros

            def cb(i: int, bits: np.ndarray) -> np.ndarray:
                return fns[i](bits, specs[i].n_operands)

            self._cache["cb"] = cb
        return self._cache["cb"]

    def with_gate(self, g: int, kind: Optional[Kind] = None,
                  fan_in: Optional[Sequence[int]] = None) -> "Circuit":
        """Copy with one gate replaced (fault injection and tests)."""
        kinds = self.kind.copy()
        if kind is not None:
            kinds[g] = int(kind)
        if fan_in is None:
            return Circuit(kinds, self.ptr, self.idx, self.param, self.region,
                           self.inputs, self.outputs, self.p, self.macros,
                           self.regions, self.groups)
        lo, hi = int(self.ptr[g]), int(self.ptr[g + 1])
        idx = np.concatenate([self.idx[:lo], np.asarray(fan_in, dtype=np.int64),
                              self.idx[hi:]])
        counts = np.diff(self.ptr)
        counts[g] = len(fan_in)
        ptr = np.concatenate([[0], np.cumsum(counts)])
        return Circuit(kinds, ptr, idx, self.param, self.region, self.inputs,
                       self.outputs, self.p, self.macros, self.regions, self.groups)

    def __repr__(self) -> str:
        return (f"Circuit(size={self.size}, inputs={len(self.inputs)}, "
                f"outputs={len(self.outputs)}, p={self.p})")


class Builder:
    """Incremental circuit construction.

    Gates created inside ``with builder.in_region(r):`` are marked with ``r``.
    Whole concrete circuits can be stamped in with :meth:`instantiate`.
    """

    def __init__(self, p: int):
        self.p = p
        self.width = 2 * (p + 1)
        self.n = 0
        self._kind: list[int] = []
        self._count: list[int] = []
        self._idx: list[int] = []
        self._param: list[int] = []
        self._region: list[int] = []
        self._chunks: list[tuple[np.ndarray, ...]] = []
        self.inputs: list[int] = []
        self.macros: list[MacroSpec] = []
        self._macro_index: dict[MacroSpec, int] = {}
        self.regions: list[Region] = []
        self.groups: list[Group] = []
        self.current_region = -1
        self._consts: dict[tuple[int, int], int] = {}

    # regions -------------------------------------------------------------
    def new_group(self, name: str, charge: DepthExpr) -> int:
        self.groups.append(Group(name, charge))
        return len(self.groups) - 1

    def new_region(self, op: str, charge: DepthExpr, group: int = -1) -> int:
        self.regions.append(Region(op, charge, group))
        return len(self.regions) - 1

    @contextmanager
    def in_region(self, region: int):
        saved = self.current_region
        self.current_region = region
        try:
            yield region
        finally:
            self.current_region = saved

    # gates ---------------------------------------------------------------
    def _flush(self) -> None:
        if not self._kind:
            return
        self._chunks.append((
            np.array(self._kind, dtype=np.int8),
            np.array(self._count, dtype=np.int64),
            np.array(self._idx, dtype=np.int64),
            np.array(self._param, dtype=np.int64),
            np.array(self._region, dtype=np.int64),
        ))
        self._kind, self._count, self._idx, self._param, self._region = [], [], [], [], []

    def add(self, kind: Kind, fan_in: Sequence[int] = (), param: int = 0,
            region: Optional[int] = None) -> int:
        g = self.n
        for f in fan_in:
            if not 0 <= f < g:
                raise ValueError(f"gate {g} references {f}, which is not earlier")
        self._kind.append(int(kind))
        self._count.append(len(fan_in))
        self._idx.extend(fan_in)
        self._param.append(param)
        self._region.append(self.current_region if region is None else region)
        self.n += 1
        return g

    def input(self) -> int:
        g = self.add(Kind.INPUT, region=-1)
        self.inputs.append(g)
        return g

    def input_bits(self, n: int) -> list[int]:
        return [self.input() for _ in range(n)]

    def const(self, bit: int) -> int:
        key = (bit, self.current_region)
        if key not in self._consts:
            self._consts[key] = self.add(Kind.CONST1 if bit else Kind.CONST0)
        return self._consts[key]

    def NOT(self, a: int) -> int:
        return self.add(Kind.NOT, (a,))

    def AND(self, *xs: int) -> int:
        return self.add(Kind.AND, xs)

    def OR(self, *xs: int) -> int:
        return self.add(Kind.OR, xs)

    def MAJ(self, *xs: int) -> int:
        return self.add(Kind.MAJ, xs)

    def threshold(self, xs: Sequence[int], k: int) -> int:
        """1 iff at least ``k`` of ``xs`` are 1, as one padded MAJ gate."""
        n = len(xs)
        if k <= 0:
            return self.const(1)
        if k > n:
            return self.const(0)
        # MAJ over n + pad inputs fires iff 2*(ones + c1) > n + pad
        ones_pad = max(0, n + 1 - 2 * k)
        zeros_pad = max(0, 2 * k - n - 1)
        pad = [self.const(1)] * ones_pad + [self.const(0)] * zeros_pad
        return self.MAJ(*xs, *pad)

    def macro(self, tag: str, operands: Sequence[Sequence[int]], out_width: Optional[int] = None,
              region: Optional[int] = None) -> list[int]:
        """Add a MACRO gate over encoded operands; returns its PROJ output bits."""
        for op in operands:
            if len(op) != self.width:
                raise ValueError("macro operands must be full float encodings")
        spec = MacroSpec(tag, len(operands), self.width if out_width is None else out_width)
        if spec not in self._macro_index:
            self._macro_index[spec] = len(self.macros)
            self.macros.append(spec)
        flat = [b for op in operands for b in op]
        g = self.add(Kind.MACRO, flat, param=self._macro_index[spec], region=region)
        r = self.current_region if region is None else region
        return [self.add(Kind.PROJ, (g,), param=i, region=r) for i in range(spec.out_width)]

    def instantiate(self, template: Circuit, inputs: Sequence[int],
                    region: Optional[int] = None) -> list[int]:
        """Copy a concrete circuit in, wiring its inputs to ``inputs``."""
        k = len(template.inputs)
        if len(inputs) != k:
            raise ValueError(f"template takes {k} inputs, got {len(inputs)}")
        if not np.array_equal(template.inputs, np.arange(k)):
            raise ValueError("template inputs must be its first gates")
        if len(template.macros):
            raise ValueError("templates must be macro-free")
        self._flush()
        base = self.n
        inp = np.asarray(inputs, dtype=np.int64)
        body = slice(k, template.size)
        kinds = template.kind[body]
        counts = np.diff(template.ptr)[body]
        idx = template.idx[template.ptr[k]:]
        remapped = np.where(idx < k, inp[np.minimum(idx, k - 1)] if k else idx, idx - k + base)
        r = self.current_region if region is None else region
        n_body = template.size - k
        self._chunks.append((kinds.copy(), counts.copy(), remapped,
                             template.param[body].copy(),
                             np.full(n_body, r, dtype=np.int64)))
        self.n += n_body
        outs = template.outputs
        return [int(inp[o]) if o < k else int(o - k + base) for o in outs]

    def build(self, outputs: Sequence[int]) -> Circuit:
        self._flush()
        if self._chunks:
            kind, count, idx, param, region = (np.concatenate(parts)
                                               for parts in zip(*self._chunks))
        else:
            kind = np.zeros(0, np.int8)
            count = idx = param = region = np.zeros(0, np.int64)
        ptr = np.zeros(len(kind) + 1, dtype=np.int64)
        np.cumsum(count, out=ptr[1:])
        # keep the builder usable after build
        self._chunks = [(kind, count, idx, param, region)]
        return Circuit(kind, ptr, idx, param, region, self.inputs, outputs, self.p,
                       self.macros, self.regions, self.groups)
