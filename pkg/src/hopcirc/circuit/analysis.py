"""Validation, evaluation and depth measurement of circuits."""
from __future__ import annotations

from dataclasses import dataclass, field
from types import ModuleType
from typing import Optional, Sequence

import numpy as np

from . import _pykernels, backend
from .depth import BASIS, DepthExpr
from .ir import Circuit, Kind

__all__ = ["validate", "evaluate", "evaluate_batch", "evaluate_full", "measure",
           "Measurement", "CircuitError"]


class CircuitError(ValueError):
    pass


def validate(c: Circuit, strict_regions: bool = False) -> list[str]:
    """List structural violations; an empty list means the circuit is valid.

    With ``strict_regions`` every logic, macro and projection gate must also
    belong to a region. Never raises.
    """
    out: list[str] = []
    try:
        _validate(c, strict_regions, out)
    except Exception as exc:  # malformed arrays
        out.append(f"malformed circuit: {exc}")
    return out


def _validate(c: Circuit, strict_regions: bool, out: list[str]) -> None:
    G = c.size
    if len(c.ptr) != G + 1 or (G + 1 and c.ptr[0] != 0):
        out.append("structure: ptr array does not match gate count")
        return
    counts = np.diff(c.ptr)
    if (counts < 0).any() or c.ptr[-1] != len(c.idx):
        out.append("structure: ptr array is not monotone")
        return
    owner = np.repeat(np.arange(G), counts)
    bad = np.flatnonzero((c.idx >= owner) | (c.idx < 0))
    for j in bad[:20]:
        out.append(f"order: gate {owner[j]} references gate {c.idx[j]} (cycle or forward edge)")
    kinds = c.kind
    valid_kind = (kinds >= 0) & (kinds <= int(Kind.PROJ))
    for g in np.flatnonzero(~valid_kind)[:20]:
        out.append(f"kind: gate {g} has unknown kind {kinds[g]}")
    src = np.isin(kinds, [Kind.INPUT, Kind.CONST0, Kind.CONST1])
    for g in np.flatnonzero(src & (counts != 0))[:20]:
        out.append(f"arity: source gate {g} has fan-in {counts[g]}")
    for g in np.flatnonzero((kinds == Kind.NOT) & (counts != 1))[:20]:
        out.append(f"arity: NOT gate {g} has fan-in {counts[g]}")
    logic = np.isin(kinds, [Kind.AND, Kind.OR, Kind.MAJ])
    for g in np.flatnonzero(logic & (counts < 1))[:20]:
        out.append(f"arity: gate {g} has empty fan-in")
    for g in np.flatnonzero(kinds == Kind.MACRO):
        i = int(c.param[g])
        if not 0 <= i < len(c.macros):
            out.append(f"macro: gate {g} references unknown macro {i}")
            continue
        spec = c.macros[i]
        if counts[g] != spec.n_operands * c.width:
            out.append(f"width: macro gate {g} ({spec.tag}) has fan-in {counts[g]}, "
                       f"expected {spec.n_operands * c.width}")
    for g in np.flatnonzero(kinds == Kind.PROJ):
        if counts[g] != 1:
            out.append(f"arity: projection gate {g} has fan-in {counts[g]}")
            continue
        src_g = int(c.idx[c.ptr[g]])
        if not 0 <= src_g < G or c.kind[src_g] != Kind.MACRO:
            out.append(f"width: projection gate {g} does not read a macro gate")
            continue
        i = int(c.param[src_g])
        if 0 <= i < len(c.macros) and not 0 <= c.param[g] < c.macros[i].out_width:
            out.append(f"width: projection gate {g} reads bit {c.param[g]} out of range")
    for pos, g in enumerate(c.inputs):
        if not 0 <= g < G or kinds[g] != Kind.INPUT:
            out.append(f"inputs: entry {pos} ({g}) is not an input gate")
    n_input_gates = int((kinds == Kind.INPUT).sum())
    if n_input_gates != len(set(c.inputs.tolist())):
        out.append("inputs: input gates and the input list disagree")
    for pos, g in enumerate(c.outputs):
        if not 0 <= g < G:
            out.append(f"outputs: entry {pos} references missing gate {g}")
    R = len(c.regions)
    bad_r = np.flatnonzero((c.region < -1) | (c.region >= R))
    for g in bad_r[:20]:
        out.append(f"region: gate {g} has unknown region {c.region[g]}")
    for r, reg in enumerate(c.regions):
        if not -1 <= reg.group < len(c.groups):
            out.append(f"region: region {r} has unknown group {reg.group}")
    if strict_regions:
        need = np.isin(kinds, [Kind.NOT, Kind.AND, Kind.OR, Kind.MAJ, Kind.MACRO, Kind.PROJ])
        unmarked = np.flatnonzero(need & (c.region < 0))
        if len(unmarked):
            out.append(f"unmarked: {len(unmarked)} gates outside any scalar-op region "
                       f"(first {unmarked[0]})")


# evaluation ---------------------------------------------------------------

def _call(mod: ModuleType, name: str, c: Circuit, *args):
    fn = getattr(mod, name)
    if mod is _pykernels:
        return fn(*args, cache=c._cache)
    return fn(*args)


def evaluate_batch(c: Circuit, input_bits, kernels: Optional[ModuleType] = None) -> np.ndarray:
    """Evaluate on a ``(batch, n_inputs)`` bit array; returns ``(batch, n_outputs)``."""
    mod = backend.kernels if kernels is None else kernels
    bits = np.ascontiguousarray(input_bits, dtype=np.uint8)
    if bits.ndim != 2 or bits.shape[1] != len(c.inputs):
        raise CircuitError(f"expected input bits of shape (batch, {len(c.inputs)}), "
                           f"got {bits.shape}")
    off, total = c.macro_offsets()
    return _call(mod, "evaluate_batch", c, c.kind, c.ptr, c.idx, c.param, off, total,
                 c.inputs, bits, c.outputs, c.macro_callback())


def evaluate(c: Circuit, input_bits, kernels: Optional[ModuleType] = None) -> np.ndarray:
    bits = np.asarray(input_bits, dtype=np.uint8)
    if bits.ndim != 1 or len(bits) != len(c.inputs):
        raise CircuitError(f"expected {len(c.inputs)} input bits, got {bits.shape}")
    return evaluate_batch(c, bits[None, :], kernels)[0]


def evaluate_full(c: Circuit, input_bits, kernels: Optional[ModuleType] = None):
    """Values of every gate for one input vector, plus the macro output buffer."""
    mod = backend.kernels if kernels is None else kernels
    bits = np.ascontiguousarray(input_bits, dtype=np.uint8)
    if bits.shape != (len(c.inputs),):
        raise CircuitError(f"expected {len(c.inputs)} input bits, got {bits.shape}")
    off, total = c.macro_offsets()
    return _call(mod, "evaluate_full", c, c.kind, c.ptr, c.idx, c.param, off, total,
                 c.inputs, bits, c.macro_callback())


# measurement --------------------------------------------------------------

@dataclass
class Measurement:
    size: int
    concrete_depth: int
    symbolic_depth: DepthExpr
    # True when one path attains every coefficient of symbolic_depth at once;
    # otherwise symbolic_depth is the coefficientwise max over paths.
    dominant: bool = True
    critical_path: list[int] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)


def _units(c: Circuit, expand_groups: bool) -> tuple[np.ndarray, list[DepthExpr]]:
    """Map each gate to a charging unit (region, or its group) and the unit charges."""
    R = len(c.regions)
    charges = [r.charge for r in c.regions] + [g.charge for g in c.groups]
    if expand_groups or not c.groups:
        return c.region, charges
    remap = np.arange(R, dtype=np.int64)
    for r, reg in enumerate(c.regions):
        if reg.group >= 0:
            remap[r] = R + reg.group
    unit = np.where(c.region >= 0, remap[np.maximum(c.region, 0)] if R else -1, -1)
    return unit.astype(np.int64), charges


def _trace(pred: np.ndarray, end: int) -> list[int]:
    path = [end]
    while pred[path[-1]] >= 0:
        path.append(int(pred[path[-1]]))
    path.reverse()
    return path


def _path_expr(path: Sequence[int], unit: np.ndarray, charges: list[DepthExpr]) -> DepthExpr:
    total = DepthExpr()
    prev = -1
    for g in path:
        u = int(unit[g])
        if u >= 0 and u != prev:
            total = total + charges[u]
        prev = u
    return total


def measure(c: Circuit, expand_groups: bool = False, strict: bool = True,
            kernels: Optional[ModuleType] = None) -> Measurement:
    """Size, concrete depth and symbolic depth of ``c``.

    Symbolic depth charges a region's constant each time a path enters it, so
    a contiguous run of gates implementing one scalar operation counts once.
    Groups (e.g. a component function) replace the regions inside them unless
    ``expand_groups``. Concrete depth counts NOT/AND/OR/MAJ gates; sources,
    macro and projection gates count 0.
    """
    mod = backend.kernels if kernels is None else kernels
    violations = validate(c, strict_regions=strict)
    if any(not v.startswith("unmarked") for v in violations):
        raise CircuitError("; ".join(violations[:5]))
    if strict and violations:
        raise CircuitError(violations[0])
    if c.size == 0 or len(c.outputs) == 0:
        return Measurement(c.size, 0, DepthExpr(), True, [], violations)
    cd = mod.concrete_depth(c.kind, c.ptr, c.idx)
    concrete = int(cd[c.outputs].max())
    unit, charges = _units(c, expand_groups)
    if not charges:
        return Measurement(c.size, concrete, DepthExpr(), True, [], violations)
    mat = np.array([ch.coeffs for ch in charges], dtype=np.float64)
    # per-coordinate maxima give the coefficientwise join over all paths
    join = [0] * len(BASIS)
    for i in range(len(BASIS)):
        if not mat[:, i].any():
            continue
        val, _ = mod.longest_path(c.kind, c.ptr, c.idx, unit, np.ascontiguousarray(mat[:, i]))
        join[i] = int(round(val[c.outputs].max()))
    join_expr = DepthExpr(tuple(join))
    # a generic weighting picks one concrete deepest path
    generic = np.array([1.0, 1.0 + 1 / 7, 1.0 + 2 / 7, 1.0 + 3 / 11, 1.0 + 5 / 13,
                        1.0 + 1 / 17, 0.5])
    val, pred = mod.longest_path(c.kind, c.ptr, c.idx, unit, mat @ generic)
    end = int(c.outputs[np.argmax(val[c.outputs])])
    path = _trace(pred, end)
    expr = _path_expr(path, unit, charges)
    dominant = expr == join_expr
    return Measurement(c.size, concrete, join_expr, dominant, path, violations)
