"""Circuit-versus-reference equivalence checks with divergence localization."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .. import encoding
from ..circuit.analysis import evaluate_batch, evaluate_full
from ..circuit.depth import DepthExpr
from ..circuit.ir import Kind
from ..fp import (FpMatrix, FpNum, fp_add, fp_cmp, fp_div, fp_exp, fp_mul, fp_sqrt,
                  iter_add, iter_mul, relu_scalar)
from .formulas import paper_depth_formula
from .network import Instance, LoweredArtifact
from .reference import reference_forward
from .scalar import SCALAR_KINDS, max_concrete_p, scalar_template

__all__ = ["VerifyReport", "Divergence", "verify_equivalence", "encode_inputs",
           "decode_output", "run_artifact", "check_instance"]


@dataclass
class Divergence:
    case: int
    gate: int
    op: str
    region: int
    detail: str


@dataclass
class VerifyReport:
    cases: int = 0
    agreed: int = 0
    errors: list[str] = field(default_factory=list)
    divergence: Optional[Divergence] = None
    measured_depth: Optional[DepthExpr] = None
    formula_depth: Optional[DepthExpr] = None

    @property
    def bit_exact(self) -> bool:
        return self.cases > 0 and self.agreed == self.cases and not self.errors

    @property
    def depth_matches(self) -> Optional[bool]:
        if self.formula_depth is None or self.measured_depth is None:
            return None
        return self.measured_depth == self.formula_depth

    @property
    def ok(self) -> bool:
        return self.bit_exact and self.depth_matches is not False

    def summary(self) -> str:
        lines = [f"cases: {self.cases}, bit-exact: {self.agreed}/{self.cases}"]
        if self.measured_depth is not None:
            lines.append(f"measured depth: {self.measured_depth}")
        if self.formula_depth is not None:
            verdict = "match" if self.depth_matches else "MISMATCH"
            lines.append(f"formula depth:  {self.formula_depth} ({verdict})")
        if self.divergence is not None:
            dv = self.divergence
            lines.append(f"first divergence: case {dv.case}, gate {dv.gate} "
                         f"({dv.op}, region {dv.region}): {dv.detail}")
        lines.extend(f"error: {e}" for e in self.errors)
        return "\n".join(lines)


def encode_inputs(artifact: LoweredArtifact, mats: Sequence[FpMatrix]) -> np.ndarray:
    if len(mats) != len(artifact.layout):
        raise ValueError(f"expected {len(artifact.layout)} input matrices, got {len(mats)}")
    for (name, r, c), m in zip(artifact.layout, mats):
        if m.shape != (r, c):
            raise ValueError(f"input {name} must be {r}x{c}, got {m.shape}")
        if m.p != artifact.p:
            raise ValueError(f"input {name} has precision {m.p}, expected {artifact.p}")
    return encoding.encode_matrices(mats)


def decode_output(artifact: LoweredArtifact, bits) -> FpMatrix:
    r, c = artifact.out_shape
    vals = encoding.decode_many([int(b) for b in bits], artifact.p)
    return FpMatrix(r, c, tuple(vals), artifact.p)


def run_artifact(artifact: LoweredArtifact, cases: Sequence[Sequence[FpMatrix]]) -> list[FpMatrix]:
    bits = np.stack([encode_inputs(artifact, mats) for mats in cases])
    out = evaluate_batch(artifact.circuit, bits)
    return [decode_output(artifact, row) for row in out]


def _reference_op(op: str, xs: list[FpNum], p: int):
    if op == "add":
        return fp_add(xs[0], xs[1])
    if op == "mul":
        return fp_mul(xs[0], xs[1])
    if op == "div":
        return fp_div(xs[0], xs[1])
    if op == "exp":
        return fp_exp(xs[0])
    if op == "sqrt":
        return fp_sqrt(xs[0])
    if op == "iter_add":
        return iter_add(xs, p)
    if op == "iter_mul":
        return iter_mul(xs, p)
    if op == "relu":
        return relu_scalar(xs[0])
    if op == "id":
        return xs[0]
    if op == "cmp":
        return int(fp_cmp(xs[0], xs[1]))
    raise ValueError(f"unknown op {op!r}")


def check_instance(inst: Instance, values: np.ndarray, p: int) -> Optional[tuple[int, str]]:
    """Recompute one operation from gate values; return (gate, detail) on mismatch."""
    try:
        xs = [encoding.decode([int(values[g]) for g in opnd], p) for opnd in inst.operands]
    except ValueError as exc:
        return (inst.operands[0][0], f"operand is not a valid encoding ({exc})")
    want = _reference_op(inst.op, xs, p)
    if inst.op == "cmp":
        want_bits = [int(want < 0), int(want == 0), int(want > 0)]
    else:
        want_bits = encoding.encode(want)
    got = [int(values[g]) for g in inst.outputs]
    for g, a, b in zip(inst.outputs, got, want_bits):
        if a != b:
            return g, f"{inst.op}({', '.join(map(str, xs))}) gave bits {got}, expected {want}"
    return None


def _first_bad_gate(artifact: LoweredArtifact, inst: Instance, values: np.ndarray) -> Optional[int]:
    """Earliest gate of a concrete instance whose value differs from a clean replay."""
    c = artifact.circuit
    if inst.op not in SCALAR_KINDS or c.p > max_concrete_p():
        return None
    region_gates = np.flatnonzero(c.region == inst.region)
    if (c.kind[region_gates] == Kind.MACRO).any():
        return None
    n = len(inst.operands) if inst.op == "iter_add" else 2
    tmpl = scalar_template(inst.op, c.p, n)
    k = len(tmpl.inputs)
    body = region_gates[-(tmpl.size - k):] if tmpl.size > k else region_gates[:0]
    operand_bits = np.array([values[g] for opnd in inst.operands for g in opnd], dtype=np.uint8)
    clean, _ = evaluate_full(tmpl, operand_bits)
    diff = np.flatnonzero(values[body] != clean[k:])
    return int(body[diff[0]]) if len(diff) else None


def _localize(artifact: LoweredArtifact, bits: np.ndarray, case: int) -> Divergence:
    values, _ = evaluate_full(artifact.circuit, bits)
    for inst in artifact.instances:
        hit = check_instance(inst, values, artifact.p)
        if hit is not None:
            gate = _first_bad_gate(artifact, inst, values)
            return Divergence(case, hit[0] if gate is None else gate, inst.op,
                              inst.region, hit[1])
    return Divergence(case, -1, "wiring", -1,
                      "every operation is locally correct; outputs are miswired")


def verify_equivalence(artifact: LoweredArtifact, cases: Sequence[Sequence[FpMatrix]],
                       m: Optional[int] = None) -> VerifyReport:
    """Evaluate the circuit and the reference on each input case and compare.

    Never raises: problems end up in the report.
    """
    rep = VerifyReport()
    try:
        rep.measured_depth = artifact.depth
    except Exception as exc:
        rep.errors.append(f"measure failed: {exc}")
    if artifact.shape is not None:
        try:
            rep.formula_depth = paper_depth_formula(
                artifact.construct, artifact.shape.m if m is None else m)
        except ValueError:
            pass
    for k, mats in enumerate(cases):
        rep.cases += 1
        try:
            bits = encode_inputs(artifact, mats)
            want = _expected_bits(artifact, mats)
        except Exception as exc:
            rep.errors.append(f"case {k}: reference failed: {exc}")
            continue
        try:
            got = evaluate_batch(artifact.circuit, bits[None, :])[0]
        except Exception as exc:
            rep.errors.append(f"case {k}: circuit evaluation failed: {exc}")
            continue
        if np.array_equal(got, want):
            rep.agreed += 1
        elif rep.divergence is None:
            rep.divergence = _localize(artifact, bits, k)
    return rep


def _expected_bits(artifact: LoweredArtifact, mats: Sequence[FpMatrix]) -> np.ndarray:
    if artifact.shape is not None:
        return encoding.encode_many(reference_forward(artifact.shape, mats).entries)
    # single scalar operation
    if len(artifact.instances) != 1:
        raise ValueError("artifact has neither a network shape nor a single operation")
    op = artifact.instances[0].op
    res = _reference_op(op, [m.entries[0] for m in mats], artifact.p)
    if op == "cmp":
        return np.array([res < 0, res == 0, res > 0], dtype=np.uint8)
    return np.array(encoding.encode(res), dtype=np.uint8)
