"""Lowering of scalar operations and whole network forward passes to circuits.

Every scalar operation becomes one region of the circuit carrying its
symbolic depth constant: concrete gate templates for add/mul/cmp/iter_add
(up to the concrete precision cap) and macro gates for exp, div, sqrt and
iterated multiplication. Networks are emitted in the same step order as the
reference forward pass, so evaluation is bit-identical.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

from ..circuit.analysis import Measurement, measure
from ..circuit.depth import D_ADD, D_EXP, D_MUL, D_SQRT, D_STD, ZERO, DepthExpr
from ..circuit.ir import Builder, Circuit
from .scalar import ConcreteLimitError, SCALAR_KINDS, max_concrete_p, scalar_template

__all__ = [
    "CONSTRUCTS",
    "Shape",
    "Instance",
    "LoweredArtifact",
    "Lowerer",
    "lower_scalar",
    "lower_macro",
    "lower_network",
    "OP_CHARGES",
]

CONSTRUCTS = ("matmul", "attn", "hop_layer", "fnn", "mhn", "kattn", "khop", "khn")

OP_CHARGES: dict[str, DepthExpr] = {
    "add": D_STD,
    "mul": D_STD,
    "cmp": D_STD,
    "relu": D_STD,
    "div": D_STD,
    "iter_add": D_ADD,
    "iter_mul": D_MUL,
    "exp": D_EXP,
    "sqrt": D_SQRT,
    "id": ZERO,
}
_MACRO_ONLY = ("exp", "div", "sqrt", "iter_mul")


@dataclass(frozen=True)
class Shape:
    """Which construct to lower and at what size.

    ``components`` lists ``"fnn"``/``"identity"`` for f_0..f_m of a
    multi-layer network; empty means all FNN.
    """

    construct: str
    n: int
    d: int
    p: int
    m: int = 1
    d_phi: Optional[int] = None
    normalization: str = "beta_rowsum"
    components: tuple[str, ...] = ()
    self_attention: bool = True

    def __post_init__(self) -> None:
        if self.construct not in CONSTRUCTS:
            raise ValueError(f"unknown construct {self.construct!r}")
        if self.n < 1 or self.d < 1 or self.m < 1:
            raise ValueError("n, d and m must be positive")
        if self.normalization not in ("softmax", "beta_rowsum"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        comps = tuple(self.components)
        if self.construct in ("mhn", "khn"):
            if not comps:
                comps = ("fnn",) * (self.m + 1)
            if len(comps) != self.m + 1:
                raise ValueError(f"need {self.m + 1} components, got {len(comps)}")
            for c in comps:
                if c not in ("fnn", "identity"):
                    raise ValueError(f"unknown component {c!r}")
        object.__setattr__(self, "components", comps)

    @property
    def kernel(self) -> bool:
        return self.construct in ("kattn", "khop", "khn")

    @property
    def dphi(self) -> int:
        return self.d if self.d_phi is None else self.d_phi

    def to_dict(self) -> dict:
        out = asdict(self)
        out["components"] = list(self.components)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Shape":
        data = dict(data)
        data["components"] = tuple(data.get("components", ()))
        return cls(**data)


@dataclass
class Instance:
    """One lowered scalar operation: its region and operand/result gate ids."""

    op: str
    region: int
    operands: list[list[int]]
    outputs: list[int]


@dataclass
class LoweredArtifact:
    circuit: Circuit
    construct: str
    layout: list[tuple[str, int, int]]
    out_shape: tuple[int, int]
    shape: Optional[Shape] = None
    instances: list[Instance] = field(default_factory=list)
    measurement: Optional[Measurement] = None

    @property
    def depth(self) -> DepthExpr:
        return self.measure().symbolic_depth

    def measure(self) -> Measurement:
        if self.measurement is None:
            self.measurement = measure(self.circuit)
        return self.measurement

    @property
    def p(self) -> int:
        return self.circuit.p

    def to_meta(self) -> dict:
        return {
            "construct": self.construct,
            "layout": [list(x) for x in self.layout],
            "out_shape": list(self.out_shape),
            "shape": None if self.shape is None else self.shape.to_dict(),
            "instances": [[i.op, i.region, i.operands, i.outputs] for i in self.instances],
        }

    @classmethod
    def from_meta(cls, circuit: Circuit, meta: dict) -> "LoweredArtifact":
        shape = meta.get("shape")
        return cls(
            circuit=circuit,
            construct=meta["construct"],
            layout=[(str(a), int(b), int(c)) for a, b, c in meta["layout"]],
            out_shape=tuple(meta["out_shape"]),
            shape=None if shape is None else Shape.from_dict(shape),
            instances=[Instance(op, r, ops, outs) for op, r, ops, outs in meta.get("instances", [])],
        )


class BitMatrix:
    """Matrix of encoded values; each entry is a list of gate ids."""

    def __init__(self, rows: int, cols: int, entries: list[list[int]]):
        assert len(entries) == rows * cols
        self.rows, self.cols, self.entries = rows, cols, entries

    def __getitem__(self, ij: tuple[int, int]) -> list[int]:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> list[list[int]]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    @property
    def T(self) -> "BitMatrix":
        return BitMatrix(self.cols, self.rows,
                         [self[i, j] for j in range(self.cols) for i in range(self.rows)])

    def bits(self) -> list[int]:
        return [b for e in self.entries for b in e]


class Lowerer:
    """Emits scalar operations into a builder, one region per operation."""

    def __init__(self, p: int, concrete: Optional[bool] = None):
        self.p = p
        self.b = Builder(p)
        self.concrete = p <= max_concrete_p() if concrete is None else concrete
        self.layout: list[tuple[str, int, int]] = []
        self.instances: list[Instance] = []
        self.group = -1

    # inputs ---------------------------------------------------------------
    def input_matrix(self, name: str, rows: int, cols: int) -> BitMatrix:
        self.layout.append((name, rows, cols))
        w = self.b.width
        return BitMatrix(rows, cols, [self.b.input_bits(w) for _ in range(rows * cols)])

    def input_scalar(self, name: str) -> list[int]:
        return self.input_matrix(name, 1, 1).entries[0]

    # scalar ops -----------------------------------------------------------
    def _region(self, op: str) -> int:
        return self.b.new_region(op, OP_CHARGES[op], self.group)

    def _guard(self, operands: list[list[int]], guard: Sequence[int]) -> list[list[int]]:
        """Make the operands depend on ``guard`` without changing their values."""
        b = self.b
        t = b.OR(*guard)
        one = b.OR(t, b.NOT(t))
        return [[b.AND(x, one) for x in opnd] for opnd in operands]

    def op(self, kind: str, operands: list[list[int]],
           guard: Optional[Sequence[int]] = None) -> list[int]:
        r = self._region(kind)
        with self.b.in_region(r):
            wired = self._guard(operands, guard) if guard is not None else operands
            if kind == "relu":
                sign = wired[0][self.p]
                keep = self.b.NOT(sign)
                out = [self.b.AND(x, keep) for x in wired[0]]
            elif kind == "id":
                out = [self.b.AND(x) for x in wired[0]]
            elif kind in SCALAR_KINDS and self.concrete:
                n = len(wired) if kind == "iter_add" else 2
                tmpl = scalar_template(kind, self.p, n)
                out = self.b.instantiate(tmpl, [x for opnd in wired for x in opnd])
            else:
                width = 3 if kind == "cmp" else None
                out = self.b.macro(kind, wired, out_width=width)
        self.instances.append(Instance(kind, r, [list(o) for o in operands], list(out)))
        return out

    # matrix ops -----------------------------------------------------------
    def matmul(self, A: BitMatrix, B: BitMatrix,
               guard_rows: Optional[Sequence[Sequence[int]]] = None) -> BitMatrix:
        """Entry (i, j): all products in parallel, then one iterated sum."""
        if A.cols != B.rows:
            raise ValueError(f"shape mismatch {A.rows}x{A.cols} @ {B.rows}x{B.cols}")
        out = []
        for i in range(A.rows):
            guard = None if guard_rows is None else guard_rows[i]
            for j in range(B.cols):
                prods = [self.op("mul", [A[i, k], B[k, j]], guard) for k in range(A.cols)]
                out.append(self.op("iter_add", prods))
        return BitMatrix(A.rows, B.cols, out)

    def emap(self, kind: str, M: BitMatrix, *extra: list[int],
             first: bool = True) -> BitMatrix:
        """Apply a scalar op entrywise; ``extra`` operands go before each entry
        when ``first`` else after."""
        ents = [self.op(kind, [*extra, e] if first else [e, *extra]) for e in M.entries]
        return BitMatrix(M.rows, M.cols, ents)

    def output(self, M: BitMatrix, construct: str, shape: Optional[Shape] = None) -> LoweredArtifact:
        c = self.b.build(M.bits())
        return LoweredArtifact(c, construct, list(self.layout), (M.rows, M.cols), shape,
                               self.instances)

    # network pieces -------------------------------------------------------
    def attention(self, R: BitMatrix, Y: BitMatrix, W_Q: BitMatrix, W_K: BitMatrix,
                  beta: list[int], W: Optional[BitMatrix] = None,
                  guard: Optional[Sequence[int]] = None) -> BitMatrix:
        """``exp(beta * scores)`` with the reference association order."""
        if W is None:
            first = self.matmul(W_Q, W_K.T, _rows(guard, W_Q.rows))
        else:
            gram = self.matmul(W.T, W, _rows(guard, W.cols))
            first = self.matmul(self.matmul(W_Q, gram), W_K.T)
        S = self.matmul(self.matmul(R, first), Y.T)
        scaled = self.emap("mul", S, beta)
        return self.emap("exp", scaled)

    def normalize(self, A: BitMatrix, Y: BitMatrix, W_V: BitMatrix, beta: list[int],
                  mode: str) -> BitMatrix:
        if mode == "softmax":
            ents = []
            for i in range(A.rows):
                row = A.row(i)
                total = self.op("iter_add", row)
                ents.extend(self.op("div", [a, total]) for a in row)
            P = BitMatrix(A.rows, A.cols, ents)
            return self.matmul(self.matmul(P, Y), W_V)
        diag = [self.op("mul", [beta, self.op("iter_add", A.row(i))]) for i in range(A.rows)]
        # the products wait for the normalizer of their row
        T = self.matmul(self.matmul(A, Y, guard_rows=diag), W_V)
        ents = [self.op("div", [T[i, j], diag[i]])
                for i in range(T.rows) for j in range(T.cols)]
        return BitMatrix(T.rows, T.cols, ents)

    def fnn(self, X: BitMatrix, W_1: BitMatrix, W_2: BitMatrix, b_1: BitMatrix,
            b_2: BitMatrix) -> BitMatrix:
        rows = []
        for i in range(X.rows):
            x = BitMatrix(X.cols, 1, X.row(i))
            h = self.matmul(W_1, x)
            # first bias as a two-term iterated sum, second as a plain add
            h = BitMatrix(h.rows, 1, [self.op("iter_add", [a, c])
                                      for a, c in zip(h.entries, b_1.entries)])
            h = self.emap("relu", h)
            y = self.matmul(W_2, h)
            rows.extend(self.op("add", [a, c]) for a, c in zip(y.entries, b_2.entries))
        return BitMatrix(X.rows, W_2.rows, rows)

    def identity(self, X: BitMatrix) -> BitMatrix:
        return self.emap("id", X)


def _rows(guard: Optional[Sequence[int]], n: int):
    return None if guard is None else [guard] * n


# public entry points ------------------------------------------------------

def lower_scalar(kind: str, p: int, n: int = 2) -> LoweredArtifact:
    """Concrete gate-level circuit for one scalar operation.

    ``kind`` is ``add``, ``mul``, ``cmp`` or ``iter_add`` (with ``n`` operands).
    Raises :class:`ConcreteLimitError` above the concrete precision cap.
    """
    if kind not in SCALAR_KINDS:
        raise ValueError(f"unknown scalar kind {kind!r}")
    if p > max_concrete_p():
        raise ConcreteLimitError(f"p={p} exceeds the concrete-lowering cap {max_concrete_p()}")
    arity = n if kind == "iter_add" else 2
    lw = Lowerer(p, concrete=True)
    ops = [lw.input_scalar(f"x{i}") for i in range(arity)]
    out = lw.op(kind, ops)
    art = lw.output(BitMatrix(1, 1, [out]), kind if kind != "iter_add" else f"iter_add({arity})")
    if kind == "cmp":
        art.out_shape = (1, 3)
    return art


def lower_macro(kind: str, p: int, n: int = 1) -> LoweredArtifact:
    """A single macro gate for exp, div, sqrt or iter_mul (``n`` operands)."""
    if kind not in _MACRO_ONLY:
        raise ValueError(f"unknown macro kind {kind!r}")
    arity = {"exp": 1, "sqrt": 1, "div": 2}.get(kind, n)
    if arity < 1:
        raise ValueError("iter_mul needs at least one operand")
    lw = Lowerer(p)
    ops = [lw.input_scalar(f"x{i}") for i in range(arity)]
    out = lw.op(kind, ops)
    name = f"iter_mul({arity})" if kind == "iter_mul" else kind
    return lw.output(BitMatrix(1, 1, [out]), name)


def _layer_inputs(lw: Lowerer, shape: Shape, idx: str = ""):
    d = shape.d
    if shape.kernel:
        W_Q = lw.input_matrix(f"W_Q{idx}", d, shape.dphi)
        W_K = lw.input_matrix(f"W_K{idx}", d, shape.dphi)
        W = lw.input_matrix(f"W{idx}", shape.dphi, shape.dphi)
        return W_Q, W_K, W
    return lw.input_matrix(f"W_Q{idx}", d, d), lw.input_matrix(f"W_K{idx}", d, d), None


def _fnn_inputs(lw: Lowerer, d: int, idx: str = ""):
    return (lw.input_matrix(f"W_1{idx}", d, d), lw.input_matrix(f"W_2{idx}", d, d),
            lw.input_matrix(f"b_1{idx}", d, 1), lw.input_matrix(f"b_2{idx}", d, 1))


def lower_network(shape: Shape, concrete: Optional[bool] = None) -> LoweredArtifact:
    """Circuit for a whole construct; all weights and inputs are circuit inputs.

    Input order follows :func:`hopcirc.lowering.reference.input_layout`.
    """
    lw = Lowerer(shape.p, concrete)
    n, d, c = shape.n, shape.d, shape.construct
    if c == "matmul":
        A = lw.input_matrix("A", n, d)
        B = lw.input_matrix("B", d, n)
        return lw.output(lw.matmul(A, B), c, shape)
    if c == "fnn":
        X = lw.input_matrix("X", n, d)
        return lw.output(lw.fnn(X, *_fnn_inputs(lw, d)), c, shape)
    if c in ("attn", "hop_layer", "kattn", "khop"):
        R = lw.input_matrix("R", n, d)
        Y = lw.input_matrix("Y", n, d)
        W_Q, W_K, W = _layer_inputs(lw, shape)
        W_V = lw.input_matrix("W_V", d, d) if c in ("hop_layer", "khop") else None
        beta = lw.input_scalar("beta")
        A = lw.attention(R, Y, W_Q, W_K, beta, W)
        if W_V is None:
            return lw.output(A, c, shape)
        return lw.output(lw.normalize(A, Y, W_V, beta, shape.normalization), c, shape)
    # multi-layer networks
    R = lw.input_matrix("R", n, d)
    layers = []
    for i in range(1, shape.m + 1):
        Y = None if shape.self_attention else lw.input_matrix(f"Y_{i}", n, d)
        W_Q, W_K, W = _layer_inputs(lw, shape, f"_{i}")
        W_V = lw.input_matrix(f"W_V_{i}", d, d)
        beta = lw.input_scalar(f"beta_{i}")
        layers.append((Y, W_Q, W_K, W, W_V, beta))
    comps = []
    for i, kind in enumerate(shape.components):
        comps.append(_fnn_inputs(lw, d, f"_{i}") if kind == "fnn" else None)

    def component(i: int, X: BitMatrix) -> BitMatrix:
        lw.group = lw.b.new_group(f"f_{i}", DepthExpr.of(d_f=1))
        try:
            return lw.identity(X) if comps[i] is None else lw.fnn(X, *comps[i])
        finally:
            lw.group = -1

    h = component(0, R)
    for i, (Y, W_Q, W_K, W, W_V, beta) in enumerate(layers, 1):
        Yi = h if Y is None else Y
        # the layer starts once the previous component has produced its output
        A = lw.attention(h, Yi, W_Q, W_K, beta, W, guard=h.entries[0])
        h = lw.normalize(A, Yi, W_V, beta, shape.normalization)
        h = component(i, h)
    return lw.output(h, c, shape)
