"""Reference forward semantics of modern Hopfield networks over F_p.

Two normalizations are supported for a layer:

* ``softmax``: ``Z = softmax_rows(beta * R W_Q W_K^T Y^T) Y W~_V``
* ``beta_rowsum``: ``Z = D^{-1} A Y W~_V`` with ``D = diag(beta * A 1)``

The two differ by a factor ``beta`` per row. Both are kept; ``softmax`` is
the default.

Score matrices are always computed as ``(R (W_Q W_K^T)) Y^T``: the weight
product first, shared by every entry.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

from .fp import (FpFlags, FpMatrix, FpNum, dot, fp_add, fp_div, fp_exp,
                 fp_mul, iter_add, lse, mat_add, matmul, relu, softmax_cols)

__all__ = [
    "Normalization",
    "HopfieldLayerParams",
    "KernelLayerParams",
    "Identity",
    "FNN",
    "NetworkSpec",
    "RetrievalInstance",
    "attention_scores",
    "attention_matrix",
    "normalize_attention",
    "hopfield_layer",
    "fnn_forward",
    "apply_component",
    "mhn_forward",
    "retrieval_step",
    "energy",
    "half",
]


class Normalization(str, enum.Enum):
    SOFTMAX = "softmax"
    BETA_ROWSUM = "beta_rowsum"


def _square(mat: FpMatrix, d: int, name: str) -> None:
    if mat.shape != (d, d):
        raise ValueError(f"{name} must be {d}x{d}, got {mat.shape}")


@dataclass(frozen=True)
class HopfieldLayerParams:
    W_Q: FpMatrix
    W_K: FpMatrix
    W_V_tilde: FpMatrix
    beta: FpNum
    normalization: Normalization = Normalization.SOFTMAX

    def __post_init__(self) -> None:
        d = self.W_Q.rows
        for name in ("W_Q", "W_K", "W_V_tilde"):
            _square(getattr(self, name), d, name)
        if self.beta.m <= 0:
            raise ValueError("beta must be > 0")
        object.__setattr__(self, "normalization", Normalization(self.normalization))

    @classmethod
    def product_form(cls, W_Q: FpMatrix, W_K: FpMatrix, W_V: FpMatrix, beta: FpNum,
                     normalization: Normalization = Normalization.SOFTMAX,
                     flags: Optional[FpFlags] = None) -> "HopfieldLayerParams":
        """Build with ``W~_V = W_K W_V`` instead of a stand-alone matrix."""
        return cls(W_Q, W_K, matmul(W_K, W_V, flags), beta, normalization)

    @property
    def d(self) -> int:
        return self.W_Q.rows

    @property
    def p(self) -> int:
        return self.beta.p


@dataclass(frozen=True)
class KernelLayerParams:
    """Kernelized layer with the linear feature map ``Phi(u) = W u``.

    ``W_Q`` and ``W_K`` are ``d x D_phi``; ``W`` is ``D_phi x D_phi``.
    """

    W_Q: FpMatrix
    W_K: FpMatrix
    W_V: FpMatrix
    W: FpMatrix
    beta: FpNum
    normalization: Normalization = Normalization.SOFTMAX

    def __post_init__(self) -> None:
        d, dphi = self.W_Q.shape
        if self.W_K.shape != (d, dphi):
            raise ValueError(f"W_K must be {d}x{dphi}, got {self.W_K.shape}")
        _square(self.W_V, d, "W_V")
        _square(self.W, dphi, "W")
        if self.beta.m <= 0:
            raise ValueError("beta must be > 0")
        object.__setattr__(self, "normalization", Normalization(self.normalization))

    @property
    def d(self) -> int:
        return self.W_Q.rows

    @property
    def d_phi(self) -> int:
        return self.W_Q.cols

    @property
    def p(self) -> int:
        return self.beta.p


@dataclass(frozen=True)
class Identity:
    kind: str = field(default="identity", init=False)


@dataclass(frozen=True)
class FNN:
    """Two-layer ReLU network applied per row: ``W_2 relu(W_1 x + b_1) + b_2``."""

    W_1: FpMatrix
    W_2: FpMatrix
    b_1: FpMatrix
    b_2: FpMatrix
    kind: str = field(default="fnn", init=False)

    def __post_init__(self) -> None:
        d = self.W_1.rows
        _square(self.W_1, d, "W_1")
        _square(self.W_2, d, "W_2")
        for name in ("b_1", "b_2"):
            if getattr(self, name).shape != (d, 1):
                raise ValueError(f"{name} must be {d}x1")

    @property
    def d(self) -> int:
        return self.W_1.rows


Component = Union[Identity, FNN]
LayerParams = Union[HopfieldLayerParams, KernelLayerParams]


@dataclass(frozen=True)
class NetworkSpec:
    """An m-layer network ``f_m o L_m( ... f_1 o L_1(f_0(R), Y_1) ..., Y_m)``.

    ``stored_patterns`` of ``None`` means self-attention: every layer uses its
    own input as the stored patterns.
    """

    layers: tuple[LayerParams, ...]
    components: tuple[Component, ...]
    stored_patterns: Optional[tuple[FpMatrix, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "components", tuple(self.components))
        if self.stored_patterns is not None:
            object.__setattr__(self, "stored_patterns", tuple(self.stored_patterns))
        m = len(self.layers)
        if m < 1:
            raise ValueError("a network needs at least one layer")
        if len(self.components) != m + 1:
            raise ValueError(f"expected {m + 1} components, got {len(self.components)}")
        if self.stored_patterns is not None and len(self.stored_patterns) != m:
            raise ValueError(f"expected {m} stored pattern matrices")
        kinds = {isinstance(layer, KernelLayerParams) for layer in self.layers}
        if len(kinds) != 1:
            raise ValueError("cannot mix plain and kernel layers")
        d = self.layers[0].d
        for layer in self.layers:
            if layer.d != d:
                raise ValueError("all layers must share the hidden dimension")
        for comp in self.components:
            if isinstance(comp, FNN) and comp.d != d:
                raise ValueError("component dimension differs from the layers")
        if self.stored_patterns is not None:
            for y in self.stored_patterns:
                if y.cols != d:
                    raise ValueError("stored patterns must have d columns")

    @property
    def m(self) -> int:
        return len(self.layers)

    @property
    def d(self) -> int:
        return self.layers[0].d

    @property
    def p(self) -> int:
        return self.layers[0].p

    @property
    def kernel(self) -> bool:
        return isinstance(self.layers[0], KernelLayerParams)


@dataclass(frozen=True)
class RetrievalInstance:
    """Memory patterns as the columns of ``xi`` (d x M) and queries ``x`` (d x L)."""

    xi: FpMatrix
    x: FpMatrix
    beta: FpNum

    def __post_init__(self) -> None:
        if self.xi.cols < 1:
            raise ValueError("need at least one memory pattern")
        if self.x.rows != self.xi.rows:
            raise ValueError(f"query dimension {self.x.rows} != pattern dimension {self.xi.rows}")
        if self.beta.m <= 0:
            raise ValueError("beta must be > 0")

    @property
    def M(self) -> int:
        return self.xi.cols

    @property
    def d(self) -> int:
        return self.xi.rows


def half(p: int) -> FpNum:
    return FpNum(1 << (p - 1), -p, p)


def _check_patterns(R: FpMatrix, Y: FpMatrix, d: int) -> None:
    if R.cols != d or Y.cols != d:
        raise ValueError(f"R and Y need {d} columns, got {R.shape} and {Y.shape}")
    if R.rows != Y.rows:
        raise ValueError("R and Y must have the same number of rows")


def attention_scores(R: FpMatrix, Y: FpMatrix, params: HopfieldLayerParams,
                     flags: Optional[FpFlags] = None) -> FpMatrix:
    """``(R (W_Q W_K^T)) Y^T`` before scaling and exponentiation."""
    _check_patterns(R, Y, params.d)
    qk = matmul(params.W_Q, params.W_K.transpose(), flags)
    return matmul(matmul(R, qk, flags), Y.transpose(), flags)


def _exp_scaled(scores: FpMatrix, beta: FpNum, flags: Optional[FpFlags]) -> FpMatrix:
    return scores.map(lambda s: fp_exp(fp_mul(beta, s, flags), flags))


def attention_matrix(R: FpMatrix, Y: FpMatrix, params: HopfieldLayerParams,
                     flags: Optional[FpFlags] = None) -> FpMatrix:
    """``A[i, j] = exp(beta * R_i W_Q W_K^T Y_j^T)``."""
    return _exp_scaled(attention_scores(R, Y, params, flags), params.beta, flags)


def normalize_attention(A: FpMatrix, Y: FpMatrix, W_V: FpMatrix, beta: FpNum,
                        mode: Normalization,
                        flags: Optional[FpFlags] = None) -> FpMatrix:
    """Turn an attention matrix into layer output under either normalization."""
    p = A.p
    if Normalization(mode) is Normalization.SOFTMAX:
        weights = []
        for row in A.iter_rows():
            total = iter_add(row, p, flags)
            if total.m == 0:
                raise ZeroDivisionError("softmax normalizer is zero (exp underflow)")
            weights.extend(fp_div(a, total, flags) for a in row)
        P = FpMatrix(A.rows, A.cols, tuple(weights), p)
        return matmul(matmul(P, Y, flags), W_V, flags)
    diag = [fp_mul(beta, iter_add(row, p, flags), flags) for row in A.iter_rows()]
    T = matmul(matmul(A, Y, flags), W_V, flags)
    out = []
    for i, dii in enumerate(diag):
        if dii.m == 0:
            raise ZeroDivisionError(f"D[{i}, {i}] is zero")
        out.extend(fp_div(t, dii, flags) for t in T.row(i))
    return FpMatrix(T.rows, T.cols, tuple(out), p)


def hopfield_layer(R: FpMatrix, Y: FpMatrix, params: HopfieldLayerParams,
                   flags: Optional[FpFlags] = None) -> FpMatrix:
    A = attention_matrix(R, Y, params, flags)
    return normalize_attention(A, Y, params.W_V_tilde, params.beta,
                               params.normalization, flags)


def fnn_forward(X: FpMatrix, W_1: FpMatrix, W_2: FpMatrix, b_1: FpMatrix,
                b_2: FpMatrix, flags: Optional[FpFlags] = None) -> FpMatrix:
    d = W_1.rows
    if X.cols != d:
        raise ValueError(f"X must have {d} columns, got {X.shape}")
    rows = []
    for i in range(X.rows):
        x = FpMatrix.column(X.row(i))
        h = relu(mat_add(matmul(W_1, x, flags), b_1, flags))
        y = mat_add(matmul(W_2, h, flags), b_2, flags)
        rows.append(y.entries)
    return FpMatrix.from_rows(rows, X.p)


def apply_component(comp: Component, X: FpMatrix,
                    flags: Optional[FpFlags] = None) -> FpMatrix:
    if isinstance(comp, Identity):
        return X
    return fnn_forward(X, comp.W_1, comp.W_2, comp.b_1, comp.b_2, flags)


def _compose(R: FpMatrix, spec: NetworkSpec, layer_fn,
             flags: Optional[FpFlags]) -> FpMatrix:
    h = apply_component(spec.components[0], R, flags)
    for i, layer in enumerate(spec.layers):
        Y = h if spec.stored_patterns is None else spec.stored_patterns[i]
        h = layer_fn(h, Y, layer, flags)
        h = apply_component(spec.components[i + 1], h, flags)
    return h


def mhn_forward(R: FpMatrix, spec: NetworkSpec,
                flags: Optional[FpFlags] = None) -> FpMatrix:
    if spec.kernel:
        raise ValueError("mhn_forward needs plain Hopfield layers; use khn_forward")
    return _compose(R, spec, hopfield_layer, flags)


def retrieval_step(inst: RetrievalInstance,
                   flags: Optional[FpFlags] = None) -> FpMatrix:
    """One update ``Xi softmax(beta Xi^T x)``, column-wise for a batch of queries."""
    scores = matmul(inst.xi.transpose(), inst.x, flags)
    return matmul(inst.xi, softmax_cols(scores, inst.beta, flags), flags)


def energy(inst: RetrievalInstance, flags: Optional[FpFlags] = None) -> FpNum:
    """``-lse(beta, Xi^T x) + <x, x>/2`` for a single query column."""
    if inst.x.cols != 1:
        raise ValueError("energy is defined for a single query")
    p = inst.x.p
    smooth_max = lse(inst.beta, matmul(inst.xi.transpose(), inst.x, flags), flags)
    sq = dot(inst.x.entries, inst.x.entries, p, flags)
    return fp_add(-smooth_max, fp_mul(sq, half(p), flags), flags)
