"""Reference forward passes for lowered constructs, keyed by input layout."""
from __future__ import annotations

import random
from typing import Sequence

from ..fp import FpMatrix, FpNum, matmul
from ..hopfield import (FNN, HopfieldLayerParams, Identity, KernelLayerParams,
                        NetworkSpec, attention_matrix, fnn_forward, hopfield_layer,
                        mhn_forward)
from ..kernel import kernel_attention_matrix, khn_forward, khop_layer
from .network import Shape

__all__ = ["input_layout", "reference_forward", "random_inputs", "random_cases", "spec_inputs",
           "network_spec", "shape_of_spec"]


def input_layout(shape: Shape) -> list[tuple[str, int, int]]:
    """Names and shapes of the circuit inputs, in order."""
    n, d, c = shape.n, shape.d, shape.construct
    if c == "matmul":
        return [("A", n, d), ("B", d, n)]
    if c == "fnn":
        return [("X", n, d), *_fnn(d)]

    def layer(sfx=""):
        if shape.kernel:
            k = shape.dphi
            return [(f"W_Q{sfx}", d, k), (f"W_K{sfx}", d, k), (f"W{sfx}", k, k)]
        return [(f"W_Q{sfx}", d, d), (f"W_K{sfx}", d, d)]

    if c in ("attn", "hop_layer", "kattn", "khop"):
        out = [("R", n, d), ("Y", n, d), *layer()]
        if c in ("hop_layer", "khop"):
            out.append(("W_V", d, d))
        return out + [("beta", 1, 1)]
    out = [("R", n, d)]
    for i in range(1, shape.m + 1):
        if not shape.self_attention:
            out.append((f"Y_{i}", n, d))
        out += layer(f"_{i}")
        out += [(f"W_V_{i}", d, d), (f"beta_{i}", 1, 1)]
    for i, kind in enumerate(shape.components):
        if kind == "fnn":
            out += _fnn(d, f"_{i}")
    return out


def _fnn(d: int, sfx: str = "") -> list[tuple[str, int, int]]:
    return [(f"W_1{sfx}", d, d), (f"W_2{sfx}", d, d), (f"b_1{sfx}", d, 1), (f"b_2{sfx}", d, 1)]


def _layer_params(shape: Shape, get, sfx: str = ""):
    p = shape.p
    beta = get(f"beta{sfx}").entries[0]
    if shape.kernel:
        W_V = get(f"W_V{sfx}") if f"W_V{sfx}" in get.names else FpMatrix.identity(shape.d, p)
        return KernelLayerParams(get(f"W_Q{sfx}"), get(f"W_K{sfx}"), W_V, get(f"W{sfx}"),
                                 beta, shape.normalization)
    W_V = get(f"W_V{sfx}") if f"W_V{sfx}" in get.names else FpMatrix.identity(shape.d, p)
    return HopfieldLayerParams(get(f"W_Q{sfx}"), get(f"W_K{sfx}"), W_V, beta,
                               shape.normalization)


class _Getter:
    def __init__(self, layout, mats):
        self.names = {name: m for (name, _, _), m in zip(layout, mats)}

    def __call__(self, name: str) -> FpMatrix:
        return self.names[name]


def network_spec(shape: Shape, mats: Sequence[FpMatrix]) -> NetworkSpec:
    """The :class:`NetworkSpec` a multi-layer shape describes, with weights from ``mats``."""
    get = _Getter(input_layout(shape), mats)
    layers = tuple(_layer_params(shape, get, f"_{i}") for i in range(1, shape.m + 1))
    comps = []
    for i, kind in enumerate(shape.components):
        if kind == "fnn":
            comps.append(FNN(get(f"W_1_{i}"), get(f"W_2_{i}"), get(f"b_1_{i}"), get(f"b_2_{i}")))
        else:
            comps.append(Identity())
    stored = None if shape.self_attention else tuple(get(f"Y_{i}") for i in range(1, shape.m + 1))
    return NetworkSpec(layers, tuple(comps), stored)


def reference_forward(shape: Shape, mats: Sequence[FpMatrix]) -> FpMatrix:
    """The reference module's result on the given inputs."""
    layout = input_layout(shape)
    if len(mats) != len(layout):
        raise ValueError(f"expected {len(layout)} input matrices, got {len(mats)}")
    for (name, r, c), m in zip(layout, mats):
        if m.shape != (r, c):
            raise ValueError(f"input {name} must be {r}x{c}, got {m.shape}")
    get = _Getter(layout, mats)
    c = shape.construct
    if c == "matmul":
        return matmul(get("A"), get("B"))
    if c == "fnn":
        return fnn_forward(get("X"), get("W_1"), get("W_2"), get("b_1"), get("b_2"))
    if c in ("attn", "hop_layer"):
        params = _layer_params(shape, get)
        fn = attention_matrix if c == "attn" else hopfield_layer
        return fn(get("R"), get("Y"), params)
    if c in ("kattn", "khop"):
        params = _layer_params(shape, get)
        fn = kernel_attention_matrix if c == "kattn" else khop_layer
        return fn(get("R"), get("Y"), params)
    spec = network_spec(shape, mats)
    fn = khn_forward if shape.kernel else mhn_forward
    return fn(get("R"), spec)


def _random_num(rng: random.Random, p: int, e_lo: int, e_hi: int,
                positive: bool = False) -> FpNum:
    m = rng.randrange(1 << (p - 1), 1 << p)
    if not positive and rng.random() < 0.5:
        m = -m
    return FpNum(m, rng.randint(e_lo, e_hi), p)


def random_inputs(shape: Shape, rng: random.Random, scale: int = 0) -> list[FpMatrix]:
    """Random inputs with magnitudes near ``2**scale``; beta entries are positive."""
    p = shape.p
    out = []
    for name, r, c in input_layout(shape):
        if name.startswith("beta"):
            vals = [_random_num(rng, p, -p - 1, -p + 1, positive=True)]
        else:
            vals = [_random_num(rng, p, scale - p - 1, scale - p + 1) for _ in range(r * c)]
        out.append(FpMatrix(r, c, tuple(vals), p))
    return out


def random_cases(shape: Shape, count: int, rng: random.Random,
                 scale: int = 0) -> list[list[FpMatrix]]:
    """``count`` random input sets inside the reference's domain.

    Draws whose normalizer underflows to zero (every exp in a row rounds to 0)
    are skipped.
    """
    cases = []
    while len(cases) < count:
        mats = random_inputs(shape, rng, scale)
        try:
            reference_forward(shape, mats)
        except ZeroDivisionError:
            continue
        cases.append(mats)
    return cases


def shape_of_spec(spec: NetworkSpec, n: int) -> Shape:
    """Shape of the multi-layer construct ``spec`` describes for ``n`` input rows."""
    norms = {layer.normalization.value for layer in spec.layers}
    if len(norms) != 1:
        raise ValueError("all layers must use the same normalization for lowering")
    comps = tuple("identity" if isinstance(cm, Identity) else "fnn" for cm in spec.components)
    d_phi = spec.layers[0].d_phi if spec.kernel else None
    return Shape("khn" if spec.kernel else "mhn", n, spec.d, spec.p, spec.m, d_phi,
                 norms.pop(), comps, spec.stored_patterns is None)


def spec_inputs(spec: NetworkSpec, R: FpMatrix) -> list[FpMatrix]:
    """Flatten a network and its input into the circuit input order."""
    shape = shape_of_spec(spec, R.rows)
    vals: dict[str, FpMatrix] = {"R": R}
    for i, layer in enumerate(spec.layers, 1):
        vals[f"W_Q_{i}"] = layer.W_Q
        vals[f"W_K_{i}"] = layer.W_K
        vals[f"beta_{i}"] = FpMatrix(1, 1, (layer.beta,), spec.p)
        if spec.kernel:
            vals[f"W_{i}"] = layer.W
            vals[f"W_V_{i}"] = layer.W_V
        else:
            vals[f"W_V_{i}"] = layer.W_V_tilde
        if spec.stored_patterns is not None:
            vals[f"Y_{i}"] = spec.stored_patterns[i - 1]
    for i, comp in enumerate(spec.components):
        if isinstance(comp, FNN):
            vals[f"W_1_{i}"], vals[f"W_2_{i}"] = comp.W_1, comp.W_2
            vals[f"b_1_{i}"], vals[f"b_2_{i}"] = comp.b_1, comp.b_2
    return [vals[name] for name, _, _ in input_layout(shape)]
