import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hopcirc import encoding
from hopcirc.circuit import D_EXP, D_MUL, D_SQRT, D_STD, D_ADD, DepthExpr, Kind, evaluate, evaluate_batch
from hopcirc.fp import FpNum, fp_add, fp_cmp, fp_div, fp_exp, fp_mul, fp_sqrt, iter_add, iter_mul
from hopcirc.lowering import (CONSTRUCTS, ConcreteLimitError, Shape, formula_details,
                              lower_macro, lower_network, lower_scalar, paper_depth_formula,
                              random_cases, random_inputs, reference_forward, run_artifact,
                              verify_equivalence)
from oracles import grid


def f3():
    return [FpNum(m, e, 3) for m, e in grid(3)[1]]
from helpers import rand_num


def _run(art, xs):
    return evaluate(art.circuit, [b for x in xs for b in encoding.encode(x)]).tolist()


def _cmp_bits(x, y):
    o = int(fp_cmp(x, y))
    return [int(o < 0), int(o == 0), int(o > 0)]


# encoding ------------------------------------------------------------------------------

def test_encoding_roundtrip_exhaustive_p3():
    for x in f3():
        bits = encoding.encode(x)
        assert len(bits) == encoding.width(3) == 8
        assert encoding.decode(bits, 3) == x


@given(st.integers(0, 2**32), st.sampled_from([6, 8]))
def test_encoding_roundtrip_random(seed, p):
    x = rand_num(random.Random(seed), p, -(1 << p) + p, (1 << p) - p)
    assert encoding.decode(encoding.encode(x), p) == x


def test_decode_rejects_unnormalized():
    bad = encoding.to_twos(3, 4) + encoding.to_twos(0, 4)  # |m| = 3 < 4 at p = 3
    with pytest.raises(ValueError):
        encoding.decode(bad, 3)


# scalar lowering ---------------------------------------------------------------------------

def test_lowered_add_example():
    art = lower_scalar("add", 3)
    four = FpNum(4, 0, 3)
    assert _run(art, [four, four]) == encoding.encode(FpNum(4, 1, 3))
    assert art.depth == D_STD
    assert not (art.circuit.kind == Kind.MACRO).any()


def test_lowered_cmp_example():
    art = lower_scalar("cmp", 3)
    assert _run(art, [FpNum(4, 1, 3), FpNum(7, 0, 3)]) == [0, 0, 1]


def _sweep(kind, p, pairs):
    art = lower_scalar(kind, p)
    ref = {"add": lambda x, y: encoding.encode(fp_add(x, y)),
           "mul": lambda x, y: encoding.encode(fp_mul(x, y)),
           "cmp": _cmp_bits}[kind]
    bits = np.array([encoding.encode(x) + encoding.encode(y) for x, y in pairs], dtype=np.uint8)
    got = evaluate_batch(art.circuit, bits)
    want = np.array([ref(x, y) for x, y in pairs], dtype=np.uint8)
    return np.flatnonzero((got != want).any(axis=1))


@pytest.mark.parametrize("kind", ["add", "mul", "cmp"])
def test_scalar_exhaustive_p3(kind):
    g = f3()
    assert len(_sweep(kind, 3, list(itertools.product(g, g)))) == 0


@pytest.mark.parametrize("kind", ["add", "mul", "cmp"])
def test_scalar_random_p5(kind):
    rng = random.Random(kind)
    pairs = [(rand_num(rng, 5, -8, 8), rand_num(rng, 5, -8, 8)) for _ in range(500)]
    # near-equal exponents exercise cancellation
    pairs += [(x, FpNum(rng.randrange(16, 32) * rng.choice([-1, 1]), x.e, 5)) for x, _ in pairs[:200]]
    assert len(_sweep(kind, 5, pairs)) == 0


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_iter_add_lowering(n):
    rng = random.Random(n)
    art = lower_scalar("iter_add", 4, n)
    assert art.depth == D_ADD
    cases = [[rand_num(rng, 4, -4, 4) for _ in range(n)] for _ in range(200)]
    bits = np.array([[b for x in xs for b in encoding.encode(x)] for xs in cases], dtype=np.uint8)
    got = evaluate_batch(art.circuit, bits)
    for row, xs in zip(got, cases):
        assert row.tolist() == encoding.encode(iter_add(xs, 4))


def test_concrete_cap():
    with pytest.raises(ConcreteLimitError):
        lower_scalar("add", 9)


# macros ---------------------------------------------------------------------------------

def test_macro_depth_and_delegation():
    p = 6
    rng = random.Random(1)
    assert lower_macro("exp", p).depth == D_EXP
    assert lower_macro("sqrt", p).depth == D_SQRT
    assert lower_macro("div", p).depth == D_STD
    assert lower_macro("iter_mul", p, 5).depth == D_MUL
    ex, sq, dv, im = (lower_macro("exp", p), lower_macro("sqrt", p), lower_macro("div", p),
                      lower_macro("iter_mul", p, 3))
    for _ in range(100):
        x, y = rand_num(rng, p, -4, 2), rand_num(rng, p, -4, 2)
        z = rand_num(rng, p, -4, 2)
        assert _run(ex, [x]) == encoding.encode(fp_exp(x))
        ax = FpNum(abs(x.m), x.e, p)
        assert _run(sq, [ax]) == encoding.encode(fp_sqrt(ax))
        assert _run(dv, [x, y]) == encoding.encode(fp_div(x, y))
        assert _run(im, [x, y, z]) == encoding.encode(iter_mul([x, y, z], p))


# networks ----------------------------------------------------------------------------------

def test_formula_examples():
    assert paper_depth_formula("matmul") == D_STD + D_ADD
    assert paper_depth_formula("mhn", 3) == DepthExpr.of(d_f=4, d_std=24, d_add=18, d_exp=3)
    assert paper_depth_formula("khop") == DepthExpr.of(d_std=10, d_add=8, d_exp=1)
    det = formula_details("kattn")
    assert det.alternate == DepthExpr.of(d_std=3, d_add=2, d_exp=1) and det.note
    with pytest.raises(ValueError):
        paper_depth_formula("conv")


@pytest.mark.parametrize("construct", ["attn", "hop_layer", "fnn"])
def test_network_depth_examples(construct):
    art = lower_network(Shape(construct, 2, 2, 4))
    assert art.depth == paper_depth_formula(construct)


@pytest.mark.parametrize("construct", CONSTRUCTS)
def test_small_end_to_end(construct):
    shape = Shape(construct, 2, 2, 4, m=2 if construct in ("mhn", "khn") else 1)
    art = lower_network(shape)
    rng = random.Random(construct)
    rep = verify_equivalence(art, random_cases(shape, 5, rng))
    assert rep.bit_exact, rep.summary()
    assert rep.depth_matches


def test_single_row_layer_is_value_projection():
    shape = Shape("hop_layer", 1, 2, 4, normalization="softmax")
    art = lower_network(shape)
    rng = random.Random(2)
    mats = random_inputs(shape, rng)
    from hopcirc.fp import matmul
    from hopcirc.lowering import input_layout
    named = {name: m for (name, _, _), m in zip(input_layout(shape), mats)}
    out = run_artifact(art, [mats])[0]
    assert out == matmul(named["Y"], named["W_V"])
    assert out == reference_forward(shape, mats)


def test_fault_injection_localizes():
    shape = Shape("attn", 2, 2, 4)
    art = lower_network(shape)
    c = art.circuit
    rng = random.Random(3)
    cases = random_cases(shape, 10, rng)
    # flip one AND into an OR somewhere inside a concrete scalar op
    ands = np.flatnonzero(c.kind == Kind.AND)
    for g in ands[len(ands) // 2:len(ands) // 2 + 40]:
        bad = type(art)(c.with_gate(int(g), Kind.OR), art.construct, art.layout, art.out_shape,
                        art.shape, art.instances)
        rep = verify_equivalence(bad, cases)
        if not rep.bit_exact:
            assert rep.divergence is not None and rep.divergence.gate >= 0
            assert rep.divergence.gate == int(g) or c.region[rep.divergence.gate] == c.region[g]
            return
    pytest.fail("no injected fault was observable")


def test_size_growth_is_polynomial():
    sizes = {n: lower_network(Shape("hop_layer", n, 2, 4)).circuit.size for n in (2, 4, 8, 16)}
    ns = sorted(sizes)
    xs = [math.log(n) for n in ns]
    ys = [math.log(sizes[n]) for n in ns]
    mx, my = sum(xs) / 4, sum(ys) / 4
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)
    print(f"hop_layer size by n: {sizes}; fitted exponent {slope:.2f}")
    assert slope <= 4
