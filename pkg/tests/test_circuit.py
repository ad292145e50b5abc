import itertools
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hopcirc import encoding
from hopcirc.circuit import (D_EXP, D_STD, Builder, Circuit, CircuitError, DepthExpr, Kind,
                             compiled_available, dumps, evaluate, evaluate_batch, get_backend,
                             loads, measure, validate)
from hopcirc.fp import FpNum, fp_exp

backends = [get_backend("python")] + ([get_backend("compiled")] if compiled_available() else [])


def _one_gate(kind, n):
    b = Builder(3)
    xs = b.input_bits(n)
    r = b.new_region("t", D_STD)
    with b.in_region(r):
        g = b.add(kind, xs)
    return b.build([g])


# validate ----------------------------------------------------------------------------

def test_empty_circuit_is_valid():
    c = Builder(3).build([])
    assert validate(c) == []
    m = measure(c)
    assert m.size == 0 and m.concrete_depth == 0


def test_forward_reference_is_a_violation():
    c = Circuit([Kind.INPUT, Kind.NOT], [0, 0, 1], [1], [0, 0], [-1, -1], [0], [1], 3)
    assert any(v.startswith("order") for v in validate(c))


def test_not_arity_violation():
    b = Builder(3)
    x, y = b.input_bits(2)
    g = b.NOT(x)
    c = b.build([g]).with_gate(g, fan_in=[x, y])
    assert any("arity" in v for v in validate(c))


def test_missing_output_violation():
    b = Builder(3)
    x = b.input()
    c = b.build([x])
    bad = Circuit(c.kind, c.ptr, c.idx, c.param, c.region, c.inputs, [5], 3)
    assert any(v.startswith("outputs") for v in validate(bad))


def test_macro_width_violation():
    b = Builder(3)
    xs = b.input_bits(b.width)
    out = b.macro("exp", [xs])
    c = b.build(out)
    mg = int(np.flatnonzero(c.kind == Kind.MACRO)[0])
    bad = c.with_gate(mg, fan_in=xs[:-1])
    assert any(v.startswith("width") for v in validate(bad))


# evaluate ----------------------------------------------------------------------------

@pytest.mark.parametrize("kern", backends, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_majority_examples(kern):
    assert evaluate(_one_gate(Kind.MAJ, 3), [1, 0, 1], kern)[0] == 1
    assert evaluate(_one_gate(Kind.MAJ, 4), [1, 0, 1, 0], kern)[0] == 0
    assert evaluate(_one_gate(Kind.MAJ, 4), [1, 1, 1, 0], kern)[0] == 1


@pytest.mark.parametrize("kern", backends, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_contradiction(kern):
    b = Builder(3)
    x = b.input()
    c = b.build([b.AND(x, b.NOT(x))])
    assert evaluate_batch(c, [[0], [1]], kern).tolist() == [[0], [0]]


def test_width_mismatch_is_an_error():
    c = _one_gate(Kind.AND, 2)
    with pytest.raises(CircuitError):
        evaluate(c, [1, 0, 1])


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_de_morgan_exhaustive(k):
    b = Builder(3)
    xs = b.input_bits(k)
    and1 = b.AND(*xs)
    and2 = b.NOT(b.OR(*(b.NOT(x) for x in xs)))
    or1 = b.OR(*xs)
    or2 = b.NOT(b.AND(*(b.NOT(x) for x in xs)))
    c = b.build([and1, and2, or1, or2])
    bits = np.array(list(itertools.product([0, 1], repeat=k)), dtype=np.uint8)
    for kern in backends:
        out = evaluate_batch(c, bits, kern)
        assert (out[:, 0] == out[:, 1]).all() and (out[:, 2] == out[:, 3]).all()
        assert (out[:, 0] == bits.all(axis=1)).all()


@given(st.lists(st.integers(0, 1), min_size=1, max_size=9), st.data())
def test_majority_monotone_and_strict(bits, data):
    c = _one_gate(Kind.MAJ, len(bits))
    out = evaluate(c, bits)[0]
    assert out == (2 * sum(bits) > len(bits))
    zeros = [i for i, b in enumerate(bits) if b == 0]
    if zeros:
        i = data.draw(st.sampled_from(zeros))
        flipped = bits[:i] + [1] + bits[i + 1:]
        assert evaluate(c, flipped)[0] >= out


def test_threshold_gadget():
    for n in range(1, 6):
        for k in range(0, n + 2):
            b = Builder(3)
            xs = b.input_bits(n)
            c = b.build([b.threshold(xs, k)])
            bits = np.array(list(itertools.product([0, 1], repeat=n)), dtype=np.uint8)
            assert (evaluate_batch(c, bits)[:, 0] == (bits.sum(axis=1) >= k)).all()


def test_macro_delegates_to_fp_arith():
    p = 3
    b = Builder(p)
    xs = b.input_bits(b.width)
    r = b.new_region("exp", D_EXP)
    with b.in_region(r):
        out = b.macro("exp", [xs])
    c = b.build(out)
    for m in range(-7, 8):
        if m and abs(m) < 4:
            continue
        for e in range(-3, 3):
            x = FpNum(m, e if m else 0, p)
            got = encoding.decode(evaluate(c, encoding.encode(x)).tolist(), p)
            assert got == fp_exp(x)
    assert measure(c).symbolic_depth == D_EXP


def _random_circuit(seed, n_in=6, n_gates=200):
    rng = random.Random(seed)
    b = Builder(3)
    pool = b.input_bits(n_in)
    r = b.new_region("t", D_STD)
    with b.in_region(r):
        for _ in range(n_gates):
            kind = rng.choice([Kind.NOT, Kind.AND, Kind.OR, Kind.MAJ])
            if kind == Kind.NOT:
                pool.append(b.NOT(rng.choice(pool)))
            else:
                pool.append(b.add(kind, rng.sample(pool, rng.randint(1, min(5, len(pool))))))
    return b.build(pool[-8:])


def test_backends_agree():
    if not compiled_available():
        pytest.skip("compiled kernels not built")
    py, cc = get_backend("python"), get_backend("compiled")
    for seed in range(10):
        c = _random_circuit(seed)
        bits = np.random.default_rng(seed).integers(0, 2, size=(64, 6), dtype=np.uint8)
        assert (evaluate_batch(c, bits, py) == evaluate_batch(c, bits, cc)).all()
        assert measure(c, kernels=py).concrete_depth == measure(c, kernels=cc).concrete_depth


def test_schedule_independence():
    # evaluating gate by gate in a different valid order gives the same values
    c = _random_circuit(3)
    bits = [1, 0, 1, 1, 0, 0]
    order = list(range(c.size))
    rng = random.Random(0)
    val = {}
    pending = order[:]
    while pending:
        rng.shuffle(pending)
        rest = []
        for g in pending:
            gate = c.gate(g)
            if not all(f in val for f in gate.fan_in):
                rest.append(g)
                continue
            xs = [val[f] for f in gate.fan_in]
            if gate.kind == Kind.INPUT:
                val[g] = bits[list(c.inputs).index(g)]
            elif gate.kind == Kind.NOT:
                val[g] = 1 - xs[0]
            elif gate.kind == Kind.AND:
                val[g] = int(all(xs))
            elif gate.kind == Kind.OR:
                val[g] = int(any(xs))
            else:
                val[g] = int(2 * sum(xs) > len(xs))
        pending = rest
    assert [val[int(o)] for o in c.outputs] == evaluate(c, bits).tolist()


# measure ------------------------------------------------------------------------------

def test_measure_examples():
    b = Builder(3)
    x = b.input()
    m = measure(b.build([x]))
    assert m.size == 1 and m.concrete_depth == 0 and m.symbolic_depth == DepthExpr()

    b = Builder(3)
    xs = b.input_bits(2)
    r1, r2 = b.new_region("add", D_STD), b.new_region("add", D_STD)
    with b.in_region(r1):
        g = b.AND(*xs)
        g = b.OR(g, xs[0])
    with b.in_region(r2):
        h = b.MAJ(g, xs[1], xs[0])
    m = measure(b.build([h]))
    assert m.symbolic_depth == D_STD + D_STD
    assert m.concrete_depth == 3


def test_unmarked_gates_rejected():
    b = Builder(3)
    x = b.input()
    c = b.build([b.NOT(x)])
    assert validate(c) == []
    with pytest.raises(CircuitError):
        measure(c)


def test_depth_expr_parse_roundtrip():
    e = DepthExpr.parse("4d_std + 3d_⊕ + d_exp")
    assert e == DepthExpr.of(d_std=4, d_add=3, d_exp=1)
    assert DepthExpr.parse(e.ascii()) == e
    with pytest.raises(ValueError):
        DepthExpr.parse("2d_foo")


# netlist --------------------------------------------------------------------------------

def test_netlist_roundtrip():
    c = _random_circuit(5)
    c2, meta = loads(dumps(c, {"k": 1}))
    assert meta == {"k": 1}
    assert dumps(c2, {"k": 1}) == dumps(c, {"k": 1})
    assert (c2.kind == c.kind).all() and (c2.idx == c.idx).all()

    b = Builder(3)
    xs = b.input_bits(b.width)
    g = b.new_group("f", DepthExpr.of(d_f=1))
    r = b.new_region("exp", D_EXP, g)
    with b.in_region(r):
        out = b.macro("exp", [xs])
    c = b.build(out)
    c3, _ = loads(dumps(c))
    assert c3.macros == c.macros and c3.regions == c.regions and c3.groups == c.groups
    assert measure(c3).symbolic_depth == DepthExpr.of(d_f=1)
    assert measure(c3, expand_groups=True).symbolic_depth == D_EXP
