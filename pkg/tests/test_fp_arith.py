import itertools
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from hopcirc.fp import (FpFlags, FpNum, Ordering, all_values, e_max, e_min, fp_add,
                        fp_cmp, fp_div, fp_exp, fp_mul, fp_neg, fp_sqrt, fp_sub,
                        iter_add, iter_mul, max_value, min_positive, parse_literal,
                        round_p)
from oracles import grid, nearest, rel_err, value

P3 = all_values(3)


def F(m, e, p=3):
    return FpNum(m, e, p)


def fpnums(p):
    mags = st.integers(1 << (p - 1), (1 << p) - 1)
    nz = st.builds(lambda m, s, e: FpNum(m * s, e, p), mags, st.sampled_from([1, -1]),
                   st.integers(e_min(p), e_max(p)))
    return st.one_of(st.just(FpNum.zero(p)), nz)


# FpNum invariants ------------------------------------------------------------

def test_canonical_zero_and_normalization():
    with pytest.raises(ValueError):
        FpNum(0, 3, 3)
    with pytest.raises(ValueError):
        FpNum(3, 0, 3)
    with pytest.raises(ValueError):
        FpNum(4, 8, 3)
    assert FpNum(4, -2, 3).value == 1
    assert len(P3) == 2 * 4 * 16 + 1


def test_literal_round_trip():
    x = parse_literal("fp(p=3, m=5, e=-4)")
    assert x == F(5, -4)
    assert parse_literal(str(x)) == x
    with pytest.raises(ValueError):
        parse_literal("fp(3, 5, -4)")


# round_p ----------------------------------------------------------------------

@pytest.mark.parametrize("x, want", [
    (Fraction(1), (4, -2)),
    (Fraction(3, 10), (5, -4)),
    # 0.28125 is the midpoint of 0.25 = <4,-4> and 0.3125 = <5,-4>; the even significand wins
    (Fraction(9, 32), (4, -4)),
])
def test_round_examples(x, want):
    got = round_p(x, 3)
    assert (got.m, got.e) == want
    assert nearest(x, 3) == want


def test_round_idempotent_on_all_of_f3():
    for v in P3:
        assert round_p(v.value, 3) == v


def test_round_matches_enumeration_on_dense_grid_p3():
    vals, _ = grid(3)
    # midpoints, quarter points and points outside the range
    probes = set()
    for a, b in zip(vals, vals[1:]):
        probes.update({(a + b) / 2, (3 * a + b) / 4, (a + 3 * b) / 4})
    probes.update({vals[-1] * 2, vals[0] * 2, vals[-1] + 1})
    for x in probes:
        got = round_p(x, 3)
        assert (got.m, got.e) == nearest(x, 3), x


def test_tie_rule_even_significand():
    vals, pairs = grid(3)
    for (a, pa), (b, pb) in zip(zip(vals, pairs), zip(vals[1:], pairs[1:])):
        got = round_p((a + b) / 2, 3)
        if got.m != 0 and pa[0] != 0 and pb[0] != 0:
            assert got.m % 2 == 0


def test_overflow_and_underflow_flags():
    fl = FpFlags()
    big = round_p(Fraction(2) ** 40, 3, fl)
    assert big == max_value(3) and fl.overflow
    fl = FpFlags()
    tiny = round_p(value(4, e_min(3)) / 3, 3, fl)
    assert tiny.m == 0 and fl.underflow
    fl = FpFlags()
    assert round_p(value(4, e_min(3)) * Fraction(3, 4), 3, fl) == min_positive(3)
    assert fl.underflow
    fl.clear()
    assert not fl


@given(st.fractions(), st.fractions())
def test_round_monotone(a, b):
    lo, hi = sorted((a, b))
    assert round_p(lo, 6).value <= round_p(hi, 6).value


@given(st.fractions(min_value=-10**6, max_value=10**6))
def test_round_is_nearest_p5(x):
    got = round_p(x, 5)
    assert (got.m, got.e) == nearest(x, 5)


# scalar operations -------------------------------------------------------------

def test_add_examples():
    x = F(5, -1)
    assert fp_add(x, FpNum.zero(3)) == x
    assert fp_add(F(4, 0), F(4, 0)) == F(4, 1)
    assert fp_add(F(7, 0), F(4, -2)) == F(4, 1)


def test_mul_examples():
    x = F(-6, 3)
    assert fp_mul(F(4, -2), x) == x
    assert fp_mul(x, FpNum.zero(3)) == FpNum.zero(3)
    assert fp_mul(F(5, 0), F(5, 0)) == F(6, 2)


def test_div_examples():
    x = F(7, -5)
    assert fp_div(x, F(4, -2)) == x
    assert fp_div(F(4, -2), F(4, -1)) == F(4, -3)
    assert fp_div(F(4, -2), F(6, -1)) == F(5, -4)
    with pytest.raises(ZeroDivisionError):
        fp_div(x, FpNum.zero(3))


def test_cmp_examples():
    x = F(-5, 2)
    assert fp_cmp(x, x) is Ordering.EQUAL
    assert fp_cmp(FpNum.zero(3), F(4, -2)) is Ordering.LESS
    assert fp_cmp(F(4, 1), F(7, 0)) is Ordering.GREATER


def test_exhaustive_pairs_p3():
    for x, y in itertools.product(P3, repeat=2):
        assert (fp_add(x, y).m, fp_add(x, y).e) == nearest(x.value + y.value, 3)
        assert (fp_mul(x, y).m, fp_mul(x, y).e) == nearest(x.value * y.value, 3)
        want = (x.value > y.value) - (x.value < y.value)
        assert int(fp_cmp(x, y)) == want
        assert fp_sub(x, y) == fp_add(x, fp_neg(y))


def test_div_matches_rational_oracle_p3():
    for x, y in itertools.product(P3[::3], P3):
        if y.m == 0:
            continue
        got = fp_div(x, y)
        assert (got.m, got.e) == nearest(x.value / y.value, 3)


def test_iter_add_examples():
    one = FpNum.one(3)
    assert iter_add([], 3) == FpNum.zero(3)
    assert iter_add([F(-6, 2)]) == F(-6, 2)
    # exact 9 sits midway between 8 and 10; the even significand gives 8
    assert iter_add([one] * 9, 3) == F(4, 1)


def test_iter_add_single_rounding_witness():
    # found by exhaustive search over F_3 triples: one rounding gives -20,
    # rounding after each addition gives -16
    a, b, c = F(-7, 0), F(-6, 0), F(-6, 0)
    assert iter_add([a, b, c]) == F(-5, 2)
    assert fp_add(fp_add(a, b), c) == F(-4, 2)
    assert (F(-5, 2).m, F(-5, 2).e) == nearest(a.value + b.value + c.value, 3)


def test_iter_add_differs_from_fold_somewhere():
    small = [v for v in P3 if -2 <= v.e <= 0]
    found = next((t for t in itertools.product(small, repeat=3)
                  if iter_add(t) != fp_add(fp_add(t[0], t[1]), t[2])), None)
    assert found is not None


def test_iter_mul_examples():
    one, two = FpNum.one(3), F(4, -1)
    assert iter_mul([one, FpNum.zero(3), two]) == FpNum.zero(3)
    assert iter_mul([one, one, one]) == one
    assert iter_mul([two, two, two]) == F(4, 1)
    assert iter_mul([], 3) == one


@given(st.lists(fpnums(4), min_size=1, max_size=6))
def test_iter_ops_round_once(xs):
    s = sum((x.value for x in xs), Fraction(0))
    assert (iter_add(xs).m, iter_add(xs).e) == nearest(s, 4)
    prod = Fraction(1)
    for x in xs:
        prod *= x.value
    assert (iter_mul(xs).m, iter_mul(xs).e) == nearest(prod, 4)


@given(fpnums(6), fpnums(6))
def test_closure_and_commutativity(x, y):
    for r in (fp_add(x, y), fp_mul(x, y)):
        FpNum(r.m, r.e, r.p)  # re-validates the invariants
    assert fp_add(x, y) == fp_add(y, x)
    assert fp_mul(x, y) == fp_mul(y, x)


def test_mixed_precision_rejected():
    with pytest.raises(ValueError):
        fp_add(FpNum.one(3), FpNum.one(4))


# exp and sqrt ---------------------------------------------------------------------

def test_exp_examples():
    assert fp_exp(FpNum.zero(3)) == F(4, -2)
    assert fp_exp(FpNum.one(3)) == F(5, -1)
    assert fp_exp(-FpNum.one(3)) == F(6, -4)


def test_sqrt_examples():
    assert fp_sqrt(FpNum.one(3)) == FpNum.one(3)
    assert fp_sqrt(F(4, 0)) == F(4, -1)
    assert fp_sqrt(F(4, -1)) == F(6, -2)
    with pytest.raises(ValueError):
        fp_sqrt(F(-4, 0))


def exp_in_range(x: FpNum, ex) -> bool:
    """fp_exp's precondition: the result lies within the representable range."""
    lo, hi = min_positive(x.p).value, max_value(x.p).value
    return mpmath.mpf(lo.numerator) / lo.denominator <= ex <= mpmath.mpf(hi.numerator) / hi.denominator


def test_exp_sqrt_within_bound_on_all_of_f3():
    with mpmath.workprec(64):
        for x in P3:
            want = mpmath.exp(mpmath.mpf(x.value.numerator) / x.value.denominator)
            if exp_in_range(x, want):
                assert rel_err(fp_exp(x), want) <= 2.0 ** -3
            if x.m > 0:
                want = mpmath.sqrt(mpmath.mpf(x.value.numerator) / x.value.denominator)
                assert rel_err(fp_sqrt(x), want) <= 2.0 ** -3


@pytest.mark.parametrize("p", [3, 6, 10, 24])
def test_exp_sqrt_error_bound_sample(p):
    rng = random.Random(p)
    with mpmath.workprec(4 * p + 16):
        for _ in range(300):
            m = rng.randrange(1 << (p - 1), 1 << p) * rng.choice((1, -1))
            x = FpNum(m, rng.randint(-p - 4, 3 - p), p)
            ex = mpmath.exp(mpmath.mpf(x.value.numerator) / x.value.denominator)
            if exp_in_range(x, ex):
                assert rel_err(fp_exp(x), ex) <= 2.0 ** -p
            y = FpNum(abs(m), rng.randint(-p - 4, min(8, e_max(p))), p)
            sq = mpmath.sqrt(mpmath.mpf(y.value.numerator) / y.value.denominator)
            assert rel_err(fp_sqrt(y), sq) <= 2.0 ** -p


def test_exp_range_flags():
    fl = FpFlags()
    assert fp_exp(FpNum(7, 4, 3), fl) == max_value(3)
    assert fl.overflow
    fl = FpFlags()
    # e^-7 is below the smallest positive F_3 value (1/64)
    assert fp_exp(F(-7, 0), fl).m == 0
    assert fl.underflow
