import math
import random

import mpmath
from hypothesis import given, settings, strategies as st

from hopcirc.fp import FpMatrix, FpNum, fp_exp, from_float, iter_add, matmul
from hopcirc.hopfield import (FNN, HopfieldLayerParams, Identity, KernelLayerParams,
                              NetworkSpec, RetrievalInstance, attention_matrix,
                              hopfield_layer, mhn_forward, retrieval_step)
from hopcirc.kernel import (feature_map_linear, kernel_attention_matrix, kernel_energy,
                            kernel_retrieval_step, khn_forward, khop_layer)
from helpers import rand_beta, rand_matrix
from oracles import mp_matrix, mp_of

P = 10


def klayer(rng, d, W=None, p=P, mode="softmax"):
    W = FpMatrix.identity(d, p) if W is None else W
    return KernelLayerParams(rand_matrix(rng, d, d, p), rand_matrix(rng, d, d, p),
                             rand_matrix(rng, d, d, p), W, rand_beta(rng, p), mode)


def plain(k: KernelLayerParams) -> HopfieldLayerParams:
    return HopfieldLayerParams(k.W_Q, k.W_K, k.W_V, k.beta, k.normalization)


# feature map -----------------------------------------------------------------------

def test_feature_map_examples():
    rng = random.Random(1)
    U = rand_matrix(rng, 3, 2, P)
    assert feature_map_linear(U, FpMatrix.identity(2, P)) == U
    assert all(v.m == 0 for v in feature_map_linear(U, FpMatrix.zeros(2, 2, P)).entries)
    W = rand_matrix(rng, 2, 2, P)
    U2 = rand_matrix(rng, 2, 2, P)
    assert feature_map_linear(U2, W) == matmul(U2, W.transpose())


# W = I reductions -------------------------------------------------------------------

@given(st.integers(0, 2**32), st.sampled_from(["softmax", "beta_rowsum"]))
@settings(max_examples=40)
def test_identity_kernel_layer_reduces(seed, mode):
    rng = random.Random(seed)
    R, Y = rand_matrix(rng, 3, 2, P), rand_matrix(rng, 3, 2, P)
    k = klayer(rng, 2, mode=mode)
    assert kernel_attention_matrix(R, Y, k) == attention_matrix(R, Y, plain(k))
    assert khop_layer(R, Y, k) == hopfield_layer(R, Y, plain(k))


def test_identity_kernel_network_reduces():
    rng = random.Random(2)
    for _ in range(10):
        R = rand_matrix(rng, 3, 2, P)
        ks = (klayer(rng, 2), klayer(rng, 2))
        fnns = tuple(FNN(rand_matrix(rng, 2, 2, P), rand_matrix(rng, 2, 2, P),
                         rand_matrix(rng, 2, 1, P), rand_matrix(rng, 2, 1, P)) for _ in range(3))
        kspec = NetworkSpec(ks, fnns)
        pspec = NetworkSpec(tuple(plain(k) for k in ks), fnns)
        assert khn_forward(R, kspec) == mhn_forward(R, pspec)


def test_identity_kernel_retrieval_reduces():
    rng = random.Random(3)
    for _ in range(20):
        inst = RetrievalInstance(rand_matrix(rng, 3, 4, P), rand_matrix(rng, 3, 1, P),
                                 rand_beta(rng, P))
        assert kernel_retrieval_step(inst, FpMatrix.identity(3, P)) == retrieval_step(inst)


# layer and network ----------------------------------------------------------------

def test_kernel_attention_examples():
    p = P
    one, zero = FpNum.one(p), FpNum.zero(p)
    eye = FpMatrix.identity(2, p)
    k = KernelLayerParams(eye, eye, eye, eye, one)
    A = kernel_attention_matrix(eye, eye, k)
    assert A[0, 1] == one and A[1, 0] == one
    assert A[0, 0] == fp_exp(one) == A[1, 1]
    # orthogonal under W^T W with a non-trivial W
    W = FpMatrix.from_rows([[one, zero], [zero, from_float(2.0, p)]], p)
    A = kernel_attention_matrix(eye, eye, KernelLayerParams(eye, eye, eye, W, one))
    assert A[0, 1] == one


def test_khop_examples():
    rng = random.Random(4)
    R, Y = rand_matrix(rng, 1, 2, P), rand_matrix(rng, 1, 2, P)
    k = klayer(rng, 2, W=rand_matrix(rng, 2, 2, P))
    assert khop_layer(R, Y, k) == matmul(Y, k.W_V)
    # W = 0 gives constant scores: uniform average of Y W_V rows
    Y = rand_matrix(rng, 4, 2, P)
    k = KernelLayerParams(rand_matrix(rng, 2, 2, P), rand_matrix(rng, 2, 2, P),
                          FpMatrix.identity(2, P), FpMatrix.zeros(2, 2, P), FpNum.one(P))
    Z = khop_layer(rand_matrix(rng, 4, 2, P), Y, k)
    quarter = FpNum(1 << (P - 1), -(P + 1), P)
    from hopcirc.fp import fp_mul
    mean = [iter_add([fp_mul(quarter, Y[i, j]) for i in range(4)], P) for j in range(2)]
    assert all(list(Z.row(i)) == mean for i in range(4))


def test_khn_composition():
    rng = random.Random(5)
    R = rand_matrix(rng, 3, 2, P)
    k1 = klayer(rng, 2, W=rand_matrix(rng, 2, 2, P))
    k2 = klayer(rng, 2, W=rand_matrix(rng, 2, 2, P))
    assert khn_forward(R, NetworkSpec((k1,), (Identity(), Identity()))) == khop_layer(R, R, k1)
    h = khop_layer(R, R, k1)
    assert khn_forward(R, NetworkSpec((k1, k2), (Identity(),) * 3)) == khop_layer(h, h, k2)


def test_kernel_softmax_rows_sum_to_one():
    rng = random.Random(6)
    p = 24
    eye = FpMatrix.identity(3, p)
    for _ in range(10):
        k = KernelLayerParams(rand_matrix(rng, 3, 3, p), rand_matrix(rng, 3, 3, p), eye,
                              rand_matrix(rng, 3, 3, p), rand_beta(rng, p))
        W = khop_layer(rand_matrix(rng, 3, 3, p), eye, k)  # Y = W_V = I exposes the weights
        for i in range(3):
            s = sum(v.value for v in W.row(i))
            assert abs(s - 1) <= 2.0 ** (2 - p)


def test_kernel_attention_symmetry():
    rng = random.Random(7)
    p = 24
    for _ in range(10):
        # O(1) scores: an absolute score error of a few ulps becomes a relative
        # exp error scaled by |beta s|
        X = rand_matrix(rng, 3, 2, p, -2, -1)
        Wq = rand_matrix(rng, 2, 2, p, -2, -1)
        k = KernelLayerParams(Wq, Wq, FpMatrix.identity(2, p), rand_matrix(rng, 2, 2, p, -2, -1),
                              rand_beta(rng, p))
        A = kernel_attention_matrix(X, X, k)
        for i in range(3):
            for j in range(3):
                a, b = A[i, j].value, A[j, i].value
                assert abs(a - b) <= abs(b) * 2.0 ** (2 - p)


# retrieval and energy ----------------------------------------------------------------

def test_kernel_retrieval_examples():
    rng = random.Random(8)
    xi = rand_matrix(rng, 3, 1, P)
    inst = RetrievalInstance(xi, rand_matrix(rng, 3, 1, P), FpNum.one(P))
    assert kernel_retrieval_step(inst, rand_matrix(rng, 3, 3, P)) == xi
    xi = rand_matrix(rng, 3, 4, P)
    inst = RetrievalInstance(xi, rand_matrix(rng, 3, 1, P), FpNum.one(P))
    out = kernel_retrieval_step(inst, FpMatrix.zeros(3, 3, P))
    quarter = FpNum(1 << (P - 1), -(P + 1), P)
    from hopcirc.fp import fp_mul
    assert list(out.entries) == [iter_add([fp_mul(xi[i, mu], quarter) for mu in range(4)], P)
                                 for i in range(3)]


def test_kernel_energy_zero_map():
    p = 24
    beta = from_float(2.0, p)
    rng = random.Random(9)
    inst = RetrievalInstance(rand_matrix(rng, 3, 5, p), rand_matrix(rng, 3, 1, p), beta)
    e = kernel_energy(inst, FpMatrix.zeros(3, 3, p))
    assert abs(float(e) - math.log(5) / 2) <= math.log(5) / 2 * 2.0 ** (2 - p)


def test_kernel_energy_matches_oracle_p24():
    rng = random.Random(10)
    p = 24
    for _ in range(20):
        xi, x = rand_matrix(rng, 3, 3, p, -1, 0), rand_matrix(rng, 3, 1, p, -1, 0)
        W = rand_matrix(rng, 3, 3, p, -1, 0)
        beta = rand_beta(rng, p)
        got = kernel_energy(RetrievalInstance(xi, x, beta), W)
        with mpmath.workprec(4 * p):
            Wm, X, q, b = mp_matrix(W), mp_matrix(xi), [mp_of(v) for v in x.entries], mp_of(beta)
            phi = lambda v: [mpmath.fsum(Wm[r][c] * v[c] for c in range(3)) for r in range(3)]  # noqa: E731
            fx = phi(q)
            K = lambda u: mpmath.fsum(a * c for a, c in zip(phi(u), fx))  # noqa: E731
            s = [K([X[i][mu] for i in range(3)]) for mu in range(3)]
            lse = mpmath.log(mpmath.fsum(mpmath.exp(b * v) for v in s)) / b
            want = K(q) / 2 + lse
            assert abs(mp_of(got) - want) <= abs(want) * 2.0 ** (4 - p)
