"""Kernelized Hopfield layers with the linear feature map ``Phi(u) = W u``.

The kernel ``K(u, v) = u^T W^T W v`` is evaluated through the Gram matrix
``G = W^T W``. Scores are ``(R ((W_Q G) W_K^T)) Y^T``; with ``W = I`` every
intermediate matches the plain Hopfield computation bit for bit.
"""
from __future__ import annotations

from typing import Optional

from .fp import (FpFlags, FpMatrix, FpNum, dot, fp_add, fp_exp, fp_mul, lse,
                 matmul, softmax_cols)
from .hopfield import (KernelLayerParams, NetworkSpec, RetrievalInstance,
                       _compose, _check_patterns, half, normalize_attention)

__all__ = [
    "gram",
    "feature_map_linear",
    "kernel_scores",
    "kernel_attention_matrix",
    "khop_layer",
    "khn_forward",
    "kernel_retrieval_step",
    "kernel_energy",
]


def gram(W: FpMatrix, flags: Optional[FpFlags] = None) -> FpMatrix:
    return matmul(W.transpose(), W, flags)


def feature_map_linear(U: FpMatrix, W: FpMatrix,
                       flags: Optional[FpFlags] = None) -> FpMatrix:
    """Apply ``Phi`` to every row of ``U``: ``u -> (W u^T)^T``."""
    if U.cols != W.cols:
        raise ValueError(f"rows of U have length {U.cols}, W expects {W.cols}")
    return matmul(U, W.transpose(), flags)


def kernel_scores(R: FpMatrix, Y: FpMatrix, params: KernelLayerParams,
                  flags: Optional[FpFlags] = None) -> FpMatrix:
    _check_patterns(R, Y, params.d)
    g = gram(params.W, flags)
    inner = matmul(matmul(params.W_Q, g, flags), params.W_K.transpose(), flags)
    return matmul(matmul(R, inner, flags), Y.transpose(), flags)


def kernel_attention_matrix(R: FpMatrix, Y: FpMatrix, params: KernelLayerParams,
                            flags: Optional[FpFlags] = None) -> FpMatrix:
    beta = params.beta
    return kernel_scores(R, Y, params, flags).map(
        lambda s: fp_exp(fp_mul(beta, s, flags), flags))


def khop_layer(R: FpMatrix, Y: FpMatrix, params: KernelLayerParams,
               flags: Optional[FpFlags] = None) -> FpMatrix:
    A = kernel_attention_matrix(R, Y, params, flags)
    return normalize_attention(A, Y, params.W_V, params.beta,
                               params.normalization, flags)


def khn_forward(R: FpMatrix, spec: NetworkSpec,
                flags: Optional[FpFlags] = None) -> FpMatrix:
    if not spec.kernel:
        raise ValueError("khn_forward needs kernel layers; use mhn_forward")
    return _compose(R, spec, khop_layer, flags)


def _kernel_column(inst: RetrievalInstance, W: FpMatrix,
                   flags: Optional[FpFlags]) -> tuple[FpMatrix, FpMatrix]:
    if W.cols != inst.d:
        raise ValueError(f"W must have {inst.d} columns, got {W.shape}")
    gx = matmul(gram(W, flags), inst.x, flags)
    return gx, matmul(inst.xi.transpose(), gx, flags)


def kernel_retrieval_step(inst: RetrievalInstance, W: FpMatrix,
                          flags: Optional[FpFlags] = None) -> FpMatrix:
    """``Xi softmax(beta K(Xi, x))`` with ``K(xi, x) = <W xi, W x>``."""
    _, scores = _kernel_column(inst, W, flags)
    return matmul(inst.xi, softmax_cols(scores, inst.beta, flags), flags)


def kernel_energy(inst: RetrievalInstance, W: FpMatrix,
                  flags: Optional[FpFlags] = None) -> FpNum:
    """``K(x, x)/2 + lse(beta, K(Xi, x))``, with the sign as printed for E_K."""
    if inst.x.cols != 1:
        raise ValueError("kernel_energy is defined for a single query")
    p = inst.x.p
    gx, scores = _kernel_column(inst, W, flags)
    kxx = dot(inst.x.entries, gx.entries, p, flags)
    return fp_add(fp_mul(kxx, half(p), flags), lse(inst.beta, scores, flags), flags)
