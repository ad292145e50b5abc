# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled gate-evaluation and depth kernels.

Gate kind codes must match ``hopcirc.circuit.ir.Kind``.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.int8_t i8
ctypedef cnp.uint8_t u8

DEF K_INPUT = 0
DEF K_CONST0 = 1
DEF K_CONST1 = 2
DEF K_NOT = 3
DEF K_AND = 4
DEF K_OR = 5
DEF K_MAJ = 6
DEF K_MACRO = 7
DEF K_PROJ = 8


cdef void _run(const i8[:] kind, const i64[:] ptr, const i64[:] idx,
               const i64[:] param, const i64[:] aux_off, u8[:] v, u8[:] aux,
               object cb) except *:
    cdef Py_ssize_t G = kind.shape[0]
    cdef Py_ssize_t g, j, lo, hi, n, ones, off
    cdef i8 k
    cdef u8[:] res
    cdef u8[:] buf
    for g in range(G):
        k = kind[g]
        if k == K_INPUT:
            continue
        lo = ptr[g]
        hi = ptr[g + 1]
        if k == K_CONST0:
            v[g] = 0
        elif k == K_CONST1:
            v[g] = 1
        elif k == K_NOT:
            v[g] = 1 - v[idx[lo]]
        elif k == K_PROJ:
            v[g] = aux[aux_off[idx[lo]] + param[g]]
        elif k == K_MACRO:
            n = hi - lo
            arr = np.empty(n, dtype=np.uint8)
            buf = arr
            for j in range(n):
                buf[j] = v[idx[lo + j]]
            out = np.ascontiguousarray(cb(param[g], arr), dtype=np.uint8)
            res = out
            off = aux_off[g]
            for j in range(res.shape[0]):
                aux[off + j] = res[j]
            v[g] = 0
        else:
            ones = 0
            for j in range(lo, hi):
                ones += v[idx[j]]
            n = hi - lo
            if k == K_AND:
                v[g] = 1 if ones == n else 0
            elif k == K_OR:
                v[g] = 1 if ones > 0 else 0
            else:
                v[g] = 1 if 2 * ones > n else 0


def evaluate_batch(const i8[:] kind, const i64[:] ptr, const i64[:] idx,
                   const i64[:] param, const i64[:] aux_off, i64 aux_size,
                   const i64[:] inputs, const u8[:, :] in_bits,
                   const i64[:] outputs, object cb):
    cdef Py_ssize_t G = kind.shape[0]
    cdef Py_ssize_t B = in_bits.shape[0]
    cdef Py_ssize_t n_in = inputs.shape[0]
    cdef Py_ssize_t n_out = outputs.shape[0]
    cdef Py_ssize_t b, i
    vals_arr = np.zeros(G, dtype=np.uint8)
    aux_arr = np.zeros(max(aux_size, 1), dtype=np.uint8)
    out_arr = np.zeros((B, n_out), dtype=np.uint8)
    cdef u8[:] v = vals_arr
    cdef u8[:] aux = aux_arr
    cdef u8[:, :] out = out_arr
    for b in range(B):
        for i in range(n_in):
            v[inputs[i]] = in_bits[b, i] & 1
        _run(kind, ptr, idx, param, aux_off, v, aux, cb)
        for i in range(n_out):
            out[b, i] = v[outputs[i]]
    return out_arr


def evaluate_full(const i8[:] kind, const i64[:] ptr, const i64[:] idx,
                  const i64[:] param, const i64[:] aux_off, i64 aux_size,
                  const i64[:] inputs, const u8[:] in_bits, object cb):
    cdef Py_ssize_t G = kind.shape[0]
    cdef Py_ssize_t i
    vals_arr = np.zeros(G, dtype=np.uint8)
    aux_arr = np.zeros(max(aux_size, 1), dtype=np.uint8)
    cdef u8[:] v = vals_arr
    cdef u8[:] aux = aux_arr
    for i in range(inputs.shape[0]):
        v[inputs[i]] = in_bits[i] & 1
    _run(kind, ptr, idx, param, aux_off, v, aux, cb)
    return vals_arr, aux_arr


def longest_path(const i8[:] kind, const i64[:] ptr, const i64[:] idx,
                 const i64[:] region, const double[:] weight):
    """Weighted longest path where entering a region costs its weight."""
    cdef Py_ssize_t G = kind.shape[0]
    cdef Py_ssize_t g, j, h
    cdef i64 r
    cdef double best, c, w
    val_arr = np.zeros(G, dtype=np.float64)
    pred_arr = np.full(G, -1, dtype=np.int64)
    cdef double[:] val = val_arr
    cdef i64[:] pred = pred_arr
    for g in range(G):
        r = region[g]
        w = weight[r] if r >= 0 else 0.0
        if ptr[g + 1] == ptr[g]:
            val[g] = w
            continue
        best = -1.0
        for j in range(ptr[g], ptr[g + 1]):
            h = idx[j]
            c = val[h]
            if r >= 0 and region[h] != r:
                c += w
            if c > best:
                best = c
                pred[g] = h
        val[g] = best
    return val_arr, pred_arr


def concrete_depth(const i8[:] kind, const i64[:] ptr, const i64[:] idx):
    cdef Py_ssize_t G = kind.shape[0]
    cdef Py_ssize_t g, j
    cdef i64 best
    cdef i8 k
    depth_arr = np.zeros(G, dtype=np.int64)
    cdef i64[:] depth = depth_arr
    for g in range(G):
        best = 0
        for j in range(ptr[g], ptr[g + 1]):
            if depth[idx[j]] > best:
                best = depth[idx[j]]
        k = kind[g]
        if k == K_NOT or k == K_AND or k == K_OR or k == K_MAJ:
            best += 1
        depth[g] = best
    return depth_arr
