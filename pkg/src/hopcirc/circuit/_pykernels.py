"""Pure-Python/numpy versions of the compiled kernels.

Evaluation runs all lanes of a batch together, one topological level at a
time, with numpy reductions per gate kind. Same results as the compiled
kernel, bit for bit.
"""
from __future__ import annotations

import numpy as np

_INPUT, _CONST0, _CONST1, _NOT, _AND, _OR, _MAJ, _MACRO, _PROJ = range(9)
_LOGIC = (_AND, _OR, _MAJ)


def _levels(kind: np.ndarray, ptr: np.ndarray, idx: np.ndarray) -> np.ndarray:
    p = ptr.tolist()
    ix = idx.tolist()
    level = [0] * len(kind)
    for g in range(len(kind)):
        lo, hi = p[g], p[g + 1]
        if hi > lo:
            level[g] = max(level[h] for h in ix[lo:hi]) + 1
    return np.asarray(level, dtype=np.int64)


class _Plan:
    """Per-level gate groups with precomputed gather indices."""

    def __init__(self, kind, ptr, idx):
        level = _levels(kind, ptr, idx)
        order = np.lexsort((kind, level))
        self.steps = []
        counts = np.diff(ptr)
        if len(order) == 0:
            return
        keys = level[order] * 16 + kind[order]
        cuts = np.flatnonzero(np.diff(keys)) + 1
        for part in np.split(order, cuts):
            k = int(kind[part[0]])
            if k == _INPUT:
                continue
            if k in _LOGIC:
                segs = [idx[ptr[g]:ptr[g + 1]] for g in part]
                flat = np.concatenate(segs)
                starts = np.concatenate([[0], np.cumsum(counts[part])[:-1]])
                self.steps.append((k, part, flat, starts, counts[part]))
            elif k in (_NOT, _PROJ):
                self.steps.append((k, part, idx[ptr[part]], None, None))
            else:
                self.steps.append((k, part, None, None, None))


def _plan(kind, ptr, idx, cache):
    if cache is not None and "plan" in cache:
        return cache["plan"]
    plan = _Plan(np.asarray(kind), np.asarray(ptr), np.asarray(idx))
    if cache is not None:
        cache["plan"] = plan
    return plan


def _run(kind, ptr, idx, param, aux_off, aux_size, inputs, in_bits, cb, cache):
    in_bits = np.asarray(in_bits, dtype=np.uint8)
    B = in_bits.shape[0]
    G = len(kind)
    v = np.zeros((G, B), dtype=np.uint8)
    aux = np.zeros((max(int(aux_size), 1), B), dtype=np.uint8)
    if len(inputs):
        v[np.asarray(inputs)] = in_bits.T & 1
    for k, part, flat, starts, counts in _plan(kind, ptr, idx, cache).steps:
        if k == _CONST0:
            v[part] = 0
        elif k == _CONST1:
            v[part] = 1
        elif k == _NOT:
            v[part] = 1 - v[flat]
        elif k == _PROJ:
            v[part] = aux[aux_off[flat] + param[part]]
        elif k == _MACRO:
            for g in part:
                ins = v[idx[ptr[g]:ptr[g + 1]]]
                off = aux_off[g]
                for b in range(B):
                    res = np.asarray(cb(int(param[g]), ins[:, b]), dtype=np.uint8)
                    aux[off:off + len(res), b] = res
            v[part] = 0
        else:
            ones = np.add.reduceat(v[flat].astype(np.int64), starts, axis=0)
            n = counts[:, None]
            if k == _AND:
                v[part] = ones == n
            elif k == _OR:
                v[part] = ones > 0
            else:
                v[part] = 2 * ones > n
    return v, aux


def evaluate_batch(kind, ptr, idx, param, aux_off, aux_size, inputs, in_bits,
                   outputs, cb, cache=None):
    v, _ = _run(kind, ptr, idx, param, aux_off, aux_size, inputs, in_bits, cb, cache)
    return np.ascontiguousarray(v[np.asarray(outputs, dtype=np.int64)].T)


def evaluate_full(kind, ptr, idx, param, aux_off, aux_size, inputs, in_bits, cb,
                  cache=None):
    v, aux = _run(kind, ptr, idx, param, aux_off, aux_size, inputs,
                  np.asarray(in_bits, dtype=np.uint8)[None, :], cb, cache)
    return v[:, 0].copy(), aux[:, 0].copy()


def longest_path(kind, ptr, idx, region, weight):
    p = ptr.tolist()
    ix = idx.tolist()
    reg = region.tolist()
    w = weight.tolist()
    G = len(kind)
    val = [0.0] * G
    pred = [-1] * G
    for g in range(G):
        r = reg[g]
        wg = w[r] if r >= 0 else 0.0
        lo, hi = p[g], p[g + 1]
        if hi == lo:
            val[g] = wg
            continue
        best, bp = -1.0, -1
        for h in ix[lo:hi]:
            c = val[h]
            if r >= 0 and reg[h] != r:
                c += wg
            if c > best:
                best, bp = c, h
        val[g] = best
        pred[g] = bp
    return np.asarray(val), np.asarray(pred, dtype=np.int64)


def concrete_depth(kind, ptr, idx):
    p = ptr.tolist()
    ix = idx.tolist()
    ks = kind.tolist()
    depth = [0] * len(ks)
    counted = (_NOT, _AND, _OR, _MAJ)
    for g, k in enumerate(ks):
        lo, hi = p[g], p[g + 1]
        best = max((depth[h] for h in ix[lo:hi]), default=0)
        depth[g] = best + (1 if k in counted else 0)
    return np.asarray(depth, dtype=np.int64)
