"""Seeded experiments: retrieval sweeps, energy traces, the S5 harness and oracle cross-checks.

Each experiment returns an :class:`ExperimentResult` holding per-trial rows
(written as CSV) and a summary dict (written as JSON).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath

from .cot import NO, YES, random_params, run_word_problem
from .fp import FpMatrix, FpNum, from_float
from .hopfield import RetrievalInstance, energy, retrieval_step
from .problems import (ELEMENTS, SplitMix64, Tree, ahu_canonical, all_rooted_trees, bfs_connected,
                       brute_force_iso, compose_balanced, compose_word, gen_connectivity,
                       gen_s5_word, gen_tree_pair, oracle_connectivity, oracle_s5,
                       oracle_tree_iso, perm_token)

__all__ = ["ExperimentResult", "EXPERIMENTS", "orthonormal_patterns", "noisy_query",
           "reference_retrieval", "retrieval_sweep", "energy_trace", "s5_harness",
           "oracle_crosscheck", "run_experiment"]


@dataclass
class ExperimentResult:
    name: str
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    passed: bool = True


def _gauss(rng: SplitMix64) -> float:
    # Box-Muller on the package generator so results do not depend on the Python version
    u1 = (rng.below(1 << 52) + 1) / float(1 << 52)
    u2 = rng.below(1 << 52) / float(1 << 52)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2 * math.pi * u2)


def orthonormal_patterns(d: int, M: int, p: int, rng: SplitMix64) -> FpMatrix:
    """``M`` Gram-Schmidt orthonormalized random columns of length ``d``, rounded to F_p."""
    if M > d:
        raise ValueError("cannot have more orthonormal patterns than dimensions")
    with mpmath.workdps(60):
        basis: list[list] = []
        while len(basis) < M:
            v = [mpmath.mpf(_gauss(rng)) for _ in range(d)]
            for b in basis:
                c = mpmath.fsum(x * y for x, y in zip(v, b))
                v = [x - c * y for x, y in zip(v, b)]
            norm = mpmath.sqrt(mpmath.fsum(x * x for x in v))
            if norm < 1e-6:
                continue
            basis.append([x / norm for x in v])
        cols = [[from_float(float(x), p) for x in b] for b in basis]
    return FpMatrix.from_rows([[cols[j][i] for j in range(M)] for i in range(d)], p)


def noisy_query(xi: FpMatrix, target: int, radius: float, rng: SplitMix64) -> FpMatrix:
    """Pattern ``target`` plus a random offset of Euclidean length below ``radius``."""
    d = xi.rows
    v = [_gauss(rng) for _ in range(d)]
    norm = math.sqrt(sum(x * x for x in v)) or 1.0
    r = radius * rng.below(1 << 30) / float(1 << 30)
    vals = [float(xi[i, target]) + r * v[i] / norm for i in range(d)]
    return FpMatrix.column([from_float(x, xi.p) for x in vals])


def reference_retrieval(xi: FpMatrix, x: FpMatrix, beta: FpNum, bits: int) -> list:
    """One retrieval update evaluated in ``bits``-bit arithmetic on the exact inputs."""
    with mpmath.workprec(bits):
        X = [[mpmath.mpf(e.value.numerator) / e.value.denominator for e in row]
             for row in xi.iter_rows()]
        q = [mpmath.mpf(e.value.numerator) / e.value.denominator for e in x.entries]
        b = mpmath.mpf(beta.value.numerator) / beta.value.denominator
        d, M = xi.rows, xi.cols
        scores = [b * mpmath.fsum(X[i][mu] * q[i] for i in range(d)) for mu in range(M)]
        top = max(scores)
        w = [mpmath.exp(s - top) for s in scores]
        tot = mpmath.fsum(w)
        return [mpmath.fsum(X[i][mu] * w[mu] for mu in range(M)) / tot for i in range(d)]


def _dist(a: Sequence, b: Sequence) -> float:
    return float(mpmath.sqrt(mpmath.fsum((mpmath.mpf(x) - mpmath.mpf(y)) ** 2
                                         for x, y in zip(a, b))))


def _frac_list(mat: FpMatrix) -> list:
    return [mpmath.mpf(e.value.numerator) / e.value.denominator for e in mat.entries]


def retrieval_sweep(betas: Sequence[float] = (1, 8, 32), p: int = 24, d: int = 8, M: int = 4,
                    trials: int = 20, radius: float = 0.1, seed: int = 0) -> ExperimentResult:
    res = ExperimentResult("retrieval_sweep", ["beta", "trial", "target", "dist_to_pattern",
                                               "dist_to_reference"])
    rng = SplitMix64(seed)
    per_beta: dict[str, list[float]] = {}
    for beta_f in betas:
        beta = from_float(float(beta_f), p)
        for t in range(trials):
            xi = orthonormal_patterns(d, M, p, rng)
            target = rng.below(M)
            x = noisy_query(xi, target, radius, rng)
            out = retrieval_step(RetrievalInstance(xi, x, beta))
            ref = reference_retrieval(xi, x, beta, 4 * p)
            got = _frac_list(out)
            dp = _dist(got, _frac_list(FpMatrix.column(xi.col(target))))
            dr = _dist(got, ref)
            res.rows.append([float(beta_f), t, target, dp, dr])
            per_beta.setdefault(str(float(beta_f)), []).append(dp)
    res.summary = {b: {"mean_dist_to_pattern": sum(v) / len(v),
                       "max_dist_to_pattern": max(v),
                       "within_1e-2": sum(x <= 1e-2 for x in v)}
                   for b, v in per_beta.items()}
    res.summary["max_dist_to_reference"] = max(r[4] for r in res.rows) if res.rows else 0.0
    return res


def energy_trace(p: int = 24, beta: float = 8, d: int = 8, M: int = 4, steps: int = 10,
                 radius: float = 0.3, tol: float = 1e-6, seed: int = 0) -> ExperimentResult:
    """Energy along iterated retrieval; the monotone flag is reported, not enforced."""
    res = ExperimentResult("energy_trace", ["step", "energy", "delta", "monotone"])
    rng = SplitMix64(seed)
    xi = orthonormal_patterns(d, M, p, rng)
    x = noisy_query(xi, rng.below(M), radius, rng)
    b = from_float(float(beta), p)
    prev = None
    all_ok = True
    for k in range(steps + 1):
        e = float(energy(RetrievalInstance(xi, x, b)))
        delta = 0.0 if prev is None else e - prev
        ok = prev is None or delta <= tol
        all_ok &= ok
        res.rows.append([k, e, delta, int(ok)])
        prev = e
        x = retrieval_step(RetrievalInstance(xi, x, b))
    res.summary = {"monotone": all_ok, "final_energy": prev, "beta": beta, "p": p}
    return res


def s5_harness(count: int = 100, length: int = 6, p: int = 10, d: int = 8, layers: int = 1,
               cot_steps: int = 1, seed: int = 0) -> ExperimentResult:
    """Score a random-weight decoder on oracle-labeled S5 words (balanced labels)."""
    res = ExperimentResult("s5_harness", ["instance", "label", "answer", "correct", "trace"])
    vocab = [perm_token(e) for e in ELEMENTS] + [YES, NO]
    params = random_params(vocab, d, length + cot_steps + 2, layers, p, seed, answer_rows=True)
    correct = abstain = 0
    for k in range(count):
        inst = gen_s5_word(length, k % 2 == 0, seed * 1_000_003 + k)
        out = run_word_problem(inst, params, cot_steps)
        ok = out.answer == inst.label
        correct += ok
        abstain += out.abstained
        ans = "abstain" if out.answer is None else str(out.answer).lower()
        res.rows.append([k, str(inst.label).lower(), ans, int(ok), " ".join(out.trace)])
    res.summary = {"accuracy": correct / count if count else 0.0, "abstain": abstain,
                   "count": count, "note": "random weights; no trained solution ships"}
    return res


def oracle_crosscheck(count: int = 1000, max_tree_nodes: int = 8, seed: int = 0) -> ExperimentResult:
    """Dual-oracle agreement on all three problem families; any mismatch fails."""
    res = ExperimentResult("oracle_crosscheck", ["family", "checked", "mismatches"])
    bad = 0
    for k in range(count):
        inst = gen_connectivity(3 + k % 60, seed * 7919 + k)
        bad += oracle_connectivity(inst) != bfs_connected(inst) or inst.label != bfs_connected(inst)
    res.rows.append(["connectivity", count, bad])

    bad = checked = 0
    for n in range(1, max_tree_nodes + 1):
        ts = list(all_rooted_trees(n))
        for a in ts:
            for b in ts:
                checked += 1
                bad += (ahu_canonical(a) == ahu_canonical(b)) != brute_force_iso(a, b)
    for k in range(count // 10):
        for iso in (True, False):
            try:
                inst = gen_tree_pair(3 + k % 10, iso, k % 2 == 0, seed * 104729 + k)
            except ValueError:
                continue
            checked += 1
            t1, t2 = (Tree.from_dict(inst.payload[x]) for x in ("t1", "t2"))
            bad += oracle_tree_iso(inst) != brute_force_iso(t1, t2)
    res.rows.append(["tree_iso", checked, bad])

    bad = 0
    rng = SplitMix64(seed)
    for k in range(count):
        word = [rng.choice(ELEMENTS) for _ in range(1 + rng.below(12))]
        inst = gen_s5_word(len(word), k % 2 == 0, seed * 31 + k)
        w = [tuple(x) for x in inst.payload["word"]]
        bad += compose_word(word) != compose_balanced(word)
        bad += oracle_s5(inst) != (compose_balanced(w) == (1, 2, 3, 4, 5))
    res.rows.append(["s5_word", count, bad])
    res.passed = all(r[2] == 0 for r in res.rows)
    res.summary = {"all_pass": res.passed, **{r[0]: {"checked": r[1], "mismatches": r[2]}
                                             for r in res.rows}}
    return res


EXPERIMENTS: dict[str, Callable[..., ExperimentResult]] = {
    "retrieval_sweep": retrieval_sweep,
    "energy_trace": energy_trace,
    "s5_harness": s5_harness,
    "oracle_crosscheck": oracle_crosscheck,
}


def run_experiment(name: str, **kwargs) -> ExperimentResult:
    try:
        fn = EXPERIMENTS[name]
    except KeyError:
        raise ValueError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}") from None
    return fn(**{k: v for k, v in kwargs.items() if v is not None})
