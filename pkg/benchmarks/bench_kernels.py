"""Compare the compiled and pure-Python circuit kernels.

Times batched evaluation and depth measurement on a few lowered circuits,
checks that both backends give identical answers, and prints a table.

    python benchmarks/bench_kernels.py [--repeat 3] [--quick]
"""
from __future__ import annotations

import argparse
import random
import sys
import time

import numpy as np

from hopcirc.circuit import compiled_available, evaluate_batch, get_backend, measure
from hopcirc.fp import FpMatrix, FpNum
from hopcirc.lowering import Shape, encode_inputs, lower_network, lower_scalar, random_cases


def _scalar_workload(kind: str, p: int, count: int, seed: int):
    art = lower_scalar(kind, p)
    rng = random.Random(seed)

    def num():
        m = rng.randrange(1 << (p - 1), 1 << p) * rng.choice((1, -1))
        return FpNum(m, rng.randint(-p, p), p)
    cases = [[FpMatrix.column([num()]), FpMatrix.column([num()])] for _ in range(count)]
    return f"{kind} p={p}", art, cases


def _network_workload(construct: str, n: int, d: int, p: int, m: int, count: int, seed: int):
    shape = Shape(construct, n, d, p, m=m)
    art = lower_network(shape)
    return f"{construct} n={n} d={d} p={p} m={m}", art, random_cases(shape, count, random.Random(seed))


def _best(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller batches and circuits")
    args = ap.parse_args(argv)
    if not compiled_available():
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
        return 1
    cases = 64 if args.quick else 512
    work = [
        _scalar_workload("add", 8, cases * 8, 1),
        _scalar_workload("mul", 8, cases * 8, 2),
        _network_workload("hop_layer", 2, 2, 4, 1, cases, 3),
    ]
    if not args.quick:
        work.append(_network_workload("khn", 4, 4, 4, 2, cases // 4, 4))
    py, cc = get_backend("python"), get_backend("compiled")
    print(f"{'workload':32} {'gates':>9} {'batch':>6} {'op':>8} "
          f"{'python s':>9} {'compiled s':>10} {'speedup':>8}")
    ok = True
    for name, art, batch in work:
        bits = np.stack([encode_inputs(art, mats) for mats in batch])
        size = art.circuit.size
        for op, fn in (("evaluate", lambda k: evaluate_batch(art.circuit, bits, kernels=k)),
                       ("measure", lambda k: measure(art.circuit, kernels=k))):
            tp, outp = _best(lambda: fn(py), args.repeat)
            tc, outc = _best(lambda: fn(cc), args.repeat)
            same = (np.array_equal(outp, outc) if op == "evaluate"
                    else (outp.size, outp.concrete_depth, outp.symbolic_depth)
                    == (outc.size, outc.concrete_depth, outc.symbolic_depth))
            ok &= same
            print(f"{name:32} {size:9d} {len(batch) if op == 'evaluate' else 1:6d} {op:>8} "
                  f"{tp:9.3f} {tc:10.3f} {tp / tc:7.1f}x{'' if same else '  MISMATCH'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
