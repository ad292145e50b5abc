"""Command-line entry point: ``hopcirc <command> ...``.

Exit codes: 0 success, 1 verification or experiment failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import random
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__
from .circuit import CircuitError, backend_name, measure, netlist
from .fp import FpMatrix, load_fixture
from .lowering import (CONSTRUCTS, LoweredArtifact, Shape, formula_details,
                       lower_network, random_cases, verify_equivalence)
from .lowering.scalar import ConcreteLimitError
from .netspec import SpecFormatError, scalar_from_json

# Defaults echoed into every report so a run describes its own pass criteria.
TOLERANCES = {
    "exp_sqrt_relative": "2^-p",
    "softmax_row_sum_relative": "2^(2-p)",
    "retrieval_distance": 1e-2,
    "energy_non_increase": 1e-6,
    "cot_distribution_relative": "2^(2-p)",
    "circuit_equivalence": "bit-exact",
    "depth_formula": "coefficientwise equality",
}

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# helpers --------------------------------------------------------------------

_OUTPUT_KEYS = ("out", "report")


def _config(args: argparse.Namespace) -> dict:
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())
            if k not in ("func",) and not callable(v)}


def _envelope(args: argparse.Namespace, body: dict) -> dict:
    cfg = _config(args)
    # where results are written does not change them
    hashed = {k: v for k, v in cfg.items() if k not in _OUTPUT_KEYS}
    digest = hashlib.sha256(json.dumps(hashed, sort_keys=True, default=str).encode()).hexdigest()
    return {"tool": "hopcirc", "version": __version__, "command": args.command,
            "config": cfg, "config_hash": digest[:16], "seed": cfg.get("seed"),
            "backend": backend_name(), "tolerances": TOLERANCES, **body}


def _write_json(path: Optional[Path], data: dict) -> None:
    text = json.dumps(data, indent=1, sort_keys=True, default=str) + "\n"
    if path is None:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _shape(args: argparse.Namespace) -> Shape:
    comps = tuple(c for c in (args.components or "").split(",") if c)
    try:
        return Shape(args.construct, args.n, args.d, args.p, args.m, args.d_phi,
                     args.normalization, comps, not args.stored_patterns)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _depth_block(art: LoweredArtifact, shape: Shape, expand: bool = False) -> dict:
    meas = measure(art.circuit, expand_groups=expand)
    info = formula_details(shape.construct, shape.m)
    measured = meas.symbolic_depth
    block = {
        "construct": shape.construct, "shape": shape.to_dict(),
        "size": meas.size, "concrete_depth": meas.concrete_depth,
        "measured_depth": str(measured), "measured_depth_ascii": measured.ascii(),
        "formula_depth": str(info.depth), "formula_depth_ascii": info.depth.ascii(),
        "dominant_path": meas.dominant,
        # expanded groups charge the ops inside f_i, so no formula applies
        "verdict": "INFO" if expand else "PASS" if measured == info.depth else "FAIL",
    }
    if info.alternate is not None:
        block["alternate_formula"] = str(info.alternate)
        block["note"] = info.note
    if meas.violations:
        block["violations"] = meas.violations[:20]
    return block


def _print_depth(block: dict) -> None:
    print(f"construct:      {block['construct']}")
    print(f"gates:          {block['size']}  (concrete depth {block['concrete_depth']})")
    print(f"measured depth: {block['measured_depth']}")
    print(f"formula depth:  {block['formula_depth']}")
    if "alternate_formula" in block:
        print(f"alternate:      {block['alternate_formula']}  ({block['note']})")
    print(f"verdict:        {block['verdict']}")


# commands -------------------------------------------------------------------

def cmd_compile(args: argparse.Namespace) -> int:
    shape = _shape(args)
    art = lower_network(shape)
    block = _depth_block(art, shape)
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w") as fh:
            netlist.dump(art.circuit, fh, art.to_meta())
        block["netlist"] = str(args.out)
    _print_depth(block)
    _write_json(args.report, _envelope(args, block))
    return EXIT_OK if block["verdict"] == "PASS" else EXIT_FAIL


def cmd_depth(args: argparse.Namespace) -> int:
    if args.netlist is not None:
        art = _load_artifact(args.netlist)
        if art.shape is None:
            meas = measure(art.circuit, expand_groups=args.expand_groups)
            print(f"gates: {meas.size}\nmeasured depth: {meas.symbolic_depth}")
            return EXIT_OK
        shape = art.shape
    else:
        if args.construct is None:
            raise UsageError("depth needs --construct or --netlist")
        shape = _shape(args)
        art = lower_network(shape)
    block = _depth_block(art, shape, args.expand_groups)
    _print_depth(block)
    _write_json(args.report, _envelope(args, block))
    return EXIT_OK if block["verdict"] != "FAIL" else EXIT_FAIL


def _load_artifact(path: Path) -> LoweredArtifact:
    try:
        with open(path) as fh:
            circuit, meta = netlist.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read netlist: {exc}") from None
    if meta is None:
        raise UsageError("netlist has no '# meta' line; recompile it with `hopcirc compile`")
    return LoweredArtifact.from_meta(circuit, meta)


def cmd_verify(args: argparse.Namespace) -> int:
    art = _load_artifact(args.netlist)
    if art.shape is None:
        raise UsageError("netlist does not describe a network construct")
    if args.inputs:
        try:
            mats = [load_fixture(p) for p in args.inputs]
        except (OSError, ValueError) as exc:
            raise UsageError(f"bad input fixture: {exc}") from None
        if len(mats) != len(art.layout):
            raise UsageError(f"expected {len(art.layout)} fixtures in order "
                             f"{[n for n, _, _ in art.layout]}, got {len(mats)}")
        for (name, r, c), m in zip(art.layout, mats):
            if m.shape != (r, c) or m.p != art.p:
                raise UsageError(f"fixture for {name} must be {r}x{c} at p={art.p}, "
                                 f"got {m.shape[0]}x{m.shape[1]} at p={m.p}")
        cases = [mats]
    else:
        cases = _random_cases(art.shape, args.random, args.seed)
    rep = verify_equivalence(art, cases)
    print(rep.summary())
    verdict = "PASS" if rep.ok else "FAIL"
    print(f"verdict: {verdict}")
    body = {"verdict": verdict, "cases": rep.cases, "agreed": rep.agreed,
            "measured_depth": str(rep.measured_depth), "formula_depth": str(rep.formula_depth),
            "errors": rep.errors}
    if rep.divergence is not None:
        body["divergence"] = vars(rep.divergence)
    _write_json(args.report, _envelope(args, body))
    return EXIT_OK if rep.ok else EXIT_FAIL


def _random_cases(shape: Shape, count: int, seed: int) -> list[list[FpMatrix]]:
    return random_cases(shape, count, random.Random(seed))


def cmd_gen(args: argparse.Namespace) -> int:
    from .problems import gen_connectivity, gen_s5_word, gen_tree_pair, write_jsonl
    out = []
    for k in range(args.count):
        seed = args.seed * 1_000_003 + k
        want = {"true": True, "false": False}.get(args.label, k % 2 == 0)
        if args.kind == "connectivity":
            # the generator decides the label; retry seeds until it matches
            for j in range(1000):
                inst = gen_connectivity(args.size, seed + j * 7_919_993)
                if args.label == "any" or inst.label == want:
                    break
            else:
                raise UsageError(f"could not reach label {want} at size {args.size}")
        elif args.kind == "tree_iso":
            try:
                inst = gen_tree_pair(args.size, want, args.colored, seed)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        else:
            inst = gen_s5_word(args.size, want, seed)
        out.append(inst)
    if args.out is None:
        write_jsonl(out, sys.stdout)
    else:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w") as fh:
            write_jsonl(out, fh)
        print(f"wrote {len(out)} {args.kind} instances to {args.out}")
    return EXIT_OK


def cmd_retrieve(args: argparse.Namespace) -> int:
    from .hopfield import RetrievalInstance, energy, retrieval_step
    from .kernel import kernel_energy, kernel_retrieval_step
    try:
        xi = load_fixture(args.patterns)
        x = load_fixture(args.query)
        W = load_fixture(args.kernel_w) if args.kernel_w else None
        beta = scalar_from_json(_number_or_text(args.beta), xi.p)
        inst = RetrievalInstance(xi, x, beta)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    energies = []
    for _ in range(args.steps):
        if x.cols == 1:
            e = kernel_energy(inst, W) if W is not None else energy(inst)
            energies.append(float(e))
        x = kernel_retrieval_step(inst, W) if W is not None else retrieval_step(inst)
        inst = RetrievalInstance(xi, x, beta)
    sys.stdout.write(str(x))
    if args.energy and energies:
        print("energy: " + " ".join(f"{e:.9g}" for e in energies))
    return EXIT_OK


def _number_or_text(s: str) -> Any:
    try:
        return float(s)
    except ValueError:
        return s


def cmd_cot_run(args: argparse.Namespace) -> int:
    from .cot import load_params, run_word_problem
    from .problems import ProblemInstance, read_jsonl
    try:
        params = load_params(args.params)
        text = Path(args.instance).read_text()
        try:
            insts = [ProblemInstance.from_json(text)]
        except json.JSONDecodeError:
            with open(args.instance) as fh:
                insts = list(read_jsonl(fh))
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from None
    rows = []
    for inst in insts:
        try:
            res = run_word_problem(inst, params, args.steps)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        ans = "abstain" if res.answer is None else str(res.answer).lower()
        print(f"trace: {' '.join(res.trace)}  answer: {ans}  label: {str(inst.label).lower()}")
        rows.append({"trace": list(res.trace), "answer": res.answer, "label": inst.label})
    _write_json(args.report, _envelope(args, {"results": rows}))
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    from .experiments import EXPERIMENTS, run_experiment
    if args.name not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {args.name!r}; choose from {sorted(EXPERIMENTS)}")
    kwargs: dict[str, Any] = {"seed": args.seed}
    for item in args.param or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {item!r}")
        try:
            kwargs[key] = json.loads(val)
        except json.JSONDecodeError:
            kwargs[key] = val
    try:
        res = run_experiment(args.name, **kwargs)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / f"{res.name}.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(res.columns)
        w.writerows(res.rows)
    body = {"experiment": res.name, "passed": res.passed, "summary": res.summary,
            "verdict": "PASS" if res.passed else "FAIL", "parameters": kwargs}
    _write_json(out_dir / f"{res.name}.json", _envelope(args, body))
    print(json.dumps(res.summary, indent=1, sort_keys=True, default=str))
    print(f"wrote {out_dir / (res.name + '.csv')} and {out_dir / (res.name + '.json')}")
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_report(args: argparse.Namespace) -> int:
    files: list[Path] = []
    for p in args.paths:
        files.extend(sorted(p.glob("*.json")) if p.is_dir() else [p])
    if not files:
        raise UsageError("no report files found")
    failed = 0
    for f in files:
        try:
            data = json.loads(f.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"{f}: {exc}") from None
        verdict = data.get("verdict", "-")
        failed += verdict == "FAIL"
        what = data.get("construct") or data.get("experiment") or data.get("command", "?")
        print(f"{verdict:5} {data.get('command', '?'):10} {what:18} "
              f"v{data.get('version', '?')} cfg={data.get('config_hash', '?')} {f}")
    print(f"{len(files)} reports, {failed} failed")
    return EXIT_FAIL if failed else EXIT_OK


# parser ---------------------------------------------------------------------

def _add_shape(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--construct", choices=CONSTRUCTS, required=required)
    p.add_argument("--n", type=int, default=2, help="rows of the input (sequence length)")
    p.add_argument("--d", type=int, default=2, help="hidden dimension")
    p.add_argument("--p", type=int, default=4, help="precision in bits")
    p.add_argument("--m", type=int, default=1, help="layers for mhn/khn")
    p.add_argument("--d-phi", type=int, default=None, help="feature dimension for kernel constructs")
    p.add_argument("--normalization", choices=("beta_rowsum", "softmax"), default="beta_rowsum")
    p.add_argument("--components", default=None,
                   help="comma list of fnn/identity, m+1 entries (mhn/khn)")
    p.add_argument("--stored-patterns", action="store_true",
                   help="separate stored patterns per layer instead of self-attention")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hopcirc", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"hopcirc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="lower a construct to a netlist and check its depth")
    _add_shape(p)
    p.add_argument("--out", type=Path, help="netlist output path")
    p.add_argument("--report", type=Path, help="JSON report path")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("depth", help="symbolic depth of a construct or netlist")
    _add_shape(p, required=False)
    p.add_argument("--netlist", type=Path)
    p.add_argument("--expand-groups", action="store_true",
                   help="charge the ops inside component functions instead of d_f")
    p.add_argument("--report", type=Path)
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("verify", help="compare a netlist against the reference forward pass")
    p.add_argument("--netlist", type=Path, required=True)
    p.add_argument("--inputs", type=Path, nargs="*", help="matrix fixtures in layout order")
    p.add_argument("--random", type=int, default=50, help="random cases when no fixtures")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", type=Path)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate problem instances as JSON lines")
    p.add_argument("--kind", choices=("connectivity", "tree_iso", "s5_word"), required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--size", type=int, default=8, help="vertices, tree nodes or word length")
    p.add_argument("--label", choices=("true", "false", "mixed", "any"), default="mixed")
    p.add_argument("--colored", action="store_true", help="colored trees")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("retrieve", help="iterate the retrieval update on fixtures")
    p.add_argument("--patterns", type=Path, required=True, help="d x M fixture")
    p.add_argument("--query", type=Path, required=True, help="d x L fixture")
    p.add_argument("--beta", required=True, help="number or fp(p=.., m=.., e=..) literal")
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--kernel-w", type=Path, help="feature map W fixture (kernel retrieval)")
    p.add_argument("--energy", action="store_true", help="print the energy before each step")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("cot-run", help="run the next-token harness on an S5 instance")
    p.add_argument("--params", type=Path, required=True)
    p.add_argument("--instance", type=Path, required=True)
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--report", type=Path)
    p.set_defaults(func=cmd_cot_run)

    p = sub.add_parser("experiment", help="run a named experiment, write CSV and JSON")
    p.add_argument("name")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="experiment argument (JSON value), repeatable")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", help="summarize JSON reports")
    p.add_argument("paths", type=Path, nargs="+")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"hopcirc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SpecFormatError, ConcreteLimitError, CircuitError) as exc:
        print(f"hopcirc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, SpecFormatError) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
