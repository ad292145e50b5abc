"""Text netlist format.

Header lines start with ``#``; then one gate per line::

    <id> <kind> <fan-in ids...> [@<region>]

Kinds: ``input const0 const1 not and or maj macro:<i> proj:<bit>``.
Headers carry precision, input/output lists, macro signatures, regions,
groups and an optional JSON metadata blob, so the round trip is lossless.
"""
from __future__ import annotations

import json
from typing import Any, Optional, TextIO

import numpy as np

from .depth import DepthExpr
from .ir import Circuit, Group, Kind, MacroSpec, Region

__all__ = ["dump", "dumps", "load", "loads"]

_NAMES = {Kind.INPUT: "input", Kind.CONST0: "const0", Kind.CONST1: "const1",
          Kind.NOT: "not", Kind.AND: "and", Kind.OR: "or", Kind.MAJ: "maj"}
_KINDS = {v: k for k, v in _NAMES.items()}


def _ids(xs) -> str:
    return ",".join(str(int(x)) for x in xs) or "-"


def _parse_ids(s: str) -> list[int]:
    return [] if s == "-" else [int(x) for x in s.split(",")]


def dumps(c: Circuit, meta: Optional[dict[str, Any]] = None) -> str:
    lines = [f"# circuit p={c.p} gates={c.size}",
             f"# inputs {_ids(c.inputs)}",
             f"# outputs {_ids(c.outputs)}"]
    for m in c.macros:
        lines.append(f"# macro {m.tag} {m.n_operands} {m.out_width}")
    for g in c.groups:
        lines.append(f"# group {g.name} {g.charge.ascii().replace(' ', '')}")
    for r in c.regions:
        lines.append(f"# region {r.op} {r.charge.ascii().replace(' ', '')} {r.group}")
    if meta is not None:
        lines.append("# meta " + json.dumps(meta, sort_keys=True, separators=(",", ":")))
    kinds = c.kind.tolist()
    ptr = c.ptr.tolist()
    idx = c.idx.tolist()
    param = c.param.tolist()
    region = c.region.tolist()
    for g, k in enumerate(kinds):
        k = Kind(k)
        if k == Kind.MACRO:
            name = f"macro:{param[g]}"
        elif k == Kind.PROJ:
            name = f"proj:{param[g]}"
        else:
            name = _NAMES[k]
        parts = [str(g), name]
        fan = idx[ptr[g]:ptr[g + 1]]
        if fan:
            parts.append(" ".join(map(str, fan)))
        if region[g] >= 0:
            parts.append(f"@{region[g]}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def dump(c: Circuit, fh: TextIO, meta: Optional[dict[str, Any]] = None) -> None:
    fh.write(dumps(c, meta))


def _depth(text: str) -> DepthExpr:
    return DepthExpr.parse(text.replace("+", " + "))


def loads(text: str) -> tuple[Circuit, Optional[dict[str, Any]]]:
    """Parse a netlist; returns the circuit and its metadata (or None)."""
    p = None
    inputs: list[int] = []
    outputs: list[int] = []
    macros, groups, regions = [], [], []
    meta = None
    kind, count, idx, param, region = [], [], [], [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            head, _, rest = line[1:].strip().partition(" ")
            if head == "circuit":
                fields = dict(f.split("=") for f in rest.split())
                p = int(fields["p"])
            elif head == "inputs":
                inputs = _parse_ids(rest.strip())
            elif head == "outputs":
                outputs = _parse_ids(rest.strip())
            elif head == "macro":
                tag, n, w = rest.split()
                macros.append(MacroSpec(tag, int(n), int(w)))
            elif head == "group":
                name, charge = rest.rsplit(" ", 1)
                groups.append(Group(name, _depth(charge)))
            elif head == "region":
                op, charge, grp = rest.split()
                regions.append(Region(op, _depth(charge), int(grp)))
            elif head == "meta":
                meta = json.loads(rest)
            continue
        toks = line.split()
        g = int(toks[0])
        if g != len(kind):
            raise ValueError(f"line {lineno}: gate ids must be consecutive")
        name = toks[1]
        r = -1
        if toks[-1].startswith("@"):
            r = int(toks[-1][1:])
            toks = toks[:-1]
        fan = [int(t) for t in toks[2:]]
        if ":" in name:
            base, arg = name.split(":")
            k = {"macro": Kind.MACRO, "proj": Kind.PROJ}[base]
            prm = int(arg)
        else:
            k = _KINDS[name]
            prm = 0
        kind.append(int(k))
        count.append(len(fan))
        idx.extend(fan)
        param.append(prm)
        region.append(r)
    if p is None:
        raise ValueError("missing '# circuit' header")
    ptr = np.zeros(len(kind) + 1, dtype=np.int64)
    np.cumsum(count, out=ptr[1:])
    c = Circuit(np.array(kind, dtype=np.int8), ptr, np.array(idx, dtype=np.int64),
                np.array(param, dtype=np.int64), np.array(region, dtype=np.int64),
                inputs, outputs, p, macros, regions, groups)
    return c, meta


def load(fh: TextIO) -> tuple[Circuit, Optional[dict[str, Any]]]:
    return loads(fh.read())
