"""JSON files describing networks, matrices and scalars.

A network file looks like::

    {"precision": 6, "m": 1, "beta": "fp(p=6, m=32, e=-5)",
     "normalization": "softmax",
     "layers": [{"W_Q": "2 2 6\\n32:-5 0:0\\n0:0 32:-5", "W_K": ..., "W_V_tilde": ...}],
     "components": ["identity", {"W_1": ..., "W_2": ..., "b_1": ..., "b_2": ...}]}

Matrices are fixture text inline, ``{"file": "path"}`` (relative to the JSON
file), or nested lists of numbers rounded to the precision. Kernel layers add
``W`` (and optionally ``D_phi``) and use ``W_V``. A layer carrying ``Y`` turns
the whole network into stored-pattern mode.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, Union

from .fp import FpMatrix, FpNum, format_fixture, parse_fixture, parse_literal, round_p
from .hopfield import (FNN, HopfieldLayerParams, Identity, KernelLayerParams,
                       NetworkSpec)

__all__ = ["matrix_from_json", "matrix_to_json", "scalar_from_json", "scalar_to_json",
           "spec_from_dict", "spec_to_dict", "load_spec", "dump_spec", "SpecFormatError"]


class SpecFormatError(ValueError):
    pass


def scalar_from_json(value: Any, p: int) -> FpNum:
    if isinstance(value, str):
        x = parse_literal(value.strip())
        if x.p != p:
            raise SpecFormatError(f"literal {value!r} has precision {x.p}, expected {p}")
        return x
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return round_p(Fraction(value), p)
    raise SpecFormatError(f"cannot read a scalar from {value!r}")


def scalar_to_json(x: FpNum) -> str:
    return str(x)


def matrix_from_json(value: Any, p: int, base: Optional[Path] = None) -> FpMatrix:
    if isinstance(value, str):
        mat = parse_fixture(value)
    elif isinstance(value, dict) and "file" in value:
        path = Path(value["file"])
        if base is not None and not path.is_absolute():
            path = base / path
        mat = parse_fixture(path.read_text())
    elif isinstance(value, list) and value and all(isinstance(r, list) for r in value):
        rows = [[scalar_from_json(x, p) for x in r] for r in value]
        return FpMatrix.from_rows(rows, p)
    else:
        raise SpecFormatError(f"cannot read a matrix from {value!r}")
    if mat.p != p:
        raise SpecFormatError(f"matrix has precision {mat.p}, expected {p}")
    return mat


def matrix_to_json(mat: FpMatrix) -> str:
    return format_fixture(mat)


def _component(value: Any, p: int, base: Optional[Path]):
    if value in (None, "identity") or (isinstance(value, dict) and value.get("kind") == "identity"):
        return Identity()
    if isinstance(value, dict):
        try:
            return FNN(*(matrix_from_json(value[k], p, base) for k in ("W_1", "W_2", "b_1", "b_2")))
        except KeyError as exc:
            raise SpecFormatError(f"fnn component is missing {exc}") from None
    raise SpecFormatError(f"unknown component {value!r}")


def spec_from_dict(data: dict, base: Optional[Path] = None) -> NetworkSpec:
    try:
        p = int(data["precision"])
        layers_in = data["layers"]
    except KeyError as exc:
        raise SpecFormatError(f"network file is missing {exc}") from None
    norm = data.get("normalization", "softmax")
    default_beta = data.get("beta")
    layers = []
    stored = []
    for k, lay in enumerate(layers_in):
        beta_v = lay.get("beta", default_beta)
        if beta_v is None:
            raise SpecFormatError(f"layer {k} has no beta")
        beta = scalar_from_json(beta_v, p)
        mat = lambda key: matrix_from_json(lay[key], p, base)  # noqa: E731
        try:
            if "W" in lay:
                layer = KernelLayerParams(mat("W_Q"), mat("W_K"), mat("W_V"), mat("W"), beta,
                                          lay.get("normalization", norm))
                if "D_phi" in lay and int(lay["D_phi"]) != layer.d_phi:
                    raise SpecFormatError(f"layer {k}: D_phi does not match W_Q")
            else:
                layer = HopfieldLayerParams(mat("W_Q"), mat("W_K"), mat("W_V_tilde"), beta,
                                            lay.get("normalization", norm))
        except KeyError as exc:
            raise SpecFormatError(f"layer {k} is missing {exc}") from None
        layers.append(layer)
        if "Y" in lay:
            stored.append(mat("Y"))
    if stored and len(stored) != len(layers):
        raise SpecFormatError("either every layer or no layer carries Y")
    if "m" in data and int(data["m"]) != len(layers):
        raise SpecFormatError(f"m={data['m']} but {len(layers)} layers given")
    comps_in = data.get("components", ["identity"] * (len(layers) + 1))
    comps = [_component(c, p, base) for c in comps_in]
    try:
        return NetworkSpec(tuple(layers), tuple(comps), tuple(stored) if stored else None)
    except ValueError as exc:
        raise SpecFormatError(str(exc)) from None


def spec_to_dict(spec: NetworkSpec) -> dict:
    layers = []
    for i, lay in enumerate(spec.layers):
        if isinstance(lay, KernelLayerParams):
            d = {"W_Q": matrix_to_json(lay.W_Q), "W_K": matrix_to_json(lay.W_K),
                 "W_V": matrix_to_json(lay.W_V), "W": matrix_to_json(lay.W), "D_phi": lay.d_phi}
        else:
            d = {"W_Q": matrix_to_json(lay.W_Q), "W_K": matrix_to_json(lay.W_K),
                 "W_V_tilde": matrix_to_json(lay.W_V_tilde)}
        d["beta"] = scalar_to_json(lay.beta)
        d["normalization"] = lay.normalization.value
        if spec.stored_patterns is not None:
            d["Y"] = matrix_to_json(spec.stored_patterns[i])
        layers.append(d)
    comps: list[Any] = []
    for c in spec.components:
        if isinstance(c, FNN):
            comps.append({k: matrix_to_json(getattr(c, k)) for k in ("W_1", "W_2", "b_1", "b_2")})
        else:
            comps.append("identity")
    return {"precision": spec.p, "m": spec.m, "beta": scalar_to_json(spec.layers[0].beta),
            "normalization": spec.layers[0].normalization.value,
            "layers": layers, "components": comps}


def load_spec(path: Union[str, Path]) -> NetworkSpec:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"{path}: {exc}") from None
    return spec_from_dict(data, path.parent)


def dump_spec(spec: NetworkSpec, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=1) + "\n")
