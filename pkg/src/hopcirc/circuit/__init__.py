"""Threshold circuits: IR, evaluation, depth measurement and netlists."""
from .analysis import (CircuitError, Measurement, evaluate, evaluate_batch,
                       evaluate_full, measure, validate)
from .backend import backend_name, compiled_available, get_backend
from .depth import (BASIS, D_ADD, D_EXP, D_F, D_MUL, D_SQRT, D_STD, UNIT, ZERO,
                    DepthExpr)
from .ir import MACRO_TAGS, Builder, Circuit, Gate, Group, Kind, MacroSpec, Region
from .netlist import dump, dumps, load, loads

__all__ = [
    "BASIS", "D_ADD", "D_EXP", "D_F", "D_MUL", "D_SQRT", "D_STD", "UNIT", "ZERO",
    "DepthExpr", "Builder", "Circuit", "CircuitError", "Gate", "Group", "Kind",
    "MACRO_TAGS", "MacroSpec", "Measurement", "Region", "backend_name",
    "compiled_available", "dump", "dumps", "evaluate", "evaluate_batch",
    "evaluate_full", "get_backend", "load", "loads", "measure", "validate",
]
