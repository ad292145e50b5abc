"""Lowering of float arithmetic and networks to threshold circuits."""
from .formulas import FormulaResult, KNOWN_TAGS, formula_details, paper_depth_formula
from .network import (CONSTRUCTS, OP_CHARGES, BitMatrix, Instance, LoweredArtifact,
                      Lowerer, Shape, lower_macro, lower_network, lower_scalar)
from .reference import (input_layout, network_spec, random_cases, random_inputs,
                        reference_forward, shape_of_spec, spec_inputs)
from .scalar import ConcreteLimitError, SCALAR_KINDS, max_concrete_p, scalar_template
from .verify import (Divergence, VerifyReport, check_instance, decode_output,
                     encode_inputs, run_artifact, verify_equivalence)

__all__ = [
    "BitMatrix", "CONSTRUCTS", "ConcreteLimitError", "Divergence", "FormulaResult",
    "Instance", "KNOWN_TAGS", "LoweredArtifact", "Lowerer", "OP_CHARGES",
    "SCALAR_KINDS", "Shape", "VerifyReport", "check_instance", "decode_output",
    "encode_inputs", "formula_details", "input_layout", "lower_macro",
    "lower_network", "lower_scalar", "max_concrete_p", "network_spec", "random_cases",
    "paper_depth_formula", "random_inputs", "reference_forward", "run_artifact",
    "scalar_template", "shape_of_spec", "spec_inputs", "verify_equivalence",
]
