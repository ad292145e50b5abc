"""p-bit floating point arithmetic and dense linear algebra."""
from .number import (FpFlags, FpNum, Ordering, all_values, e_max, e_min,
                     fp_add, fp_cmp, fp_div, fp_mul, fp_neg, fp_sub,
                     from_float, iter_add, iter_mul, max_value, min_positive,
                     parse_literal, round_dyadic, round_p)
from .transcendental import fp_exp, fp_sqrt
from .matrix import FpMatrix, format_fixture, load_fixture, parse_fixture
from .linalg import (dot, lse, mat_add, matmul, relu, relu_scalar,
                     softmax_cols, softmax_rows)

__all__ = [
    "FpFlags", "FpNum", "Ordering", "all_values", "e_max", "e_min",
    "fp_add", "fp_cmp", "fp_div", "fp_mul", "fp_neg", "fp_sub", "from_float",
    "iter_add", "iter_mul", "max_value", "min_positive", "parse_literal",
    "round_dyadic", "round_p", "fp_exp", "fp_sqrt", "FpMatrix",
    "format_fixture", "load_fixture", "parse_fixture", "dot", "lse",
    "mat_add", "matmul", "relu", "relu_scalar", "softmax_cols", "softmax_rows",
]
