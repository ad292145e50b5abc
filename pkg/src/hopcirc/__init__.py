"""Exact p-bit floating point Hopfield models and their threshold-circuit lowering."""
__version__ = "0.1.0"
