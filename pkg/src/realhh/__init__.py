"""Desk-scale algebraic shadows of Real topological Hochschild homology."""

from .algebra import FinAlgebra, Refusal
from .linalg import CoeffRing, FgModule, SchemaError

__all__ = ["CoeffRing", "FgModule", "FinAlgebra", "Refusal", "SchemaError"]
__version__ = "0.1.0"
