"""Exact jet-bundle calculus: prolongation, Lie equations of geometric
structures, Spencer symbols, orbit distributions and differential invariants."""

__version__ = "0.1.0"

from .errors import JetforgeError
from .jetspace import JetSpec, MultiIndex, PolyJet
from .prolongation import VectorField, bracket, jet_bracket, prolong_field
from .symcore import Expr, parse
from .tensors import StructureField, TensorType

__all__ = [
    "Expr",
    "JetSpec",
    "JetforgeError",
    "MultiIndex",
    "PolyJet",
    "StructureField",
    "TensorType",
    "VectorField",
    "__version__",
    "bracket",
    "jet_bracket",
    "parse",
    "prolong_field",
]
