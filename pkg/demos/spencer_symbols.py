"""Symbols, Cartan characters and delta-cohomology of the same structures.

Run with ``python3 demos/spencer_symbols.py``.
"""

from jetforge.jetspace import JetSpec
from jetforge.spencer import (
    SymbolSpace,
    algebraic_prolong,
    cartan_characters,
    delta_cohomology,
    is_involutive,
    symbol_of,
)
from jetforge.structures import psi_S
from jetforge.symcore import parse
from jetforge.tensors import StructureField, TensorType


def metric(n):
    spec = JetSpec(tuple("xyz"[:n]), ())
    one = parse("1", spec.coordinates(0))
    return StructureField(spec.independents, TensorType(0, 2, "symmetric"), {(i, i): one for i in range(n)})


def area():
    spec = JetSpec(("x", "y"), ())
    return StructureField(spec.independents, TensorType(0, 2, "antisymmetric"), {(0, 1): parse("1", spec.coordinates(0))}, "w")


cases = {"so(2)": metric(2), "so(3)": metric(3), "area form": area()}
print("symbol       dim  characters  g^(1)  g^(2)  involutive")
for name, S in cases.items():
    g = symbol_of(psi_S(S), (0,) * S.n)
    sigma = cartan_characters(g)
    print(f"{name:11s} {g.dim:4d}  {str(sigma):10s}  {algebraic_prolong(g).dim:5d}  {algebraic_prolong(g, 2).dim:5d}  {is_involutive(g)}")

# Full symbols are always involutive; their characters are binomials.
full = SymbolSpace.full(3, 1, 2)
print("\nfull second-order symbol in 3 variables:", cartan_characters(full), is_involutive(full))

# For the metric symbol so(n) the cohomology group H^{1,2} is the space of
# curvature tensors, of dimension n^2 (n^2 - 1) / 12.
for n in (2, 3):
    g = symbol_of(psi_S(metric(n)), (0,) * n)
    print(f"n = {n}: dim H^(1,2) = {delta_cohomology(g, 1, 2)} (curvature tensors: {n * n * (n * n - 1) // 12})")
