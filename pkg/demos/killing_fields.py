"""Infinitesimal and finite automorphisms of metrics and an area form.

Run with ``python3 demos/killing_fields.py``.
"""

from fractions import Fraction as F

from jetforge.jetspace import JetSpec, PolyJet
from jetforge.prolongation import VectorField
from jetforge.structures import (
    automorphism_test,
    isotropy_fiber,
    lie_derivative,
    lie_equation,
    nonlinear_symbol_system,
    psi_S,
)
from jetforge.symcore import parse
from jetforge.tensors import StructureField, TensorType

plane = JetSpec(("x", "y"), ())
sym = TensorType(0, 2, "symmetric")


def B(text):
    return parse(text, plane.coordinates(0))


flat = StructureField(("x", "y"), sym, {(0, 0): B("1"), (1, 1): B("1")})
conformal = B("4/(1+x^2+y^2)^2")
sphere = StructureField(("x", "y"), sym, {(0, 0): conformal, (1, 1): conformal})
area = StructureField(("x", "y"), TensorType(0, 2, "antisymmetric"), {(0, 1): B("1")}, "w")

print("First-order equations of the flat metric:")
for eq in psi_S(flat).format_equations():
    print("   ", eq, "= 0")

point = (F(1, 2), F(-1, 3))
print("\nsolution dimension of the Lie equation at", tuple(map(str, point)))
print("structure   q=1  q=2  q=3")
for name, S in (("flat", flat), ("sphere", sphere), ("area", area)):
    dims = [lie_equation(S, q).solution_dimension(point) for q in (1, 2, 3)]
    print(f"{name:10s} " + "  ".join(f"{d:3d}" for d in dims))
# Both metrics stay at three (their Killing fields); the area form keeps
# growing because divergence-free fields form an infinite family.

print("\nisotropy at the origin: flat", len(isotropy_fiber(psi_S(flat), (0, 0))), "area", len(isotropy_fiber(psi_S(area), (0, 0))))

rotation = VectorField.parse(plane, ["(1 + x^2 - y^2)/2", "x*y"])
print("\nLie derivative of the sphere metric along", rotation)
print("  components:", {k: str(v) for k, v in lie_derivative(rotation, sphere).components.items()})

# Finite side: jets of maps.  A quarter turn preserves both metrics, a
# dilation preserves neither.
quarter = PolyJet.affine([[0, -1], [1, 0]], point, (F(1, 3), F(1, 2)), 3)
dilation = PolyJet.affine([[2, 0], [0, 2]], point, (F(1), F(-2, 3)), 3)
for name, Z in (("quarter turn", quarter), ("dilation", dilation)):
    print(f"{name}: flat {automorphism_test(Z, flat, 2)}, sphere {automorphism_test(Z, sphere, 2)}")

# The second-order part of a 2-jet automorphism of the flat metric is forced
# (no freedom), while for the area form it ranges over an affine space.
for name, S in (("flat", flat), ("area", area)):
    system = nonlinear_symbol_system(PolyJet.identity((F(0), F(0)), 1), S, 1)
    print(f"free second-order coefficients for {name}: {system.solution_dimension()}")
