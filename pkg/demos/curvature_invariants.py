"""Plane curves under rigid motions: from prolonged generators to curvature.

Run with ``python3 demos/curvature_invariants.py``.
"""

from jetforge.invariants import (
    FormalDerivation,
    InvariantCandidate,
    admissibility_test,
    finiteness_span_check,
    formal_derive,
    search_invariants,
    verify_invariant,
)
from jetforge.jetspace import JetSpec
from jetforge.orbits import ActionSpace, PseudoAlgebraSpec, build_distribution, kernel_filtration, rank_table
from jetforge.prolongation import VectorField, prolong_field
from jetforge.symcore import parse

curves = JetSpec(("x",), ("u",))
space = ActionSpace.sections(("x",), ("u",))
generators = {
    "translation in x": VectorField.parse(curves, ["1"], ["0"]),
    "translation in u": VectorField.parse(curves, ["0"], ["1"]),
    "rotation": VectorField.parse(curves, ["-u"], ["x"]),
}
se2 = PseudoAlgebraSpec.finite_basis(list(generators.values()))


def jet(text, k=4):
    return parse(text, curves.with_order(k))


print("Prolonged generators up to second order")
for name, v in generators.items():
    pf = prolong_field(v, 2)
    coeffs = ", ".join(f"{s.name}: {pf.coefficient(s)}" for s in curves.coordinates(2))
    print(f"  {name:18s} {coeffs}")

# Orbits of the prolonged action.  The codimension counts how many
# independent invariants live on each jet space.
frame = build_distribution(se2, space, 4)
table = rank_table(frame, samples=5, seed=0)
print("\norder  ambient  rank  codim")
for e in table.orders:
    print(f"{e['order']:5d}  {e['ambient']:7d}  {e['rank']:4d}  {e['codim']:5d}")
filt = kernel_filtration(frame, samples=3)
print("isotropy kernels by order:", filt.kernel_dims, "stable from order", filt.stabilization_order)

# One invariant appears at order two.  The ansatz search finds it exactly.
Q = jet("(1+u1^2)^3")
(kappa2,) = search_invariants(se2, space, 2, 6, Q)
print("\ninvariant found at order 2:", kappa2.expr)

# Arclength differentiation is admissible; plain D_x is not.
ds = FormalDerivation((jet("(1+u1^2)^(-1/2)"),))
print("arclength derivation admissible:", admissibility_test(ds, se2, space))
print("plain D_x admissible:", admissibility_test(FormalDerivation((jet("1"),)), se2, space))

kappa2_s = formal_derive(ds, kappa2, space)
print("d/ds of the squared curvature:", kappa2_s.expr)
print("  still invariant:", verify_invariant(kappa2_s, se2, space))

# At order three the search with the same denominator finds two invariants,
# one for each unit of codimension.
found = search_invariants(se2, space, 3, 3, Q)
print("\ninvariants found at order 3:")
for f in found:
    print("  ", f.expr)

# The squared curvature and its arclength derivative cut out the orbits of
# order three: their differentials have the rank of the codimension.
report = finiteness_span_check([kappa2], [ds], se2, space, 2, samples=6, seed=0)
print("\nfiniteness at order 3: rank", report.generic_rank, "codim", report.generic_codim, "passed", report.passed)
inv3 = InvariantCandidate(3, kappa2_s.expr)
report = finiteness_span_check([kappa2, inv3], [ds], se2, space, 3, samples=6, seed=0)
print("finiteness at order 4: rank", report.generic_rank, "codim", report.generic_codim, "passed", report.passed)
