from fractions import Fraction
from math import comb

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from jetforge.acceptance import covariance_holds, covariance_pairs
from jetforge.errors import PrerequisiteNotAutomorphism
from jetforge.jetspace import JetSpec, MultiIndex, PolyJet, multi_indices_upto
from jetforge.prolongation import VectorField, bracket
from jetforge.sampling import SplitMix64
from jetforge.structures import (
    automorphism_test,
    isotropy_fiber,
    lie_derivative,
    lie_equation,
    nonlinear_symbol_system,
    phi_S,
    prolong_system,
    psi_S,
)
from jetforge.symcore import linalg, parse
from jetforge.tensors import StructureField, TensorType

F = Fraction
BASE2 = JetSpec(("x", "y"), ())
BASE3 = JetSpec(("x", "y", "z"), ())
SYM = TensorType(0, 2, "symmetric")
ANTI = TensorType(0, 2, "antisymmetric")


def B(text, spec=BASE2):
    return parse(text, spec.coordinates(0))


def field(*xi, spec=BASE2):
    return VectorField.parse(spec, list(xi))


def euclid(n):
    spec = JetSpec(tuple("xyz"[:n]), ())
    return StructureField(spec.independents, SYM, {(i, i): B("1", spec) for i in range(n)})


E2, E3 = euclid(2), euclid(3)
VOL = StructureField(("x", "y"), ANTI, {(0, 1): B("1")}, "w")
SPHERE = StructureField(("x", "y"), SYM, {(0, 0): B("4/(1+x^2+y^2)^2"), (1, 1): B("4/(1+x^2+y^2)^2")})
ZERO_S = StructureField(("x", "y"), SYM, {})
PTS = [(F(0), F(0)), (F(1, 2), F(-3)), (F(2), F(5, 7)), (F(-1), F(1, 3)), (F(7, 2), F(2))]


class TestLieDerivative:
    def test_translation(self):
        assert all(c.is_zero for c in lie_derivative(field("1", "0"), E2).components.values())

    def test_scaling(self):
        L = lie_derivative(field("x", "y"), E2)
        assert L.full((0, 0)) == B("2") and L.full((1, 1)) == B("2") and L.full((0, 1)).is_zero

    def test_rotation(self):
        assert all(c.is_zero for c in lie_derivative(field("-y", "x"), E2).components.values())
        assert all(c.is_zero for c in lie_derivative(field("-y", "x"), SPHERE).components.values())

    def test_volume_divergence(self):
        assert lie_derivative(field("x^2", "x*y"), VOL).full((0, 1)) == B("3*x")

    def test_bracket_identity(self):
        v, w = field("x*y", "y^2 + 1"), field("x^2", "x - y")
        S = StructureField(("x", "y"), SYM, {(0, 0): B("1+x^2"), (0, 1): B("y"), (1, 1): B("2+x*y")})
        lhs = lie_derivative(bracket(v, w), S)
        rhs_a = lie_derivative(v, lie_derivative(w, S))
        rhs_b = lie_derivative(w, lie_derivative(v, S))
        for I in SYM.component_indices(2):
            assert lhs.full(I) == rhs_a.full(I) - rhs_b.full(I)


class TestPsi:
    def test_euclidean_equations(self):
        sys = psi_S(E2)
        assert sorted(sys.format_equations()) == sorted(["2*xi1[1,0]", "xi2[1,0] + xi1[0,1]", "2*xi2[0,1]"])
        assert all(sys.solution_dimension(p) == 3 for p in PTS)

    def test_volume(self):
        assert psi_S(VOL).format_equations() == ["xi1[1,0] + xi2[0,1]"]
        assert psi_S(VOL).solution_dimension((0, 0)) == 5

    def test_zero_structure(self):
        sys = psi_S(ZERO_S)
        assert sys.rank((1, 1)) == 0 and sys.solution_dimension((1, 1)) == 6

    def test_shape_and_linearity(self):
        for q in (1, 2, 3):
            sys = lie_equation(SPHERE, q)
            assert sys.is_homogeneous_linear()
            M = sys.fiber_matrix(PTS[1])
            assert all(len(row) == 2 * comb(2 + q, q) for row in M)


class TestLieEquation:
    def test_killing_dims(self):
        assert lie_equation(E2, 2).solution_dimension((1, 2)) == 3
        assert lie_equation(E3, 2).solution_dimension((1, 2, 3)) == 6
        assert lie_equation(E2, 3).solution_dimension((0, 0)) == 3

    def test_sphere_killing(self):
        assert all(lie_equation(SPHERE, 2).solution_dimension(p) == 3 for p in PTS)

    def test_q1_is_psi(self):
        assert lie_equation(SPHERE, 1).equations == psi_S(SPHERE).equations

    def test_volume_prolongation(self):
        assert prolong_system(psi_S(VOL), 1).solution_dimension((0, 0)) == 9

    def test_zero_prolongation(self):
        assert prolong_system(psi_S(ZERO_S), 2).rank((0, 0)) == 0

    @pytest.mark.parametrize("S", [E2, SPHERE, VOL], ids=["euclid", "sphere", "volume"])
    def test_prolongation_commutes(self, S):
        for q in (1, 2):
            for h in (1, 2):
                a, b = lie_equation(S, q + h), prolong_system(lie_equation(S, q), h)
                for p in PTS:
                    n = a.unknown_count
                    assert linalg.same_row_space(a.fiber_matrix(p), b.fiber_matrix(p), n)

    def test_kernels_project(self):
        for p in PTS[:3]:
            hi = lie_equation(SPHERE, 3).fiber_solutions(p)
            lo = lie_equation(SPHERE, 2)
            M = lo.fiber_matrix(p)
            keys = lo.unknowns()
            for sol in hi:
                vec = [sol.get(k, 0) for k in keys]
                assert all(sum(a * b for a, b in zip(row, vec)) == 0 for row in M)


class TestIsotropy:
    def test_examples(self):
        assert len(isotropy_fiber(psi_S(E2), (0, 0))) == 1
        assert len(isotropy_fiber(psi_S(VOL), (0, 0))) == 3
        assert len(isotropy_fiber(psi_S(ZERO_S), (0, 0))) == 4

    def test_vanishes_at_point(self):
        for sol in isotropy_fiber(lie_equation(SPHERE, 2), (1, 1)):
            assert all(J.order > 0 for (_i, J) in sol)


def _sympy_lie_jets(v, g, point, q):
    """d^alpha (L_v g)_I at point for |alpha| <= q - 1, by sympy."""
    x, y = sympy.symbols("x y")
    xs = (x, y)
    xi = [sympy.sympify(e) for e in v]
    G = [[sympy.sympify(e) for e in row] for row in g]
    L = {}
    for i in range(2):
        for j in range(i, 2):
            L[(i, j)] = sum(xi[k] * sympy.diff(G[i][j], xs[k]) for k in range(2)) + sum(
                G[k][j] * sympy.diff(xi[k], xs[i]) + G[i][k] * sympy.diff(xi[k], xs[j]) for k in range(2)
            )
    at = dict(zip(xs, (sympy.Rational(p.numerator, p.denominator) for p in point)))
    out = []
    for alpha in multi_indices_upto(2, q - 1):
        for I in SYM.component_indices(2):
            e = L[I]
            for t, a in enumerate(alpha):
                e = sympy.diff(e, xs[t], a) if a else e
            out.append(e.subs(at))
    return out


def _sympy_field_jet(v, point, keys):
    x, y = sympy.symbols("x y")
    xs = (x, y)
    at = dict(zip(xs, (sympy.Rational(p.numerator, p.denominator) for p in point)))
    out = []
    for i, J in keys:
        e = sympy.sympify(v[i])
        for t, a in enumerate(J):
            e = sympy.diff(e, xs[t], a) if a else e
        out.append(e.subs(at))
    return out


@pytest.mark.parametrize("q", [1, 2, 3])
def test_exactness_against_sympy(q):
    """Fiber matrix times j_q v equals the derivatives of L_v g, for a generic polynomial v."""
    g = [["1 + x^2", "x*y"], ["x*y", "2 + y^2"]]
    S = StructureField(("x", "y"), SYM, {(0, 0): B(g[0][0]), (0, 1): B(g[0][1]), (1, 1): B(g[1][1])})
    v = ["x^3 - 2*x*y + y + 1", "x*y^2 + 3*x^2 - y"]
    sys = lie_equation(S, q)
    for p in PTS[:3]:
        z = _sympy_field_jet(v, p, sys.unknowns())
        lhs = [sum(sympy.Rational(a.numerator, a.denominator) * b for a, b in zip(row, z)) for row in sys.fiber_matrix(p)]
        assert lhs == _sympy_lie_jets(v, g, p, q)


def test_killing_jets_solve_the_equation():
    rot = ["-y", "x"]
    # a rotation of the sphere about a horizontal axis, in the stereographic chart
    other = ["(1 + x^2 - y^2)/2", "x*y"]
    for v in (rot, other):
        L = lie_derivative(field(*v), SPHERE)
        assert all(c.is_zero for c in L.components.values())
        sys = lie_equation(SPHERE, 3)
        for p in PTS[:3]:
            z = _sympy_field_jet(v, p, sys.unknowns())
            assert all(sum(sympy.Rational(a.numerator, a.denominator) * b for a, b in zip(row, z)) == 0 for row in sys.fiber_matrix(p))


class TestRegularity:
    @pytest.mark.parametrize("S", [E2, SPHERE, VOL], ids=["euclid", "sphere", "volume"])
    def test_constant_rank(self, S):
        rng = SplitMix64(9)
        pts = [(rng.rational(), rng.rational()) for _ in range(10)]
        for q in (1, 2, 3):
            assert lie_equation(S, q).rank_profile(pts).constant

    def test_violation_reported(self):
        S = StructureField(("x", "y"), SYM, {(0, 0): B("x"), (1, 1): B("1")})
        report = lie_equation(S, 2).rank_profile([(F(0), F(0)), (F(1), F(0)), (F(2), F(3))])
        assert report.violation and report.ranks == [8, 9, 9] and report.generic_rank == 9


class TestAutomorphisms:
    def test_identity(self):
        assert automorphism_test(PolyJet.identity((F(1, 2), F(1)), 2), SPHERE, 1)

    def test_rotation(self):
        Z = PolyJet.affine([[0, -1], [1, 0]], (F(1), F(2)), (F(-2), F(1)), 2)
        assert automorphism_test(Z, E2, 1)
        assert automorphism_test(Z, SPHERE, 1)

    def test_scaling_fails(self):
        Z = PolyJet.affine([[2, 0], [0, 2]], (F(0), F(0)), (F(0), F(0)), 2)
        assert not automorphism_test(Z, E2, 1)

    def test_phi_identity(self):
        a = (F(1, 2), F(1, 3))
        assert phi_S(PolyJet.identity(a, 3), SPHERE, 2) == SPHERE.jet(a, 2)

    def test_phi_scaling_1d(self):
        S = StructureField(("x",), SYM, {(0, 0): B("1", JetSpec(("x",), ()))})
        Z = PolyJet.affine([[2]], (F(0),), (F(0),), 1)
        assert phi_S(Z, S, 0).values() == {(0, 0): 4}


@settings(max_examples=10)
@given(st.integers(0, 10**6))
def test_covariance(seed):
    for S in (SPHERE, VOL):
        for X, Y, k in covariance_pairs(S, seed, 3, 2):
            assert covariance_holds(S, X, Y, k)


class TestNonlinearSymbol:
    def test_killing_finite_type(self):
        sys = nonlinear_symbol_system(PolyJet.identity((F(0), F(0)), 1), E2, 1)
        assert sys.consistent and sys.solution_dimension() == 0

    def test_volume(self):
        sys = nonlinear_symbol_system(PolyJet.identity((F(0), F(0)), 1), VOL, 1)
        assert sys.solution_dimension() == 4

    def test_affine(self):
        Z = PolyJet.affine([[1, 1], [0, 1]], (F(1), F(1)), (F(2), F(1)), 2)
        sys = nonlinear_symbol_system(Z, VOL, 2)
        z0 = sys.particular_solution()
        for kv in sys.kernel()[:3]:
            z1 = [a + b for a, b in zip(z0, kv)]
            assert automorphism_test(sys.extend(Z, z1), VOL, 2)
            diff = [a - b for a, b in zip(z1, z0)]
            assert all(sum(m * d for m, d in zip(row, diff)) == 0 for row in sys.matrix)

    def test_prerequisite(self):
        Z = PolyJet.affine([[2, 0], [0, 2]], (F(0), F(0)), (F(0), F(0)), 1)
        with pytest.raises(PrerequisiteNotAutomorphism):
            nonlinear_symbol_system(Z, E2, 1)
