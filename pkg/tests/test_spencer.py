from fractions import Fraction
from math import comb

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from jetforge.acceptance import koszul_checks
from jetforge.jetspace import JetSpec, MultiIndex, multi_indices_upto
from jetforge.prolongation import VectorField
from jetforge.spencer import (
    SymbolSpace,
    algebraic_prolong,
    cartan_characters,
    delta_cohomology,
    delta_map,
    holonomic_family,
    is_involutive,
    lambda_D_commutation_check,
    lambda_of_section,
    spencer_D,
    symbol_of,
)
from jetforge.structures import lie_equation, psi_S
from jetforge.symcore import linalg, parse
from jetforge.tensors import StructureField, TensorType

SYM = TensorType(0, 2, "symmetric")
CURVES = JetSpec(("x",), ("u",))
PAIRS = JetSpec(("x",), ("u", "v"))


def base(n):
    return JetSpec(tuple("xyz"[:n]), ())


def metric(n):
    b = base(n)
    return StructureField(b.independents, SYM, {(i, i): parse("1", b.coordinates(0)) for i in range(n)})


def volume(n):
    b = base(n)
    tt = TensorType(0, n, "antisymmetric")
    return StructureField(b.independents, tt, {tuple(range(n)): parse("1", b.coordinates(0))}, "w")


def sphere():
    b = base(2)
    g = parse("4/(1+x^2+y^2)^2", b.coordinates(0))
    return StructureField(b.independents, SYM, {(0, 0): g, (1, 1): g})


def curvature_dim(n):
    return n * n * (n * n - 1) // 12


class TestSymbols:
    def test_killing(self):
        assert symbol_of(psi_S(metric(2)), (0, 0)).dim == 1
        assert symbol_of(psi_S(metric(3)), (0, 0, 0)).dim == 3

    def test_zero_system(self):
        zero = StructureField(("x", "y"), SYM, {})
        assert symbol_of(psi_S(zero), (0, 0)) == SymbolSpace.full(2, 2, 1)

    def test_volume(self):
        assert symbol_of(psi_S(volume(2)), (0, 0)).dim == 3
        assert symbol_of(psi_S(volume(3)), (0, 0, 0)).dim == 8

    def test_ambient_dimension(self):
        for n, W, q in [(2, 2, 1), (3, 1, 4), (3, 2, 2)]:
            assert SymbolSpace.full(n, W, q).ambient_dimension == W * comb(n + q - 1, q)

    def test_dependent_basis_rejected_by_echelon(self):
        g = SymbolSpace(2, 1, 1, [[1, 0], [2, 0]])
        assert g.dim == 1


class TestAlgebraicProlongation:
    @pytest.mark.parametrize("n,W", [(1, 1), (2, 1), (2, 2), (3, 2)])
    def test_full(self, n, W):
        assert algebraic_prolong(SymbolSpace.full(n, W, 1)).dim == W * comb(n + 1, 2)

    def test_metric_finite_type(self):
        for n in (2, 3):
            assert algebraic_prolong(symbol_of(psi_S(metric(n)), (0,) * n)).dim == 0

    def test_zero(self):
        assert algebraic_prolong(SymbolSpace.zero(2, 2, 1), 2).dim == 0

    @pytest.mark.parametrize("S", [metric(2), volume(2), sphere(), metric(3)], ids=["e2", "vol2", "sphere", "e3"])
    def test_symbol_of_lie_equation_is_prolongation(self, S):
        n = S.n
        pt = tuple(Fraction(i + 1, 3) for i in range(n))
        g1 = symbol_of(lie_equation(S, 1), pt)
        for k in range(1, 4 if n == 2 else 3):
            assert symbol_of(lie_equation(S, 1 + k), pt) == algebraic_prolong(g1, k)


class TestCharacters:
    @pytest.mark.parametrize("n,W,q", [(2, 1, 1), (2, 2, 2), (3, 1, 2), (3, 2, 1), (3, 1, 3)])
    def test_full_symbol(self, n, W, q):
        g = SymbolSpace.full(n, W, q)
        assert cartan_characters(g) == [W * comb(n - i + q - 1, q - 1) for i in range(1, n + 1)]
        assert is_involutive(g)

    def test_calibration(self):
        # two involutive and two non-involutive fixtures fix the convention
        assert is_involutive(symbol_of(psi_S(volume(2)), (0, 0)))
        assert is_involutive(SymbolSpace.full(2, 1, 2))
        assert not is_involutive(symbol_of(psi_S(metric(2)), (0, 0)))
        assert not is_involutive(symbol_of(psi_S(metric(3)), (0, 0, 0)))

    def test_known_characters(self):
        assert cartan_characters(symbol_of(psi_S(volume(2)), (0, 0))) == [2, 1]
        assert cartan_characters(symbol_of(psi_S(metric(3)), (0, 0, 0))) == [2, 1, 0]

    def test_zero(self):
        g = SymbolSpace.zero(3, 2, 2)
        assert cartan_characters(g) == [0, 0, 0] and is_involutive(g)

    def test_order_zero_undefined(self):
        with pytest.raises(ValueError):
            cartan_characters(SymbolSpace.full(2, 1, 0))

    @pytest.mark.parametrize(
        "g",
        [SymbolSpace.full(2, 1, 1), SymbolSpace.full(3, 1, 1), SymbolSpace.full(2, 2, 1)],
        ids=["full21", "full31", "full22"],
    )
    def test_prolongation_preserves_involutivity(self, g):
        for _ in range(2):
            g = algebraic_prolong(g)
            assert is_involutive(g)

    def test_volume_prolongations_involutive(self):
        g = symbol_of(psi_S(volume(2)), (0, 0))
        for _ in range(2):
            g = algebraic_prolong(g)
            assert is_involutive(g)


class TestDelta:
    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("q", [1, 2, 3, 4])
    def test_square_zero(self, n, q):
        for p in range(n):
            A, B = delta_map(n, 1, q, p), delta_map(n, 1, q - 1, p + 1)
            if A.matrix and B.matrix:
                assert all(x == 0 for row in linalg.matmul(B.matrix, A.matrix) for x in row)

    @pytest.mark.parametrize("n,q,p", [(2, 2, 1), (3, 2, 1), (3, 3, 2), (3, 1, 1)])
    def test_rank_against_sympy(self, n, q, p):
        A = delta_map(n, 2, q, p)
        assert A.rank == sympy.Matrix(A.matrix).rank()

    def test_koszul(self):
        report = koszul_checks()
        assert report["failures"] == [] and report["exactness"] > 0

    @pytest.mark.parametrize("n", [2, 3])
    def test_euler_characteristic(self, n):
        """Alternating dimensions of the full Koszul complex vanish in positive degree."""
        for d in range(1, 5):
            chi = sum((-1) ** p * comb(n, p) * comb(n + d - p - 1, d - p) for p in range(0, min(n, d) + 1))
            assert chi == 0
            ranks = [delta_map(n, 1, d - p, p).rank for p in range(0, min(n, d) + 1)]
            dims = [comb(n, p) * comb(n + d - p - 1, d - p) for p in range(0, min(n, d) + 1)]
            # exactness: dims[p] = rank out of p + rank into p
            for p in range(len(dims)):
                into = ranks[p - 1] if p else 0
                assert dims[p] == ranks[p] + into


class TestCohomology:
    @pytest.mark.parametrize("n", [2, 3])
    def test_metric_curvature(self, n):
        g = symbol_of(psi_S(metric(n)), (0,) * n)
        assert delta_cohomology(g, 1, 2) == curvature_dim(n)
        assert delta_cohomology(g, 0, 1) == n * (n + 1) // 2
        assert delta_cohomology(g, 1, 1) == 0
        assert all(delta_cohomology(g, 2, p) == 0 for p in range(n + 1))

    @pytest.mark.parametrize("n", [2, 3])
    def test_full_symbol_acyclic(self, n):
        g = SymbolSpace.full(n, 1, 1)
        for m in range(1, 3):
            for p in range(1, n + 1):
                assert delta_cohomology(g, m, p) == 0

    @pytest.mark.parametrize("n", [2, 3])
    def test_euler_with_tower(self, n):
        g = symbol_of(psi_S(metric(n)), (0,) * n)
        tower = {0: n, 1: g.dim}
        for d in range(1, 4):
            chi = sum((-1) ** p * comb(n, p) * tower.get(d - p, 0) for p in range(0, min(n, d) + 1))
            coh = sum((-1) ** p * delta_cohomology(g, d - p, p) for p in range(0, min(n, d) + 1))
            assert chi == coh


def P(text, spec=base(1)):
    return parse(text, spec.coordinates(0))


class TestSpencerD:
    def test_holonomic_cubic(self):
        fam = holonomic_family([P("x^3")], CURVES, 2)
        assert [fam[(0, MultiIndex((j,)))] for j in range(3)] == [P("x^3"), P("3*x^2"), P("6*x")]
        assert all(e.is_zero for row in spencer_D(fam, CURVES, 1) for e in row)

    def test_forced(self):
        s = {(0, MultiIndex((0,))): P("x^2"), (0, MultiIndex((1,))): P("0")}
        assert spencer_D(s, CURVES, 0) == [[P("2*x")]]

    def test_rational_family(self):
        texts = ["x/(1+x)", "1/(1+x)^2", "-2/(1+x)^3", "6/(1+x)^4"]
        s = {(0, MultiIndex((j,))): P(t) for j, t in enumerate(texts)}
        assert all(e.is_zero for row in spencer_D(s, CURVES, 2) for e in row)

    def test_detects_non_holonomic(self):
        s = {(0, MultiIndex((j,))): P(t) for j, t in enumerate(["x^2", "2*x", "3"])}
        D = spencer_D(s, CURVES, 1)
        assert D[0][0].is_zero and D[0][1] == P("-1")


def _family(texts, spec, k):
    cols = [(mu, J) for J in multi_indices_upto(spec.n, k) for mu in range(spec.m)]
    return {c: parse(t, spec.base_symbols) for c, t in zip(cols, texts)}


class TestLambdaD:
    ROT = VectorField.parse(CURVES, ["-u"], ["x"])

    def test_holonomic(self):
        fam = holonomic_family([P("x^2 - x")], CURVES, 3)
        assert lambda_D_commutation_check(self.ROT, fam, 2)
        lam = lambda_of_section(self.ROT, fam, 2)
        assert all(e.is_zero for row in spencer_D(lam, CURVES, 1) for e in row)

    def test_translation(self):
        dx = VectorField.parse(CURVES, ["1"], ["0"])
        s = _family(["x^2", "x", "1 + x^3"], CURVES, 2)
        assert lambda_D_commutation_check(dx, s, 2)

    def test_rotation_non_holonomic(self):
        s = _family(["x^2", "x", "1 + x^3"], CURVES, 2)
        assert lambda_D_commutation_check(self.ROT, s, 2)
        lam = lambda_of_section(self.ROT, s, 2)
        assert any(not e.is_zero for row in spencer_D(lam, CURVES, 1) for e in row)

    def test_two_dependents(self):
        v = VectorField.parse(PAIRS, ["x*u"], ["v + x", "u*v"])
        s = _family(["x", "x^2", "1", "x^3"], PAIRS, 1)
        assert lambda_D_commutation_check(v, s, 1)


@settings(max_examples=10)
@given(st.lists(st.integers(-3, 3), min_size=6, max_size=6))
def test_lambda_D_random(cs):
    texts = [f"{a}*x^2 + {b}" for a, b in zip(cs[::2], cs[1::2])]
    v = VectorField.parse(CURVES, [f"{cs[0]}*u + x"], [f"{cs[1]}*x*u + {cs[2]}"])
    assert lambda_D_commutation_check(v, _family(texts, CURVES, 2), 2)
