from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jetforge.errors import OrderMismatch
from jetforge.jetspace import JetSpec, MultiIndex, PolyJet, total_derivative
from jetforge.prolongation import (
    VectorField,
    apply_prolonged,
    bracket,
    flow_check,
    groupoid_act,
    jet_bracket,
    prolong_field,
)
from jetforge.symcore import Expr, parse
from jetforge.tensors import StructureField, TensorType

from strategies import nonzero_fractions, order0_fields, small_fractions

CURVES = JetSpec(("x",), ("u",))
SURFACES = JetSpec(("x", "y"), ("u",))
PLANE_PAIRS = JetSpec(("x",), ("u", "v"))


def field(xi, phi, spec=CURVES):
    return VectorField.parse(spec, xi, phi)


def P(text, spec=CURVES, k=4):
    return parse(text, spec.with_order(k))


ROT = field(["-u"], ["x"])
SCALE = field(["x"], ["u"])
DX = field(["1"], ["0"])
DU = field(["0"], ["1"])


def phi(pf, name):
    return pf.coefficient(pf.spec.resolve(name))


class TestProlong:
    def test_translation(self):
        pf = prolong_field(DX, 3)
        assert all(c.is_zero for c in pf.phiJ.values())

    def test_rotation(self):
        pf = prolong_field(ROT, 2)
        assert phi(pf, "u1") == P("1 + u1^2")
        assert phi(pf, "u2") == P("3*u1*u2")

    def test_scaling(self):
        pf = prolong_field(SCALE, 2)
        assert phi(pf, "u1").is_zero
        assert phi(pf, "u2") == P("-u2")

    def test_recursion(self):
        v = field(["x*u + u^2"], ["x^2 - u"])
        k = 3
        spec = CURVES.with_order(k)
        pf = prolong_field(v, k)
        for r in range(k):
            lhs = phi(pf, f"u{r + 1}")
            rhs = total_derivative(pf.phiJ[(0, MultiIndex((r,)))], 0, spec) - total_derivative(v.xi[0], 0, spec) * Expr.symbol(
                spec.jet(0, MultiIndex((r + 1,)))
            )
            assert lhs == rhs

    def test_point_transformations_only(self):
        with pytest.raises(Exception):
            VectorField(CURVES, [P("u1")], [P("0")])


class TestApply:
    def test_examples(self):
        assert apply_prolonged(prolong_field(DX, 2), P("u2")).is_zero
        rot = prolong_field(ROT, 2)
        assert apply_prolonged(rot, P("u1")) == P("1 + u1^2")
        assert apply_prolonged(rot, P("u2^2/(1+u1^2)^3")).is_zero

    def test_order_mismatch(self):
        with pytest.raises(OrderMismatch):
            apply_prolonged(prolong_field(ROT, 1), P("u2"))


class TestBracket:
    def test_translations_commute(self):
        assert bracket(DX, DU).is_zero()

    def test_rotation(self):
        assert bracket(DX, ROT) == DU
        got = jet_bracket(prolong_field(DX, 3), prolong_field(ROT, 3))
        assert got == prolong_field(DU, 2)

    def test_scaling(self):
        v = field(["x"], ["0"])
        assert bracket(v, DX) == -DX
        assert jet_bracket(prolong_field(v, 2), prolong_field(DX, 2)) == prolong_field(-DX, 1)

    def test_order_mismatch(self):
        with pytest.raises(OrderMismatch):
            jet_bracket(prolong_field(DX, 2), prolong_field(ROT, 3))


@settings(max_examples=15)
@given(order0_fields(CURVES), order0_fields(CURVES), st.integers(0, 3))
def test_morphism_law(v, w, k):
    assert prolong_field(bracket(v, w), k) == jet_bracket(prolong_field(v, k + 1), prolong_field(w, k + 1))


@settings(max_examples=10)
@given(order0_fields(SURFACES, 1), order0_fields(SURFACES, 1), st.integers(0, 2))
def test_morphism_law_surfaces(v, w, k):
    assert prolong_field(bracket(v, w), k) == jet_bracket(prolong_field(v, k + 1), prolong_field(w, k + 1))


@settings(max_examples=15)
@given(order0_fields(CURVES), st.integers(0, 2), st.integers(0, 2))
def test_projection_compatibility(v, h, extra):
    assert prolong_field(v, h + extra).truncate(h) == prolong_field(v, h)


@settings(max_examples=15)
@given(order0_fields(PLANE_PAIRS), order0_fields(PLANE_PAIRS), small_fractions, small_fractions)
def test_linearity(v, w, a, b):
    k = 2
    lhs = prolong_field(v.scale(a) + w.scale(b), k)
    pv, pw = prolong_field(v, k), prolong_field(w, k)
    for s in PLANE_PAIRS.coordinates(k):
        assert lhs.coefficient(s) == pv.coefficient(s) * Expr.const(a) + pw.coefficient(s) * Expr.const(b)


# -- flows -----------------------------------------------------------------------------------------


def test_flow_translation():
    r = flow_check(DX, [P("x^3 - x", JetSpec(("x",), ()))], (Fraction(1, 2),), 3, tol=1e-9)
    assert r.passed and r.max_deviation < 1e-9


def test_flow_rotation():
    r = flow_check(ROT, [P("x^2", JetSpec(("x",), ()))], (0,), 2, tol=1e-5)
    assert r.passed


def test_flow_scaling():
    r = flow_check(SCALE, [P("x^3", JetSpec(("x",), ()))], (1,), 2, tol=1e-5)
    assert r.passed
    exact = {e["coordinate"]: e["exact"] for e in r.entries}
    assert exact["u1"] == "0" and exact["u2"] == "-6"


def test_flow_report_shape():
    r = flow_check(ROT, [P("x^2", JetSpec(("x",), ()))], (1,), 2)
    assert [e["coordinate"] for e in r.entries] == ["x", "u", "u1", "u2"]
    assert [e["exact"] for e in r.entries] == ["-1", "1", "5", "12"]


# -- finite action on tensor jets ------------------------------------------------------------------


SYM2 = TensorType(0, 2, "symmetric")


def B(text, names=("x", "y")):
    return parse(text, JetSpec(tuple(names), ()).coordinates(0))


def test_groupoid_identity():
    S = StructureField(("x", "y"), SYM2, {(0, 0): B("1+x^2"), (0, 1): B("x*y"), (1, 1): B("2")})
    jS = S.jet((Fraction(1), Fraction(2)), 2)
    assert groupoid_act(PolyJet.identity((Fraction(1), Fraction(2)), 3), jS) == jS


def test_groupoid_order_mismatch():
    S = StructureField(("x", "y"), SYM2, {(0, 0): Expr.const(1), (1, 1): Expr.const(1)})
    with pytest.raises(OrderMismatch):
        groupoid_act(PolyJet.identity((0, 0), 2), S.jet((0, 0), 2))


def _cayley(tau):
    d = 1 + tau * tau
    return [[(1 - tau * tau) / d, -2 * tau / d], [2 * tau / d, (1 - tau * tau) / d]]


@pytest.mark.parametrize("k", [0, 1, 2])
def test_groupoid_matches_infinitesimal_rotation(k):
    """d/dtheta of the transported jet under rotation equals the prolonged natural lift."""
    from jetforge.orbits import ActionSpace

    ttype = SYM2
    S = StructureField(("x", "y"), ttype, {(0, 0): B("4/(1+x^2+y^2)^2"), (1, 1): B("4/(1+x^2+y^2)^2"), (0, 1): B("x*y")})
    x0 = (Fraction(1, 2), Fraction(-1, 3))
    jS = S.jet(x0, k)
    h = Fraction(1, 10**6)

    def moved(tau):
        R = _cayley(tau)
        target = tuple(sum(R[i][j] * x0[j] for j in range(2)) for i in range(2))
        return groupoid_act(PolyJet.affine(R, x0, target, k + 1), jS)

    plus, minus = moved(h), moved(-h)
    # theta = 2 arctan(tau), so d/dtheta = (1/2) d/dtau at tau = 0
    space = ActionSpace.structure(("x", "y"), ttype, "g")
    v = VectorField.parse(JetSpec(("x", "y"), ()), ["-y", "x"])
    pf = prolong_field(space.lift(v), k)
    spec = space.jet_spec.with_order(k)
    point = {s: Fraction(c) for s, c in zip(spec.base_symbols, x0)}
    comps = ttype.component_indices(2)
    for (idx, J), val in jS.coordinates().items():
        point[spec.jet(comps.index(idx), J)] = Fraction(val)
    cp, cm = plus.coordinates(), minus.coordinates()
    for (idx, J) in cp:
        numeric = (cp[(idx, J)] - cm[(idx, J)]) / (4 * h)
        exact = pf.coefficient(spec.jet(comps.index(idx), J)).eval_rational(point)
        assert abs(float(numeric - exact)) < 1e-6 * max(1, abs(float(exact)))
    for i in range(2):
        numeric = (plus.base[i] - minus.base[i]) / (4 * h)
        assert abs(float(numeric - pf.coefficient(spec.base_symbols[i]).eval_rational(point))) < 1e-9


@pytest.mark.parametrize("k", [0, 1, 2])
def test_groupoid_matches_infinitesimal_nonlinear(k):
    """The flow of x^2 d/dx is x / (1 - t x); compare on a 1-dimensional metric."""
    from jetforge.orbits import ActionSpace

    ttype = SYM2
    S = StructureField(("x",), ttype, {(0, 0): B("1 + x^2", ("x",))})
    x0 = (Fraction(1, 3),)
    jS = S.jet(x0, k)
    h = Fraction(1, 10**6)
    xs = JetSpec(("x",), ()).coordinates(0)
    x = Expr.symbol(xs[0])

    def moved(t):
        flow = x / (Expr.const(1) - Expr.const(t) * x)
        return groupoid_act(PolyJet.from_exprs([flow], xs, x0, k + 1), jS)

    plus, minus = moved(h), moved(-h)
    space = ActionSpace.structure(("x",), ttype, "g")
    pf = prolong_field(space.lift(VectorField.parse(JetSpec(("x",), ()), ["x^2"])), k)
    spec = space.jet_spec.with_order(k)
    point = {spec.base_symbols[0]: x0[0]}
    for ((idx, J), val) in jS.coordinates().items():
        point[spec.jet(0, J)] = Fraction(val)
    cp, cm = plus.coordinates(), minus.coordinates()
    for key in cp:
        numeric = (cp[key] - cm[key]) / (2 * h)
        exact = pf.coefficient(spec.jet(0, key[1])).eval_rational(point)
        assert abs(float(numeric - exact)) < 1e-6 * max(1, abs(float(exact)))
