from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from jetforge.errors import DivisionByZero, ExprSyntaxError, IrrationalValue, NegativeBaseFractionalPower, UnknownSymbol
from jetforge.jetspace import JetSpec
from jetforge.symcore import Expr, linalg, parse, symbol

from strategies import X, Y, exprs, small_fractions

SPEC = JetSpec(("x",), ("u",)).with_order(3)
u1 = SPEC.resolve("u1")


def P(text, vocab=SPEC):
    return parse(text, vocab)


class TestParse:
    def test_zero(self):
        assert P("0").is_zero

    def test_quotient_is_reduced(self):
        e = P("u1^2/(1+u1^2)")
        num, den = e.as_ratfunc()
        assert str(num) == "u1^2" and str(den) == "1 + u1^2"
        assert P("(u1^2 + u1^4)/(1+u1^2)^2") == e

    def test_guarded_power_round_trip(self):
        e = P("(1+u1^2)^(3/2)")
        assert not e.is_rational
        assert P(str(e)) == e

    def test_uncertified_base_rejected(self):
        with pytest.raises(NegativeBaseFractionalPower):
            P("(u1 - 1)^(1/2)")

    def test_syntax_error_has_position(self):
        with pytest.raises(ExprSyntaxError) as info:
            P("u1 + * u2")
        assert info.value.position == 5
        assert "^" in str(info.value)

    def test_unknown_symbol(self):
        with pytest.raises(UnknownSymbol):
            P("v1")

    def test_bracketed_names(self):
        spec = JetSpec(("x", "y"), ("u",)).with_order(3)
        e = parse("u[1,2] + u[0,1]*x", spec)
        assert {s.name for s in e.free_symbols} == {"u[1,2]", "u[0,1]", "x"}


class TestDiff:
    def test_polynomial(self):
        x = symbol("x")
        assert P("x^2").diff(x) == P("2*x")

    def test_square_root(self):
        assert P("(1+u1^2)^(1/2)").diff(u1) == P("u1*(1+u1^2)^(-1/2)")

    def test_curvature_quotient(self):
        assert P("u2^2/(1+u1^2)^3").diff(u1) == P("-6*u1*u2^2*(1+u1^2)^(-4)")


class TestSubsEval:
    def test_subs_to_zero(self):
        x, u = symbol("x"), SPEC.resolve("u")
        assert P("x+u").subs({x: 0, u: 0}).is_zero

    def test_subs_pole(self):
        x = symbol("x")
        with pytest.raises(DivisionByZero):
            P("1/x").subs({x: 0})

    def test_subs_expands(self):
        t = symbol("t")
        assert P("u1^2").subs({u1: parse("t+1", [t])}) == parse("t^2+2*t+1", [t])

    def test_eval(self):
        x, u = symbol("x"), SPEC.resolve("u")
        assert P("x*u").eval_rational({x: 2, u: 3}) == 6

    def test_eval_radical(self):
        e = P("(1+u1^2)^(1/2)")
        assert e.eval_rational({u1: 0}) == 1
        assert e.eval_rational({u1: Fraction(3, 4)}) == Fraction(5, 4)
        with pytest.raises(IrrationalValue):
            e.eval_rational({u1: 1})


def _sympy(e):
    return sympy.sympify(str(e).replace("^", "**"))


@given(exprs(), exprs(), exprs())
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == Expr.const(0)


@given(exprs())
def test_canonical_form_is_stable(e):
    assert Expr(e.terms) == e
    assert parse(str(e), [X, Y]) == e


@given(exprs(), exprs())
def test_leibniz(e, f):
    assert (e * f).diff(X) == e.diff(X) * f + e * f.diff(X)


@given(exprs(radicals=False), small_fractions, small_fractions)
def test_evaluation_matches_sympy(e, a, b):
    mine = e.eval_rational({X: a, Y: b})
    ref = _sympy(e).subs({sympy.Symbol("x"): sympy.Rational(a.numerator, a.denominator), sympy.Symbol("y"): sympy.Rational(b.numerator, b.denominator)})
    assert sympy.Rational(mine.numerator, mine.denominator) == ref


@given(exprs())
def test_derivative_matches_sympy(e):
    mine = _sympy(e.diff(X))
    ref = sympy.diff(_sympy(e), sympy.Symbol("x"))
    assert sympy.simplify(mine - ref) == 0


# -- exact linear algebra against sympy ------------------------------------------------------------

matrices = st.integers(1, 5).flatmap(
    lambda r: st.integers(1, 6).flatmap(lambda c: st.lists(st.lists(small_fractions, min_size=c, max_size=c), min_size=r, max_size=r))
)


@given(matrices)
def test_rank_and_nullspace(M):
    cols = len(M[0])
    ref = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in M])
    assert linalg.rank(M, cols) == ref.rank()
    null = linalg.nullspace(M, cols)
    assert len(null) == cols - ref.rank()
    for v in null:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in M)


@given(matrices)
def test_row_space_equality(M):
    cols = len(M[0])
    basis = linalg.row_space(M, cols)
    doubled = M + [[2 * a - b for a, b in zip(M[0], row)] for row in M]
    assert linalg.same_row_space(basis, doubled, cols)


def test_solve_and_inverse():
    A = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(3)]]
    inv = linalg.inverse(A)
    assert linalg.matmul(A, inv) == [[1, 0], [0, 1]]
    assert linalg.det(A) == 5
    x = linalg.solve(A, [Fraction(3), Fraction(4)])
    assert [sum(a * b for a, b in zip(row, x)) for row in A] == [3, 4]


# -- positivity certificates -----------------------------------------------------------------------

from jetforge.symcore.expr import _definite_sign  # noqa: E402

from strategies import polys  # noqa: E402


@pytest.mark.parametrize(
    "text",
    ["1 + x^2 + y^2", "2 + 2*x*y + x^2*y^2", "1 + (x + y)^2", "1 + (x + y + x*y)^2", "x^2 - x + 1"],
)
def test_certified_positive(text):
    assert _definite_sign(parse(text, [X, Y]).as_poly()) == 1


@pytest.mark.parametrize("text", ["x^2 + y^2", "1 - x^2", "1 + x^2 - 3*x*y + y^2", "x*y"])
def test_not_certified(text):
    assert _definite_sign(parse(text, [X, Y]).as_poly()) is None


@given(polys(max_degree=2, max_terms=3), polys(max_degree=2, max_terms=3), small_fractions, small_fractions)
def test_certificate_is_sound(p, q, a, b):
    f = p * p + q
    if not f.is_zero and _definite_sign(f) == 1:
        assert f.evaluate({X: a, Y: b}) > 0
