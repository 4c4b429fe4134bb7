"""Hypothesis strategies for exact expressions, fields and jets."""

from fractions import Fraction

from hypothesis import strategies as st

from jetforge.prolongation import VectorField
from jetforge.symcore import Expr, Poly, symbol

X, Y = symbol("x"), symbol("y")

small_fractions = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 5))
nonzero_fractions = small_fractions.filter(bool)


def polys(symbols=(X, Y), max_degree=3, max_terms=4):
    monomial = st.tuples(*[st.integers(0, max_degree) for _ in symbols])

    def build(pairs):
        terms = {}
        for exps, c in pairs:
            key = tuple((s, e) for s, e in zip(symbols, exps) if e)
            terms[key] = terms.get(key, Fraction(0)) + c
        return Poly(terms)

    return st.lists(st.tuples(monomial, small_fractions), max_size=max_terms).map(build)


def poly_exprs(symbols=(X, Y), max_degree=3, max_terms=4):
    return polys(symbols, max_degree, max_terms).map(Expr.from_poly)


def positive_denominators(symbols=(X, Y)):
    """1 + sum of squares: certified positive, never a pole."""
    return polys(symbols, 2, 2).map(lambda p: Expr.from_poly(Poly.const(1) + p * p))


def exprs(symbols=(X, Y), radicals=True):
    """Rational functions with positive denominators, optionally times a guarded square root."""
    base = st.tuples(poly_exprs(symbols), positive_denominators(symbols)).map(lambda t: t[0] / t[1])
    if not radicals:
        return base
    root = positive_denominators(symbols).map(lambda d: d ** Fraction(1, 2))
    return st.one_of(base, st.tuples(base, root).map(lambda t: t[0] * t[1]))


def order0_fields(spec, max_degree=2):
    coords = spec.coordinates(0)
    comp = poly_exprs(tuple(coords), max_degree, 3)
    return st.builds(
        lambda xi, phi: VectorField(spec, xi, phi),
        st.lists(comp, min_size=spec.n, max_size=spec.n),
        st.lists(comp, min_size=spec.m, max_size=spec.m),
    )
