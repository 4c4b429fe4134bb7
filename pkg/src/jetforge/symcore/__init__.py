"""Exact expression kernel: polynomials, canonical expressions, parsing, linear algebra."""

from .expr import Atom, Expr, as_expr, positive_factorization, sym
from .parser import parse, to_text
from .poly import ONE, ZERO, Poly, Symbol, dependent, jet_symbol, symbol

__all__ = [
    "Atom",
    "Expr",
    "ONE",
    "Poly",
    "Symbol",
    "ZERO",
    "as_expr",
    "dependent",
    "diff",
    "eval_rational",
    "jet_symbol",
    "parse",
    "positive_factorization",
    "subs",
    "sym",
    "symbol",
    "to_text",
]


def diff(e: Expr, s: Symbol) -> Expr:
    return e.diff(s)


def subs(e: Expr, bindings) -> Expr:
    return e.subs(bindings)


def eval_rational(e: Expr, point):
    return e.eval_rational(point)
