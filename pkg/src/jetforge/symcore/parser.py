"""Recursive-descent parser for the ASCII expression language.

Grammar::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | '+' unary | power
    power    := atom ('^' exponent)?
    exponent := '-'? INT | '(' expr ')'      -- must be a rational constant
    atom     := INT | NAME ('[' INT (',' INT)* ']')? | '(' expr ')'

Printing is :func:`str` on :class:`~jetforge.symcore.expr.Expr`, which emits
this same grammar.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Union

from ..errors import ExprSyntaxError, UnknownSymbol
from .expr import Expr
from .poly import Symbol

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/^()\[\],]))")

Vocabulary = Union[Mapping[str, Symbol], Iterable[Symbol], Callable[[str], "Symbol | None"]]


def _resolver(vocabulary) -> Callable[[str], "Symbol | None"]:
    if hasattr(vocabulary, "resolve"):
        return vocabulary.resolve
    if callable(vocabulary):
        return vocabulary
    if isinstance(vocabulary, Mapping):
        return vocabulary.get
    table = {s.name: s for s in vocabulary}
    return table.get


def _tokenize(text: str):
    pos = 0
    tokens = []
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = len(text[pos:]) - len(text[pos:].lstrip()) + pos
            raise ExprSyntaxError(f"unexpected character {text[start]!r}", text, start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, resolve):
        self.text = text
        self.resolve = resolve
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            found = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", self.text, pos)

    def error(self, msg, pos=None):
        if pos is None:
            pos = self.peek()[2]
        raise ExprSyntaxError(msg, self.text, pos)

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            self.error(f"unexpected {val!r}", pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op, pos = self.take()[1:]
            rhs = self.unary()
            if op == "*":
                e = e * rhs
            else:
                if rhs.is_zero:
                    self.error("division by zero", pos)
                e = e / rhs
        return e

    def unary(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return -self.unary()
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            pos = self.peek()[2]
            q = self.exponent()
            if self.peek()[1] == "^":
                self.error("chained exponents are ambiguous; add parentheses")
            try:
                return base ** q
            except ZeroDivisionError:
                self.error("zero raised to a negative power", pos)
        return base

    def exponent(self) -> Fraction:
        kind, val, pos = self.peek()
        sign = 1
        if val == "-":
            self.take()
            sign = -1
            kind, val, pos = self.peek()
        if kind == "int":
            self.take()
            return sign * Fraction(int(val))
        if val == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            if not e.is_constant:
                self.error("exponent must be a rational constant", pos)
            return sign * e.as_rational()
        self.error("expected an integer or parenthesized rational exponent", pos)

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "int":
            return Expr.const(int(val))
        if kind == "name":
            name = val
            if self.peek()[1] == "[":
                self.take()
                idx = []
                while True:
                    k2, v2, p2 = self.take()
                    if k2 != "int":
                        self.error("expected an integer multi-index entry", p2)
                    idx.append(int(v2))
                    k3, v3, p3 = self.take()
                    if v3 == "]":
                        break
                    if v3 != ",":
                        self.error("expected ',' or ']'", p3)
                name = f"{name}[{','.join(map(str, idx))}]"
            s = self.resolve(name)
            if s is None:
                raise UnknownSymbol(name, pos)
            return Expr.symbol(s)
        if val == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(val)
        self.error(f"unexpected {found}", pos)


def parse(text: str, vocabulary: Vocabulary) -> Expr:
    """Parse ``text`` into a canonical :class:`Expr` over the declared symbols."""
    return _Parser(text, _resolver(vocabulary)).parse()


def to_text(e: Expr) -> str:
    return str(e)
