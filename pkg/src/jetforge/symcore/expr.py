"""Canonical exact expressions.

An :class:`Expr` is a finite sum ``sum_k R_k * M_k`` where each ``R_k`` is a
reduced rational function over Q and each ``M_k`` is a product of *atoms*
raised to exponents in the open interval (0, 1).  Atoms are either primes or
irreducible, primitive polynomials that are positive-definite (they have no
real zeros and are positive at the origin).  Integer parts of exponents are
folded into ``R_k``.  With that convention the representation is unique, so
structural equality decides mathematical equality.

Fractional powers are accepted only on bases that can be certified
positive-definite; anything else raises :class:`NegativeBaseFractionalPower`.
"""

from __future__ import annotations

from fractions import Fraction
from math import floor
from typing import Mapping, NamedTuple

from sympy import factorint, integer_nthroot

from ..errors import (
    DivisionByZero,
    IrrationalValue,
    NegativeBaseFractionalPower,
    UnsupportedOperation,
)
from .poly import ONE, ZERO, Poly, Symbol, format_poly, format_rational


class Atom(NamedTuple):
    key: tuple
    poly: Poly

    def __str__(self):
        if self.key[0] == 0:
            return str(self.key[1])
        return f"({format_poly(self.poly)})"


def prime_atom(p: int) -> Atom:
    return Atom((0, p), Poly.const(p))


def poly_atom(f: Poly) -> Atom:
    return Atom((1, f.sort_tuple()), f)


# -- positivity certificates ------------------------------------------------------


def _definite_sign(f: Poly):
    """+1/-1 if ``f`` provably has no real zeros, else None."""
    if f.is_const:
        c = f.const_value()
        return (c > 0) - (c < 0) or None
    c0 = f.const_value()
    if c0 == 0:
        return None
    sign = 1 if c0 > 0 else -1
    if all(all(e % 2 == 0 for _, e in m) and (c > 0) == (sign > 0) for m, c in f.terms.items()):
        return sign
    if len(f.symbols()) == 1:
        return sign if f.real_root_count() == 0 else None
    return sign if _gram_certificate(f.scale(sign)) else None


def _gram_certificate(f: Poly) -> bool:
    """True if f = v^T G v over a monomial basis v = (1, w) with
    G = [[g, b^T], [b, H]], g > 0, S = H - b b^T / g positive semidefinite
    and b in the range of S.  Then f = g (1 + b.w/g)^2 + w^T S w vanishes
    nowhere: the second term is zero only when w lies in ker S, which b
    annihilates, leaving f = g.

    The basis is the set of monomials whose squares occur in f with positive
    coefficient.  Each coefficient is split evenly over the ordered pairs of
    basis monomials producing it, either all of them or only the most
    balanced ones in degree.  A heuristic: False certifies nothing.
    """
    terms = dict(f.terms)
    basis = []
    for m, c in terms.items():
        if c > 0 and all(e % 2 == 0 for _, e in m):
            basis.append(tuple((s, e // 2) for s, e in m))
    if () not in basis:
        return False
    basis.sort(key=lambda m: (sum(e for _, e in m), m))
    pairs: dict = {}
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            prod: dict = dict(a)
            for s, e in b:
                prod[s] = prod.get(s, 0) + e
            pairs.setdefault(tuple(sorted(prod.items())), []).append((i, j))
    if any(m not in pairs for m in terms):
        return False
    degree = [sum(e for _, e in m) for m in basis]

    def balanced(slots):
        best = min(abs(degree[i] - degree[j]) for i, j in slots)
        return [(i, j) for i, j in slots if abs(degree[i] - degree[j]) == best]

    for choose in (lambda slots: slots, balanced):
        G = [[Fraction(0)] * len(basis) for _ in basis]
        for m, slots in pairs.items():
            c = terms.get(m, Fraction(0))
            chosen = choose(slots)
            for i, j in chosen:
                G[i][j] += c / len(chosen)
        if _gram_psd_certificate(G):
            return True
    return False


def _gram_psd_certificate(G) -> bool:
    from .linalg import rank

    size = len(G)
    g = G[0][0]
    if g <= 0:
        return False
    b = [G[i][0] for i in range(1, size)]
    S = [[G[i][j] - G[i][0] * G[0][j] / g for j in range(1, size)] for i in range(1, size)]
    if not S:
        return g > 0
    # b in range(S): appending b as a column must not raise the rank
    if rank(S, size - 1) != rank([row + [bi] for row, bi in zip(S, b)], size):
        return False
    L = [row[:] for row in S]
    for k in range(len(L)):
        pivot = L[k][k]
        if pivot < 0:
            return False
        if pivot == 0:
            if any(L[k][j] for j in range(k, len(L))):
                return False
            continue
        for i in range(k + 1, len(L)):
            if L[i][k]:
                r = L[i][k] / pivot
                for j in range(k, len(L)):
                    L[i][j] -= r * L[k][j]
    return True


def positive_factorization(p: Poly):
    """Return ``(c, [(f, m), ...])`` with ``p = c * prod f**m``, ``c > 0`` and each
    ``f`` primitive, irreducible and positive-definite; None if not certifiable."""
    if p.is_const:
        c = p.const_value()
        return (c, []) if c > 0 else None
    _, facs = p.factor_list()
    out = []
    denom = Fraction(1)
    for f, m in facs:
        sign = _definite_sign(f)
        if sign is None:
            return None
        g = f.scale(Fraction(sign) / f.content())
        out.append((g, m))
        denom *= g.const_value() ** m
    c = p.const_value() / denom
    if c <= 0:
        return None
    out.sort(key=lambda fm: fm[0].sort_tuple())
    return c, out


# -- rational-function helpers ------------------------------------------------------


def _reduce(n: Poly, d: Poly):
    if n.is_zero:
        return ZERO, ONE
    if d.is_const:
        c = d.const_value()
        if c == 0:
            raise DivisionByZero("division by zero")
        return (n if c == 1 else n.scale(1 / c)), ONE
    if n.is_const:
        g = ONE
        n2, d2 = n, d
    else:
        g, n2, d2 = n.cofactors(d)
    if d2.is_const:
        return n2.scale(1 / d2.const_value()), ONE
    _, lc = d2.leading()
    if lc != 1:
        n2, d2 = n2.scale(1 / lc), d2.scale(1 / lc)
    return n2, d2


def _key_mul(k1: tuple, k2: tuple):
    if not k1:
        return k2, ONE
    if not k2:
        return k1, ONE
    d = dict(k1)
    carry = ONE
    for a, e in k2:
        v = d.get(a, 0) + e
        if v >= 1:
            v -= 1
            carry = carry * a.poly
        if v:
            d[a] = v
        else:
            d.pop(a, None)
    return tuple(sorted(d.items())), carry


def _combine(parts):
    """Sum a list of unreduced ``(num, den)`` pairs and reduce."""
    if len(parts) == 1:
        return _reduce(*parts[0])
    n0, d0 = parts[0]
    if all(d == d0 for _, d in parts):
        total = ZERO
        for n, _ in parts:
            total = total + n
        return _reduce(total, d0)
    num, den = ZERO, ONE
    for n, d in parts:
        if d == den:
            num = num + n
        else:
            num = num * d + n * den
            den = den * d
    return _reduce(num, den)


def _rational_root(v: Fraction, b: int):
    if v < 0:
        return None
    rn, en = integer_nthroot(v.numerator, b)
    rd, ed = integer_nthroot(v.denominator, b)
    if en and ed:
        return Fraction(int(rn), int(rd))
    return None


class Expr:
    """Immutable canonical expression; see module docstring."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=()):
        self._terms = terms
        self._hash = None

    # -- constructors -------------------------------------------------------------
    @staticmethod
    def const(c) -> "Expr":
        p = Poly.const(c)
        return Expr((((), p, ONE),)) if p else _EZERO

    @staticmethod
    def symbol(s: Symbol) -> "Expr":
        return Expr((((), Poly.var(s), ONE),))

    @staticmethod
    def from_poly(p: Poly) -> "Expr":
        return Expr((((), p, ONE),)) if p else _EZERO

    @staticmethod
    def ratfunc(n: Poly, d: Poly) -> "Expr":
        n, d = _reduce(n, d)
        return Expr((((), n, d),)) if n else _EZERO

    @staticmethod
    def _from_parts(acc: dict) -> "Expr":
        terms = []
        for key, parts in acc.items():
            n, d = _combine(parts)
            if n:
                terms.append((key, n, d))
        terms.sort(key=lambda t: t[0])
        return Expr(tuple(terms))

    # -- inspection -------------------------------------------------------------------
    @property
    def terms(self):
        return self._terms

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_polynomial(self) -> bool:
        t = self._terms
        return not t or (len(t) == 1 and not t[0][0] and t[0][2] == ONE)

    @property
    def is_rational(self) -> bool:
        """True when no radical atoms are present."""
        t = self._terms
        return not t or (len(t) == 1 and not t[0][0])

    @property
    def is_constant(self) -> bool:
        return self.is_rational and (not self._terms or (self._terms[0][1].is_const and self._terms[0][2].is_const))

    def as_poly(self) -> Poly:
        if not self.is_polynomial:
            raise UnsupportedOperation(f"not a polynomial: {self}")
        return self._terms[0][1] if self._terms else ZERO

    def as_ratfunc(self):
        if not self.is_rational:
            raise UnsupportedOperation(f"expression has radicals: {self}")
        if not self._terms:
            return ZERO, ONE
        return self._terms[0][1], self._terms[0][2]

    def as_rational(self) -> Fraction:
        if not self.is_constant:
            raise UnsupportedOperation(f"not a constant: {self}")
        return self._terms[0][1].const_value() if self._terms else Fraction(0)

    @property
    def free_symbols(self) -> set:
        out = set()
        for key, n, d in self._terms:
            out |= n.symbols()
            out |= d.symbols()
            for a, _ in key:
                out |= a.poly.symbols()
        return out

    def radical_bases(self) -> dict:
        """Map each polynomial atom to the lcm of its exponent denominators."""
        out: dict = {}
        for key, _, _ in self._terms:
            for a, e in key:
                q = e.denominator
                prev = out.get(a, 1)
                out[a] = prev * q // _gcd(prev, q)
        return out

    def __eq__(self, other):
        if isinstance(other, Expr):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == Expr.const(other)._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    # -- arithmetic -------------------------------------------------------------------
    def __add__(self, other) -> "Expr":
        other = as_expr(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        if self.is_polynomial and other.is_polynomial:
            return Expr.from_poly(self._terms[0][1] + other._terms[0][1])
        acc: dict = {}
        for key, n, d in self._terms + other._terms:
            acc.setdefault(key, []).append((n, d))
        return Expr._from_parts(acc)

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr(tuple((k, -n, d) for k, n, d in self._terms))

    def __sub__(self, other) -> "Expr":
        return self + (-as_expr(other))

    def __rsub__(self, other) -> "Expr":
        return as_expr(other) + (-self)

    def __mul__(self, other) -> "Expr":
        other = as_expr(other)
        if not self._terms or not other._terms:
            return _EZERO
        if self.is_polynomial and other.is_polynomial:
            return Expr.from_poly(self._terms[0][1] * other._terms[0][1])
        acc: dict = {}
        for k1, n1, d1 in self._terms:
            for k2, n2, d2 in other._terms:
                key, carry = _key_mul(k1, k2)
                num = n1 * n2
                if carry != ONE:
                    num = num * carry
                acc.setdefault(key, []).append((num, d1 * d2))
        return Expr._from_parts(acc)

    __rmul__ = __mul__

    def _inverse_single(self) -> "Expr":
        (key, n, d), = self._terms
        den = n
        new_key = []
        for a, e in key:
            den = den * a.poly
            new_key.append((a, 1 - e))
        n2, d2 = _reduce(d, den)
        return Expr(((tuple(new_key), n2, d2),))

    def __truediv__(self, other) -> "Expr":
        other = as_expr(other)
        if not other._terms:
            raise DivisionByZero("division by zero")
        if len(other._terms) == 1:
            return self * other._inverse_single()
        # rationalize square roots by conjugation, one atom at a time
        num, den = self, other
        while len(den._terms) > 1:
            atom = None
            for key, _, _ in den._terms:
                for a, e in key:
                    if e.denominator != 2:
                        raise UnsupportedOperation("cannot rationalize a denominator with non-square radicals")
                    atom = a
                    break
                if atom is not None:
                    break
            if atom is None:  # pragma: no cover - multi-term implies radicals
                break
            conj = Expr(tuple((k, -n if any(a == atom for a, _ in k) else n, d) for k, n, d in den._terms))
            num = num * conj
            den = den * conj
        if not den._terms:
            raise DivisionByZero("division by zero")
        return num * den._inverse_single()

    def __rtruediv__(self, other) -> "Expr":
        return as_expr(other) / self

    def __pow__(self, q) -> "Expr":
        q = Fraction(q)
        if q.denominator == 1:
            n = q.numerator
            if n < 0:
                return Expr.const(1) / (self ** (-n))
            result = Expr.const(1)
            base = self
            while n:
                if n & 1:
                    result = result * base
                n >>= 1
                if n:
                    base = base * base
            return result
        return self._guarded_pow(q)

    def _guarded_pow(self, q: Fraction) -> "Expr":
        if not self._terms:
            if q > 0:
                return _EZERO
            raise DivisionByZero("zero to a negative power")
        if len(self._terms) != 1:
            raise NegativeBaseFractionalPower(f"fractional power of a non-monomial radical expression: {self}")
        (key, n, d), = self._terms
        fn = positive_factorization(n)
        fd = positive_factorization(d)
        if fn is None or fd is None:
            raise NegativeBaseFractionalPower(f"cannot certify ({self}) > 0 for exponent {q}")
        result = _rational_power(fn[0] / fd[0], q)
        for a, e in key:
            result = result * _atom_power(a, e * q)
        for f, m in fn[1]:
            result = result * _atom_power(poly_atom(f), m * q)
        for f, m in fd[1]:
            result = result * _atom_power(poly_atom(f), -m * q)
        return result

    # -- calculus ----------------------------------------------------------------------
    def diff(self, s: Symbol) -> "Expr":
        if s not in self.free_symbols:
            return _EZERO
        total = _EZERO
        for key, n, d in self._terms:
            dn, dd = n.diff(s), d.diff(s)
            mono = Expr(((key, ONE, ONE),))
            if dd.is_zero:
                dr = Expr.ratfunc(dn, d)
            else:
                dr = Expr.ratfunc(dn * d - n * dd, d * d)
            piece = dr * mono
            log_d = _EZERO
            for a, e in key:
                da = a.poly.diff(s)
                if da:
                    log_d = log_d + Expr.ratfunc(da.scale(e), a.poly)
            if log_d._terms:
                piece = piece + Expr.ratfunc(n, d) * mono * log_d
            total = total + piece
        return total

    def subs(self, bindings: Mapping[Symbol, object]) -> "Expr":
        """Simultaneous substitution ``symbol -> value`` followed by normalization."""
        bindings = {s: as_expr(v) for s, v in bindings.items()}
        if not (self.free_symbols & bindings.keys()):
            return self
        cache: dict = {}

        def sub_poly(p: Poly) -> Expr:
            if p in cache:
                return cache[p]
            point = {s: bindings[s] if s in bindings else Expr.symbol(s) for s in p.symbols()}
            val = as_expr(p.evaluate(point))
            cache[p] = val
            return val

        total = _EZERO
        for key, n, d in self._terms:
            den = sub_poly(d)
            if den.is_zero:
                raise DivisionByZero(f"substitution makes the denominator {format_poly(d)} vanish")
            piece = sub_poly(n) / den
            for a, e in key:
                piece = piece * (sub_poly(a.poly) ** e)
            total = total + piece
        return total

    def eval_rational(self, point: Mapping[Symbol, object]) -> Fraction:
        """Exact value at a rational point (all free symbols must be bound)."""
        total = Fraction(0)
        for key, n, d in self._terms:
            dv = d.evaluate(point)
            if dv == 0:
                raise DivisionByZero(f"pole of {self} at the given point")
            val = Fraction(n.evaluate(point)) / dv
            if val == 0:
                continue
            for a, e in key:
                av = Fraction(a.poly.evaluate(point))
                root = _rational_root(av, e.denominator)
                if root is None:
                    raise IrrationalValue(f"{a}^({e}) is irrational at the given point")
                val *= root ** e.numerator
            total += val
        return total

    def evaluate(self, point: Mapping[Symbol, object]):
        """Evaluate a radical-free expression with arbitrary field elements (floats, series)."""
        n, d = self.as_ratfunc()
        if d == ONE:
            return n.evaluate(point)
        return n.evaluate(point) / d.evaluate(point)

    # -- printing -----------------------------------------------------------------------
    def __str__(self):
        if not self._terms:
            return "0"
        out = []
        for i, (key, n, d) in enumerate(self._terms):
            s = _format_term(key, n, d)
            if i == 0:
                out.append(s)
            elif s.startswith("-"):
                out.append(" - " + s[1:])
            else:
                out.append(" + " + s)
        return "".join(out)

    def __repr__(self):
        return f"Expr({self})"


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _format_term(key, n: Poly, d: Poly) -> str:
    rad = "*".join(f"{a}^({format_rational(e)})" for a, e in key)
    if len(n.terms) == 1:
        ns = format_poly(n)
        if rad:
            if ns == "1":
                ns = rad
            elif ns == "-1":
                ns = "-" + rad
            else:
                ns = f"{ns}*{rad}"
    elif not rad and d == ONE:
        ns = format_poly(n)
    else:
        ns = f"({format_poly(n)})"
        if rad:
            ns = f"{ns}*{rad}"
    if d == ONE:
        return ns
    ds = format_poly(d)
    if len(d.terms) > 1:
        ds = f"({ds})"
    return f"{ns}/{ds}"


def _atom_power(a: Atom, r: Fraction) -> Expr:
    fl = floor(r)
    fr = r - fl
    key = ((a, fr),) if fr else ()
    if fl >= 0:
        n, d = a.poly ** fl, ONE
    else:
        n, d = ONE, a.poly ** (-fl)
    n, d = _reduce(n, d)
    return Expr(((key, n, d),))


def _rational_power(c: Fraction, q: Fraction) -> Expr:
    result = Expr.const(1)
    for part, sign in ((c.numerator, 1), (c.denominator, -1)):
        if part == 1:
            continue
        for p, m in sorted(factorint(part).items()):
            result = result * _atom_power(prime_atom(int(p)), sign * m * q)
    return result


_EZERO = Expr(())


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Expr.const(x)
    if isinstance(x, Symbol):
        return Expr.symbol(x)
    if isinstance(x, Poly):
        return Expr.from_poly(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def sym(s: Symbol) -> Expr:
    return Expr.symbol(s)
