"""Sparse multivariate polynomials over the rationals.

Monomials are tuples of ``(Symbol, exponent)`` pairs sorted by symbol, so
they hash and compare natively.  Multivariate gcd and factorization are
delegated to :mod:`sympy.polys` (converted on demand through a ring of
dummy generators); everything else is plain dict arithmetic.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Iterable, Mapping, NamedTuple

import sympy
from sympy import QQ
from sympy.polys.rings import ring as _sympy_ring


class Symbol(NamedTuple):
    """A coordinate symbol.

    ``kind`` is 0 for base/free symbols, 1 for dependent variables and 2 for
    jet coordinates of positive order; tuple comparison then gives the
    canonical symbol ordering (kind, order, base name, index).
    """

    kind: int
    order: int
    base: str
    index: tuple = ()

    @property
    def name(self) -> str:
        if self.kind != 2:
            return self.base
        if len(self.index) == 1:
            return f"{self.base}{self.index[0]}"
        return f"{self.base}[{','.join(str(i) for i in self.index)}]"

    def __str__(self):
        return self.name

    def __repr__(self):
        return f"Symbol({self.name!r})"


def symbol(name: str) -> Symbol:
    return Symbol(0, 0, name, ())


def dependent(name: str) -> Symbol:
    return Symbol(1, 0, name, ())


def jet_symbol(base: str, index: Iterable[int]) -> Symbol:
    index = tuple(int(i) for i in index)
    order = sum(index)
    if order == 0:
        return dependent(base)
    return Symbol(2, order, base, index)


def mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        sa, ea = a[i]
        sb, eb = b[j]
        if sa == sb:
            out.append((sa, ea + eb))
            i += 1
            j += 1
        elif sa < sb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    if i < la:
        out.extend(a[i:])
    if j < lb:
        out.extend(b[j:])
    return tuple(out)


def mono_degree(m: tuple) -> int:
    return sum(e for _, e in m)


def mono_key(m: tuple):
    return (mono_degree(m), m)


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    # gmpy2.mpq / sympy rationals
    return Fraction(int(c.numerator), int(c.denominator))


class Poly:
    """Immutable sparse polynomial with :class:`~fractions.Fraction` coefficients."""

    __slots__ = ("_t", "_hash")

    def __init__(self, terms: Mapping[tuple, Fraction] | None = None, _clean=False):
        if terms is None:
            self._t = {}
        elif _clean:
            self._t = terms
        else:
            self._t = {m: _frac(c) for m, c in terms.items() if c != 0}
        self._hash = None

    @classmethod
    def const(cls, c) -> "Poly":
        c = _frac(c)
        return cls({(): c}, _clean=True) if c else ZERO

    @classmethod
    def var(cls, s: Symbol) -> "Poly":
        return cls({((s, 1),): Fraction(1)}, _clean=True)

    @property
    def terms(self) -> Mapping[tuple, Fraction]:
        return self._t

    def items_sorted(self):
        return sorted(self._t.items(), key=lambda kv: mono_key(kv[0]))

    # -- predicates ---------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self._t

    @property
    def is_const(self) -> bool:
        return not self._t or (len(self._t) == 1 and () in self._t)

    def const_value(self) -> Fraction:
        return self._t.get((), Fraction(0))

    def __bool__(self):
        return bool(self._t)

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other: "Poly") -> "Poly":
        if not other._t:
            return self
        if not self._t:
            return other
        t = dict(self._t)
        for m, c in other._t.items():
            v = t.get(m)
            if v is None:
                t[m] = c
            else:
                v += c
                if v:
                    t[m] = v
                else:
                    del t[m]
        return Poly(t, _clean=True)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self._t.items()}, _clean=True)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if not self._t or not other._t:
            return ZERO
        if len(other._t) == 1 and () in other._t:
            return self.scale(other._t[()])
        if len(self._t) == 1 and () in self._t:
            return other.scale(self._t[()])
        t: dict = {}
        for ma, ca in self._t.items():
            for mb, cb in other._t.items():
                m = mono_mul(ma, mb)
                v = t.get(m)
                t[m] = ca * cb if v is None else v + ca * cb
        return Poly({m: c for m, c in t.items() if c}, _clean=True)

    def scale(self, c) -> "Poly":
        c = _frac(c)
        if not c:
            return ZERO
        if c == 1:
            return self
        return Poly({m: v * c for m, v in self._t.items()}, _clean=True)

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self._t == other._t

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._t.items()))
        return self._hash

    # -- calculus / structure ----------------------------------------------------
    def symbols(self) -> set:
        return {s for m in self._t for s, _ in m}

    def degree(self) -> int:
        return max((mono_degree(m) for m in self._t), default=0)

    def degree_in(self, s: Symbol) -> int:
        return max((e for m in self._t for t, e in m if t == s), default=0)

    def diff(self, s: Symbol) -> "Poly":
        t: dict = {}
        for m, c in self._t.items():
            for k, (t_s, e) in enumerate(m):
                if t_s == s:
                    nm = m[:k] + ((s, e - 1),) + m[k + 1:] if e > 1 else m[:k] + m[k + 1:]
                    t[nm] = t.get(nm, 0) + c * e
                    break
        return Poly(t)

    def evaluate(self, point: Mapping[Symbol, object]):
        """Evaluate at ``point``; values may be any ring elements (Fraction, float, series)."""
        total = 0
        for m, c in self._t.items():
            term = c
            for s, e in m:
                term = term * point[s] ** e
            total = total + term
        return total

    def leading(self):
        m = max(self._t, key=mono_key)
        return m, self._t[m]

    def sort_tuple(self) -> tuple:
        return tuple(self.items_sorted())

    def content(self) -> Fraction:
        """Positive rational c with self/c primitive with integer coefficients."""
        if not self._t:
            return Fraction(1)
        num = 0
        den = 1
        for c in self._t.values():
            num = gcd(num, c.numerator)
            den = lcm(den, c.denominator)
        return Fraction(num, den)

    # -- sympy bridge ----------------------------------------------------------------
    def _to_ring(self, gens: tuple):
        R = _ring_for(len(gens))
        index = {s: i for i, s in enumerate(gens)}
        n = len(gens)
        d = {}
        for m, c in self._t.items():
            exps = [0] * n
            for s, e in m:
                exps[index[s]] = e
            d[tuple(exps)] = QQ(c.numerator, c.denominator)
        return R.from_dict(d) if d else R.zero

    @staticmethod
    def _from_ring(p, gens: tuple) -> "Poly":
        t = {}
        for exps, c in p.terms():
            m = tuple((gens[i], e) for i, e in enumerate(exps) if e)
            t[m] = _frac(c)
        return Poly(t, _clean=True)

    def cofactors(self, other: "Poly"):
        """Return ``(g, self/g, other/g)`` with ``g`` a gcd."""
        gens = tuple(sorted(self.symbols() | other.symbols()))
        if not gens:
            return ONE, self, other
        a, b = self._to_ring(gens), other._to_ring(gens)
        g, ca, cb = a.cofactors(b)
        return Poly._from_ring(g, gens), Poly._from_ring(ca, gens), Poly._from_ring(cb, gens)

    def factor_list(self):
        gens = tuple(sorted(self.symbols()))
        if not gens:
            return self.const_value(), []
        c, facs = self._to_ring(gens).factor_list()
        return _frac(c), [(Poly._from_ring(f, gens), m) for f, m in facs]

    def real_root_count(self):
        """Number of real roots of a univariate polynomial (None if multivariate)."""
        syms = self.symbols()
        if len(syms) != 1:
            return None
        (s,) = syms
        x = sympy.Symbol("x")
        coeffs = [0] * (self.degree() + 1)
        for m, c in self._t.items():
            e = m[0][1] if m else 0
            coeffs[e] = sympy.Rational(c.numerator, c.denominator)
        return sympy.Poly(list(reversed(coeffs)), x).count_roots()

    def __repr__(self):
        return f"Poly({format_poly(self)})"

    def __str__(self):
        return format_poly(self)


@lru_cache(maxsize=None)
def _ring_for(n: int):
    gens = sympy.symbols(f"z0:{n}")
    R, *_ = _sympy_ring(gens, QQ)
    return R


ZERO = Poly({}, _clean=True)
ONE = Poly({(): Fraction(1)}, _clean=True)


def format_rational(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def format_monomial(m: tuple) -> str:
    return "*".join(s.name if e == 1 else f"{s.name}^{e}" for s, e in m)


def format_poly(p: Poly) -> str:
    if p.is_zero:
        return "0"
    out = []
    for k, (m, c) in enumerate(p.items_sorted()):
        neg = c < 0
        a = -c if neg else c
        if not m:
            body = format_rational(a)
        elif a == 1:
            body = format_monomial(m)
        else:
            body = f"{format_rational(a)}*{format_monomial(m)}"
        if k == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)
