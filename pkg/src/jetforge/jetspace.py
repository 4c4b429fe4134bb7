"""Jet combinatorics: multi-indices, jet coordinates, total derivatives and
truncated Taylor maps (k-jets of maps between Euclidean spaces)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Mapping, Sequence

from .errors import BasePointMismatch, DivisionByZero, SingularLinearPart
from .symcore import Expr, Symbol, dependent, jet_symbol, symbol
from .symcore import linalg


class MultiIndex(tuple):
    """Exponent vector of a partial derivative; sorted by order, then reverse-lex."""

    __slots__ = ()

    def __new__(cls, exps=()):
        return super().__new__(cls, tuple(int(e) for e in exps))

    @classmethod
    def zero(cls, n):
        return cls((0,) * n)

    @classmethod
    def unit(cls, n, i):
        return cls(tuple(1 if j == i else 0 for j in range(n)))

    @property
    def order(self) -> int:
        return sum(self)

    def plus(self, i: int) -> "MultiIndex":
        return MultiIndex(self[:i] + (self[i] + 1,) + self[i + 1:])

    def minus(self, i: int) -> "MultiIndex":
        if self[i] == 0:
            raise ValueError("negative multi-index entry")
        return MultiIndex(self[:i] + (self[i] - 1,) + self[i + 1:])

    def add(self, other) -> "MultiIndex":
        return MultiIndex(a + b for a, b in zip(self, other))

    def factorial(self) -> int:
        out = 1
        for e in self:
            out *= factorial(e)
        return out

    def first_nonzero(self) -> int:
        return next(i for i, e in enumerate(self) if e)

    def sort_key(self):
        return (self.order, tuple(-e for e in self))


@lru_cache(maxsize=None)
def multi_indices(n: int, order: int) -> tuple:
    """All multi-indices of exactly ``order`` in ``n`` variables, in sort order."""
    if n == 0:
        return (MultiIndex(()),) if order == 0 else ()
    out = []

    def rec(prefix, left, slots):
        if slots == 1:
            out.append(MultiIndex(prefix + (left,)))
            return
        for e in range(left, -1, -1):
            rec(prefix + (e,), left - e, slots - 1)

    rec((), order, n)
    return tuple(out)


def multi_indices_upto(n: int, k: int) -> tuple:
    return tuple(J for r in range(k + 1) for J in multi_indices(n, r))


@dataclass(frozen=True)
class JetSpec:
    """Independent and dependent variable names plus a jet order."""

    independents: tuple
    dependents: tuple
    order: int = 0

    def __post_init__(self):
        object.__setattr__(self, "independents", tuple(self.independents))
        object.__setattr__(self, "dependents", tuple(self.dependents))
        if self.order < 0:
            raise ValueError("jet order must be non-negative")

    @property
    def n(self) -> int:
        return len(self.independents)

    @property
    def m(self) -> int:
        return len(self.dependents)

    def with_order(self, k: int) -> "JetSpec":
        return JetSpec(self.independents, self.dependents, k)

    @property
    def base_symbols(self) -> tuple:
        return tuple(symbol(x) for x in self.independents)

    @property
    def dependent_symbols(self) -> tuple:
        return tuple(dependent(u) for u in self.dependents)

    def jet(self, mu: int, J) -> Symbol:
        return jet_symbol(self.dependents[mu], J)

    def jet_coordinates(self, k: int | None = None) -> list:
        """Fiber coordinates ``u^mu_J`` with ``|J| <= k``, ordered by J then mu."""
        k = self.order if k is None else k
        return [self.jet(mu, J) for J in multi_indices_upto(self.n, k) for mu in range(self.m)]

    def coordinates(self, k: int | None = None) -> list:
        return list(self.base_symbols) + self.jet_coordinates(k)

    def dimension(self, k: int | None = None) -> int:
        k = self.order if k is None else k
        return self.n + self.m * comb(self.n + k, k)

    def decompose(self, s: Symbol):
        """``(mu, J)`` for a jet coordinate of this space, else None."""
        if s.kind == 0 or s.base not in self.dependents:
            return None
        mu = self.dependents.index(s.base)
        if s.kind == 1:
            return mu, MultiIndex.zero(self.n)
        if len(s.index) != self.n:
            return None
        return mu, MultiIndex(s.index)

    def resolve(self, name: str):
        if name in self.independents:
            return symbol(name)
        if name in self.dependents:
            return dependent(name)
        if "[" in name and name.endswith("]"):
            base, idx = name[:-1].split("[", 1)
            if base in self.dependents:
                J = tuple(int(t) for t in idx.split(","))
                if len(J) == self.n:
                    return jet_symbol(base, J)
            return None
        if self.n == 1:
            for u in sorted(self.dependents, key=len, reverse=True):
                rest = name[len(u):]
                if name.startswith(u) and rest.isdigit() and not rest.startswith("0"):
                    return jet_symbol(u, (int(rest),))
        return None

    def project(self, point: Mapping[Symbol, object], h: int) -> dict:
        """rho_{h,k}: forget jet coordinates of order > h."""
        out = {}
        for s, v in point.items():
            d = self.decompose(s)
            if d is None or d[1].order <= h:
                out[s] = v
        return out

    def expr_order(self, e: Expr) -> int:
        """Highest jet order occurring in ``e`` (0 when only base/dependents)."""
        best = 0
        for s in e.free_symbols:
            d = self.decompose(s)
            if d is not None:
                best = max(best, d[1].order)
        return best


def total_derivative(f: Expr, i: int, spec: JetSpec) -> Expr:
    """D_i f = df/dx_i + sum u^mu_{J+e_i} df/du^mu_J."""
    result = f.diff(symbol(spec.independents[i]))
    for s in sorted(f.free_symbols):
        d = spec.decompose(s)
        if d is None:
            continue
        mu, J = d
        result = result + Expr.symbol(spec.jet(mu, J.plus(i))) * f.diff(s)
    return result


def iterated_total_derivative(f: Expr, alpha: Sequence[int], spec: JetSpec) -> Expr:
    for i, a in enumerate(alpha):
        for _ in range(a):
            f = total_derivative(f, i, spec)
    return f


# -- derivatives of explicit functions ---------------------------------------------------


def partial_derivatives(e: Expr, variables: Sequence[Symbol], k: int) -> dict:
    """Map every multi-index J (|J| <= k) to the partial derivative d^J e."""
    n = len(variables)
    out = {MultiIndex.zero(n): e}
    for r in range(1, k + 1):
        for J in multi_indices(n, r):
            i = J.first_nonzero()
            out[J] = out[J.minus(i)].diff(variables[i])
    return out


def taylor_coefficients(e: Expr, variables: Sequence[Symbol], point: Sequence, k: int) -> dict:
    """Exact Taylor coefficients ``d^J e(point) / J!`` for |J| <= k."""
    at = dict(zip(variables, (Fraction(p) for p in point)))
    return {J: d.eval_rational(at) / J.factorial() for J, d in partial_derivatives(e, variables, k).items()}


def jet_of_section(components: Sequence[Expr], point: Sequence, k: int, spec: JetSpec) -> dict:
    """Coordinates of j_k sigma(point) in J_k: base values and u^mu_J = d^J sigma^mu."""
    base = spec.base_symbols
    at = dict(zip(base, (Fraction(p) for p in point)))
    out = dict(at)
    derivs = [partial_derivatives(c, base, k) for c in components]
    for J in multi_indices_upto(spec.n, k):
        for mu in range(spec.m):
            try:
                out[spec.jet(mu, J)] = derivs[mu][J].eval_rational(at)
            except ZeroDivisionError as exc:
                raise DivisionByZero(f"section has a pole at {tuple(point)}") from exc
    return out


# -- truncated Taylor series -------------------------------------------------------------------


def series_mul(a: dict, b: dict, k: int) -> dict:
    out: dict = {}
    for ja, ca in a.items():
        oa = sum(ja)
        for jb, cb in b.items():
            if oa + sum(jb) > k:
                continue
            j = tuple(x + y for x, y in zip(ja, jb))
            out[j] = out.get(j, 0) + ca * cb
    return {j: c for j, c in out.items() if c != 0}


def series_add(a: dict, b: dict, scale=1) -> dict:
    out = dict(a)
    for j, c in b.items():
        out[j] = out.get(j, 0) + scale * c
    return {j: c for j, c in out.items() if c != 0}


def series_scale(a: dict, c) -> dict:
    return {j: v * c for j, v in a.items() if v * c != 0}


def series_reciprocal(a: dict, n: int, k: int) -> dict:
    """1/a as a truncated series (constant term must be nonzero)."""
    zero = (0,) * n
    a0 = a.get(zero, 0)
    if a0 == 0:
        raise DivisionByZero("reciprocal of a series with zero constant term")
    inv0 = 1 / a0 if isinstance(a0, float) else Fraction(1) / a0
    rest = {j: c * inv0 for j, c in a.items() if j != zero}
    # 1/(a0 (1 + r)) = inv0 * sum (-r)^i
    out = {zero: 1}
    power = {zero: 1}
    for i in range(k):
        power = series_mul(power, rest, k)
        if not power:
            break
        out = series_add(out, power, scale=-1 if i % 2 == 0 else 1)
    return series_scale(out, inv0)


def series_eval_poly_expr(e: Expr, values: Mapping[Symbol, dict], n: int, k: int) -> dict:
    """Substitute truncated series for the symbols of a radical-free expression."""
    num, den = e.as_ratfunc()
    zero = (0,) * n

    def ev(p):
        total: dict = {}
        cache: dict = {}
        for m, c in p.terms.items():
            term = {zero: c}
            for s, exp in m:
                key = (s, exp)
                if key not in cache:
                    base = values[s]
                    pw = {zero: 1}
                    for _ in range(exp):
                        pw = series_mul(pw, base, k)
                    cache[key] = pw
                term = series_mul(term, cache[key], k)
            total = series_add(total, term)
        return total

    top = ev(num)
    if den.is_const:
        return series_scale(top, 1 / den.const_value()) if den.const_value() != 1 else top
    return series_mul(top, series_reciprocal(ev(den), n, k), k)


class PolyJet:
    """k-jet of a map R^p -> R^q at ``base``: Taylor coefficients per component.

    ``coeffs[c][J]`` is the coefficient of (x - base)^J in component c for
    1 <= |J| <= k; ``target`` is the value at ``base``.  Coefficients may be
    Fractions (exact) or floats (numeric harness).
    """

    __slots__ = ("base", "target", "order", "coeffs")

    def __init__(self, base, target, order, coeffs):
        self.base = tuple(base)
        self.target = tuple(target)
        self.order = order
        p = len(self.base)
        self.coeffs = tuple(
            {MultiIndex(J): c for J, c in comp.items() if 1 <= sum(J) <= order and c != 0} for comp in coeffs
        )
        for comp in self.coeffs:
            for J in comp:
                if len(J) != p:
                    raise ValueError("multi-index length does not match source dimension")

    @property
    def p(self) -> int:
        return len(self.base)

    @property
    def q(self) -> int:
        return len(self.target)

    @classmethod
    def identity(cls, point, k: int) -> "PolyJet":
        n = len(point)
        return cls(point, point, k, [{MultiIndex.unit(n, i): Fraction(1)} for i in range(n)])

    @classmethod
    def from_exprs(cls, exprs: Sequence[Expr], variables: Sequence[Symbol], point, k: int) -> "PolyJet":
        coeffs, target = [], []
        for e in exprs:
            tc = taylor_coefficients(e, variables, point, k)
            target.append(tc.pop(MultiIndex.zero(len(variables))))
            coeffs.append(tc)
        return cls(point, target, k, coeffs)

    @classmethod
    def affine(cls, matrix, point, target, k: int) -> "PolyJet":
        p = len(point)
        return cls(point, target, k, [{MultiIndex.unit(p, j): row[j] for j in range(p)} for row in matrix])

    def series(self, c: int) -> dict:
        """Component c as a series dict including its constant term."""
        zero = (0,) * self.p
        out = {tuple(J): v for J, v in self.coeffs[c].items()}
        if self.target[c] != 0:
            out[zero] = self.target[c]
        return out

    def linear_part(self) -> list:
        return [[self.coeffs[c].get(MultiIndex.unit(self.p, j), 0) for j in range(self.p)] for c in range(self.q)]

    def truncate(self, h: int) -> "PolyJet":
        return PolyJet(self.base, self.target, min(h, self.order), self.coeffs)

    def derivatives(self, c: int) -> dict:
        """d^J f_c(base) for 1 <= |J| <= k."""
        return {J: v * J.factorial() for J, v in self.coeffs[c].items()}

    def __eq__(self, other):
        if not isinstance(other, PolyJet):
            return NotImplemented
        return (self.base, self.target, self.order, self.coeffs) == (other.base, other.target, other.order, other.coeffs)

    def __hash__(self):
        return hash((self.base, self.target, self.order))

    def __repr__(self):
        return f"PolyJet(base={self.base}, target={self.target}, order={self.order}, coeffs={self.coeffs})"

    def is_close(self, other: "PolyJet", tol: float) -> bool:
        if self.p != other.p or self.q != other.q:
            return False
        pairs = list(zip(self.base, other.base)) + list(zip(self.target, other.target))
        for a, b in zip(self.coeffs, other.coeffs):
            for J in set(a) | set(b):
                pairs.append((a.get(J, 0), b.get(J, 0)))
        return all(abs(x - y) <= tol for x, y in pairs)


def _compose_series(g: PolyJet, deltas: list, n: int, k: int) -> list:
    """Components of g evaluated on series ``deltas`` (zero constant terms)."""
    zero = (0,) * n
    powers = {MultiIndex.zero(g.p): {zero: 1}}

    def power(K):
        if K not in powers:
            i = K.first_nonzero()
            powers[K] = series_mul(power(K.minus(i)), deltas[i], k)
        return powers[K]

    out = []
    for c in range(g.q):
        acc = {zero: g.target[c]} if g.target[c] != 0 else {}
        for K in sorted(g.coeffs[c], key=MultiIndex.sort_key):
            if K.order > k:
                continue
            acc = series_add(acc, power(K), scale=g.coeffs[c][K])
        out.append(acc)
    return out


def polyjet_compose(g: PolyJet, f: PolyJet) -> PolyJet:
    """k-jet of g o f at f.base, truncated to the smaller order."""
    if f.q != g.p:
        raise ValueError("dimension mismatch in composition")
    if tuple(f.target) != tuple(g.base):
        raise BasePointMismatch(f"f maps {f.base} to {f.target}, g is based at {g.base}")
    k = min(f.order, g.order)
    n = f.p
    deltas = []
    for j in range(f.q):
        s = f.series(j)
        s.pop((0,) * n, None)
        deltas.append(s)
    comps = _compose_series(g, deltas, n, k)
    zero = (0,) * n
    target = [comp.pop(zero, 0) for comp in comps]
    return PolyJet(f.base, target, k, comps)


def polyjet_invert(f: PolyJet, tol=None) -> PolyJet:
    """Two-sided inverse jet; raises SingularLinearPart if the linear part is singular."""
    if f.p != f.q:
        raise SingularLinearPart("non-square jet has no inverse")
    A = f.linear_part()
    try:
        Ainv = linalg.inverse(A, tol=tol)
    except SingularLinearPart:
        raise SingularLinearPart("linear part of the jet is singular") from None
    k = f.order
    n = f.p
    h = PolyJet.affine(Ainv, f.target, f.base, k)
    for _ in range(max(k - 1, 0)):
        fh = polyjet_compose(f, h)
        # residual r(y) = f(h(y)) - y, only nonlinear terms survive
        corr = []
        for c in range(n):
            res = {J: v for J, v in fh.coeffs[c].items()}
            res[MultiIndex.unit(n, c)] = res.get(MultiIndex.unit(n, c), 0) - 1
            corr.append(res)
        new = []
        for i in range(n):
            comp = dict(h.coeffs[i])
            for c in range(n):
                a = Ainv[i][c]
                if a == 0:
                    continue
                for J, v in corr[c].items():
                    comp[J] = comp.get(J, 0) - a * v
            new.append(comp)
        h = PolyJet(h.base, h.target, k, new)
    return h
