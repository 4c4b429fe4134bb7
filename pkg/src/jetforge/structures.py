"""Automorphisms of tensor structures: Lie derivatives, the linear Lie
equations R_q(S) as systems in the jets of a vector field, their formal
prolongations, finite automorphism tests and the affine system cut out by
the top-order jets of a finite automorphism."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import comb
from typing import Mapping, Sequence

from .errors import OrderMismatch, PrerequisiteNotAutomorphism
from .jetspace import JetSpec, MultiIndex, PolyJet, multi_indices, multi_indices_upto
from .prolongation import VectorField, groupoid_act
from .symcore import Expr, Symbol
from .symcore import linalg
from .tensors import StructureField, TensorJet, TensorType, pullback_jet

__all__ = [
    "AffineJetSystem",
    "LinearJetSystem",
    "RegularityReport",
    "StructureField",
    "TensorType",
    "automorphism_test",
    "isotropy_fiber",
    "lie_derivative",
    "lie_equation",
    "nonlinear_symbol_system",
    "phi_S",
    "prolong_system",
    "psi_S",
]

ZERO = Expr.const(0)


def _replace(idx: tuple, pos: int, value: int) -> tuple:
    return idx[:pos] + (value,) + idx[pos + 1:]


def _point_dict(coords: Sequence[Symbol], point) -> dict:
    if isinstance(point, Mapping):
        return {s: Fraction(point[s]) for s in coords}
    return {s: Fraction(p) for s, p in zip(coords, point)}


@dataclass
class RegularityReport:
    """Fiber ranks at sample points; ``violation`` flags a rank change."""

    ranks: list
    points: list

    @property
    def constant(self) -> bool:
        return len(set(self.ranks)) <= 1

    @property
    def violation(self) -> bool:
        return not self.constant

    @property
    def generic_rank(self) -> int:
        return max(self.ranks) if self.ranks else 0


@dataclass
class LinearJetSystem:
    """Homogeneous linear equations in the jets xi^i_J (|J| <= order) of a
    vector field on R^n, with coefficients depending on the base point.

    Each equation maps an unknown ``(i, J)`` to its Expr coefficient.
    """

    coords: tuple
    order: int
    equations: list = field(default_factory=list)

    def __post_init__(self):
        self.coords = tuple(self.coords)
        cleaned = []
        for eq in self.equations:
            eq = {(i, MultiIndex(J)): c for (i, J), c in eq.items() if not c.is_zero}
            for (i, J) in eq:
                if J.order > self.order or not 0 <= i < self.n or len(J) != self.n:
                    raise ValueError(f"unknown {(i, tuple(J))} outside the order-{self.order} jet of a field on R^{self.n}")
            cleaned.append(eq)
        self.equations = cleaned

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def base_symbols(self) -> tuple:
        from .symcore import symbol

        return tuple(symbol(c) for c in self.coords)

    def unknowns(self) -> list:
        """Column order: by J, then by component."""
        return [(i, J) for J in multi_indices_upto(self.n, self.order) for i in range(self.n)]

    @property
    def unknown_count(self) -> int:
        return self.n * comb(self.n + self.order, self.order)

    def unknown_name(self, key) -> str:
        i, J = key
        return f"xi{i + 1}[{','.join(map(str, J))}]"

    def fiber_matrix(self, point) -> list:
        """Exact rational matrix of the system at ``point``."""
        at = _point_dict(self.base_symbols, point)
        cols = {key: c for c, key in enumerate(self.unknowns())}
        width = len(cols)
        rows = []
        cache: dict = {}
        for eq in self.equations:
            row = [Fraction(0)] * width
            for key, coef in eq.items():
                if coef not in cache:
                    cache[coef] = coef.eval_rational(at)
                row[cols[key]] = cache[coef]
            rows.append(row)
        return rows

    def rank(self, point) -> int:
        return linalg.rank(self.fiber_matrix(point), self.unknown_count)

    def solution_dimension(self, point) -> int:
        return self.unknown_count - self.rank(point)

    def fiber_solutions(self, point) -> list:
        """Kernel basis as dicts (i, J) -> Fraction."""
        keys = self.unknowns()
        basis = linalg.nullspace(self.fiber_matrix(point), len(keys))
        return [{k: v for k, v in zip(keys, vec) if v != 0} for vec in basis]

    def top_block(self, point) -> list:
        """Columns of the fiber matrix with |J| = order (defines the symbol)."""
        keys = self.unknowns()
        top = [c for c, (i, J) in enumerate(keys) if J.order == self.order]
        return [[row[c] for c in top] for row in self.fiber_matrix(point)]

    def rank_profile(self, points) -> RegularityReport:
        pts = list(points)
        return RegularityReport([self.rank(p) for p in pts], pts)

    def is_homogeneous_linear(self) -> bool:
        """Coefficients never involve the unknowns (they are base functions)."""
        allowed = set(self.base_symbols)
        return all(c.free_symbols <= allowed for eq in self.equations for c in eq.values())

    def format_equations(self) -> list:
        out = []
        for eq in self.equations:
            parts = []
            for key in sorted(eq, key=lambda k: (k[1].sort_key(), k[0])):
                c = eq[key]
                cs = str(c)
                if cs == "1":
                    parts.append(self.unknown_name(key))
                elif cs == "-1":
                    parts.append("-" + self.unknown_name(key))
                else:
                    if len(c.free_symbols) or "+" in cs or " - " in cs:
                        cs = f"({cs})"
                    parts.append(f"{cs}*{self.unknown_name(key)}")
            text = " + ".join(parts).replace("+ -", "- ")
            out.append(text or "0")
        return out


def _structure_vector_field_spec(S: StructureField) -> JetSpec:
    return JetSpec(S.coords, ())


def lie_derivative(v: VectorField, S: StructureField) -> StructureField:
    """Classical Lie derivative L_v S of a tensor field."""
    if v.spec.m:
        raise ValueError("structures live on the base; the field must have no fiber part")
    if tuple(v.spec.independents) != S.coords:
        raise ValueError("vector field and structure use different coordinates")
    xs = S.base_symbols
    n = S.n
    r, s = S.ttype.contravariant, S.ttype.covariant
    dxi = [[v.xi[i].diff(x) for x in xs] for i in range(n)]
    out = {}
    for I in S.ttype.component_indices(n):
        acc = ZERO
        for k in range(n):
            if not v.xi[k].is_zero:
                acc = acc + v.xi[k] * S.full(I).diff(xs[k])
        for t in range(r):
            for k in range(n):
                if not dxi[I[t]][k].is_zero:
                    acc = acc - S.full(_replace(I, t, k)) * dxi[I[t]][k]
        for t in range(r, r + s):
            for k in range(n):
                if not dxi[k][I[t]].is_zero:
                    acc = acc + S.full(_replace(I, t, k)) * dxi[k][I[t]]
        out[I] = acc
    return StructureField(S.coords, S.ttype, out, S.name)


def psi_S(S: StructureField) -> LinearJetSystem:
    """Order-1 system whose rows are the components of L_xi S as linear forms
    in (xi^i, d_j xi^i)."""
    n = S.n
    xs = S.base_symbols
    r, s = S.ttype.contravariant, S.ttype.covariant
    zero = MultiIndex.zero(n)
    eqs = []
    for I in S.ttype.component_indices(n):
        eq: dict = {}

        def add(key, c):
            if not c.is_zero:
                eq[key] = eq.get(key, ZERO) + c

        for k in range(n):
            add((k, zero), S.full(I).diff(xs[k]))
        for t in range(r):
            for k in range(n):
                add((I[t], MultiIndex.unit(n, k)), -S.full(_replace(I, t, k)))
        for t in range(r, r + s):
            for k in range(n):
                add((k, MultiIndex.unit(n, I[t])), S.full(_replace(I, t, k)))
        eqs.append(eq)
    return LinearJetSystem(S.coords, 1, eqs)


def _formal_derivative(eq: dict, j: int, xs: Sequence[Symbol]) -> dict:
    out: dict = {}
    for (i, J), c in eq.items():
        dc = c.diff(xs[j])
        if not dc.is_zero:
            out[(i, J)] = out.get((i, J), ZERO) + dc
        key = (i, J.plus(j))
        out[key] = out.get(key, ZERO) + c
    return {k: c for k, c in out.items() if not c.is_zero}


def prolong_system(sys: LinearJetSystem, h: int) -> LinearJetSystem:
    """Adjoin the formal derivatives d_alpha(eq), |alpha| <= h, of every equation."""
    if h < 0:
        raise ValueError("prolongation steps must be non-negative")
    if h == 0:
        return sys
    n = sys.n
    xs = sys.base_symbols
    derived = {MultiIndex.zero(n): list(sys.equations)}
    for r in range(1, h + 1):
        for alpha in multi_indices(n, r):
            j = alpha.first_nonzero()
            derived[alpha] = [_formal_derivative(eq, j, xs) for eq in derived[alpha.minus(j)]]
    eqs = [eq for alpha in multi_indices_upto(n, h) for eq in derived[alpha]]
    return LinearJetSystem(sys.coords, sys.order + h, eqs)


def lie_equation(S: StructureField, q: int) -> LinearJetSystem:
    """R_q(S) for q >= 1: the (q - 1)-th prolongation of psi_S."""
    if q < 1:
        raise ValueError("the Lie equation of a tensor structure starts at order 1")
    return prolong_system(psi_S(S), q - 1)


def isotropy_fiber(sys: LinearJetSystem, point) -> list:
    """Kernel of the fiber matrix intersected with {xi^i(point) = 0}."""
    keys = sys.unknowns()
    rows = sys.fiber_matrix(point)
    zero = MultiIndex.zero(sys.n)
    for c, (i, J) in enumerate(keys):
        if J == zero:
            rows.append([Fraction(1) if d == c else Fraction(0) for d in range(len(keys))])
    basis = linalg.nullspace(rows, len(keys))
    return [{k: v for k, v in zip(keys, vec) if v != 0} for vec in basis]


# -- finite automorphisms --------------------------------------------------------------------


def _check_order(Z: PolyJet, k: int):
    if Z.order != 1 + k:
        raise OrderMismatch(f"a map jet of order {1 + k} is needed, got {Z.order}")


def phi_S(Z: PolyJet, S: StructureField, k: int) -> TensorJet:
    """Z^{-1}(j_k S(beta Z)): the target jet of S pulled back to the source."""
    _check_order(Z, k)
    return pullback_jet(Z, S.jet(Z.target, k))


def automorphism_test(Z: PolyJet, S: StructureField, k: int) -> bool:
    """True iff Z carries j_k S(alpha Z) onto j_k S(beta Z)."""
    _check_order(Z, k)
    return groupoid_act(Z, S.jet(Z.base, k)) == S.jet(Z.target, k)


@dataclass
class AffineJetSystem:
    """A z = b in the order-(k+1) Taylor coefficients z of a map jet."""

    unknowns: list
    rows: list
    matrix: list
    rhs: list

    @property
    def consistent(self) -> bool:
        return self.particular_solution() is not None

    def particular_solution(self):
        if not self.matrix:
            return [Fraction(0)] * len(self.unknowns)
        return linalg.solve(self.matrix, self.rhs)

    def kernel(self) -> list:
        return linalg.nullspace(self.matrix, len(self.unknowns)) if self.matrix else [
            [Fraction(1) if i == j else Fraction(0) for j in range(len(self.unknowns))] for i in range(len(self.unknowns))
        ]

    def solution_dimension(self) -> int:
        return len(self.kernel()) if self.consistent else -1

    def extend(self, base: PolyJet, z: Sequence) -> PolyJet:
        """The order-(k+1) jet obtained by adjoining top coefficients ``z``."""
        coeffs = [dict(c) for c in base.coeffs]
        for (lam, gamma), val in zip(self.unknowns, z):
            if val:
                coeffs[lam][gamma] = coeffs[lam].get(gamma, 0) + val
        return PolyJet(base.base, base.target, base.order + 1, coeffs)


def _tensor_residual(Z: PolyJet, S: StructureField, k: int, rows: list) -> list:
    got = phi_S(Z, S, k).coordinates()
    want = S.jet(Z.base, k).coordinates()
    return [got[r] - want[r] for r in rows]


def nonlinear_symbol_system(X: PolyJet, S: StructureField, k: int) -> AffineJetSystem:
    """Affine equations on the order-(k+1) coefficients of extensions of X
    that make the extension an element of R_{1+k}(S).

    X is a map jet of order k whose action matches S to order k - 1.
    """
    if X.order != k:
        raise OrderMismatch(f"expected a map jet of order {k}, got {X.order}")
    if k >= 1 and not automorphism_test(X, S, k - 1):
        raise PrerequisiteNotAutomorphism("the jet does not preserve the structure to the previous order")
    n = S.n
    unknowns = [(lam, g) for g in multi_indices(n, k + 1) for lam in range(n)]
    rows = [(idx, J) for idx in S.ttype.component_indices(n) for J in multi_indices_upto(n, k)]
    system = AffineJetSystem(unknowns, rows, [], [])
    F0 = _tensor_residual(system.extend(X, [0] * len(unknowns)), S, k, rows)
    cols = []
    for c in range(len(unknowns)):
        e = [0] * len(unknowns)
        e[c] = 1
        Fe = _tensor_residual(system.extend(X, e), S, k, rows)
        cols.append([a - b for a, b in zip(Fe, F0)])
    system.matrix = [[cols[c][r] for c in range(len(unknowns))] for r in range(len(rows))]
    system.rhs = [-v for v in F0]
    return system
