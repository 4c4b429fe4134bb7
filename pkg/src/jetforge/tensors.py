"""Tensor bundles over R^n and the action of map jets on tensor jets."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, permutations, product
from typing import Mapping, Sequence

from .errors import BasePointMismatch, OrderMismatch
from .jetspace import (
    MultiIndex,
    PolyJet,
    multi_indices_upto,
    polyjet_compose,
    polyjet_invert,
    series_add,
    series_mul,
    taylor_coefficients,
)
from .symcore import Expr, Symbol
from .symcore import linalg

SYMMETRIES = ("none", "symmetric", "antisymmetric")


def _perm_sign(p) -> int:
    sign = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


@dataclass(frozen=True)
class TensorType:
    """(r, s) tensors with an optional symmetry on the covariant slots."""

    contravariant: int = 0
    covariant: int = 2
    symmetry: str = "none"

    def __post_init__(self):
        if self.symmetry not in SYMMETRIES:
            raise ValueError(f"symmetry must be one of {SYMMETRIES}")

    def covariant_indices(self, n: int) -> list:
        s = self.covariant
        if self.symmetry == "symmetric":
            return list(combinations_with_replacement(range(n), s))
        if self.symmetry == "antisymmetric":
            return list(combinations(range(n), s))
        return list(product(range(n), repeat=s))

    def component_indices(self, n: int) -> list:
        """Independent components as full index tuples (contravariant first)."""
        return [a + b for a in product(range(n), repeat=self.contravariant) for b in self.covariant_indices(n)]

    def fiber_dimension(self, n: int) -> int:
        return len(self.component_indices(n))

    def canonical(self, idx: tuple):
        """``(sign, independent index)`` for any full index; sign 0 if forced zero."""
        r = self.contravariant
        a, b = idx[:r], idx[r:]
        if self.symmetry == "none" or len(b) < 2:
            return 1, idx
        order = sorted(range(len(b)), key=lambda i: b[i])
        sb = tuple(b[i] for i in order)
        if self.symmetry == "symmetric":
            return 1, a + sb
        if len(set(sb)) < len(sb):
            return 0, None
        return _perm_sign(order), a + sb

    def full_indices(self, n: int) -> list:
        return list(product(range(n), repeat=self.contravariant + self.covariant))

    def component_name(self, base: str, idx: tuple) -> str:
        return base + "".join(str(i + 1) for i in idx)


@dataclass
class StructureField:
    """A tensor field given by Expr components in the coordinates ``coords``."""

    coords: tuple
    ttype: TensorType
    components: dict
    name: str = "g"

    def __post_init__(self):
        self.coords = tuple(self.coords)
        n = len(self.coords)
        allowed = set(self.ttype.component_indices(n))
        comps = {}
        for idx, e in self.components.items():
            idx = tuple(idx)
            sign, canon = self.ttype.canonical(idx)
            if sign == 0:
                if not e.is_zero:
                    raise ValueError(f"component {idx} must vanish for an antisymmetric tensor")
                continue
            value = e if sign == 1 else -e
            if canon in comps and comps[canon] != value:
                raise ValueError(f"components {idx} and {canon} violate the {self.ttype.symmetry} symmetry")
            if canon not in allowed:
                raise ValueError(f"index {idx} out of range")
            comps[canon] = value
        self.components = {idx: comps.get(idx, Expr.const(0)) for idx in self.ttype.component_indices(n)}

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def base_symbols(self) -> tuple:
        from .symcore import symbol

        return tuple(symbol(c) for c in self.coords)

    def full(self, idx: tuple) -> Expr:
        sign, canon = self.ttype.canonical(idx)
        if sign == 0:
            return Expr.const(0)
        e = self.components[canon]
        return e if sign == 1 else -e

    def jet(self, point: Sequence, k: int) -> "TensorJet":
        """j_k S(point) as a TensorJet with exact Taylor coefficients."""
        comps = {
            idx: taylor_coefficients(e, self.base_symbols, point, k) for idx, e in self.components.items()
        }
        return TensorJet(tuple(Fraction(p) for p in point), self.ttype, self.n, k, comps)

    def fiber_names(self) -> list:
        return [self.ttype.component_name(self.name, idx) for idx in self.ttype.component_indices(self.n)]


class TensorJet:
    """k-jet of a tensor field at ``base``: Taylor coefficients of each independent component."""

    __slots__ = ("base", "ttype", "n", "order", "comps")

    def __init__(self, base, ttype: TensorType, n: int, order: int, comps: Mapping[tuple, Mapping]):
        self.base = tuple(base)
        self.ttype = ttype
        self.n = n
        self.order = order
        self.comps = {
            tuple(idx): {MultiIndex(J): c for J, c in series.items() if sum(J) <= order and c != 0}
            for idx, series in comps.items()
        }
        for idx in ttype.component_indices(n):
            self.comps.setdefault(idx, {})

    def full(self, idx: tuple) -> dict:
        sign, canon = self.ttype.canonical(idx)
        if sign == 0:
            return {}
        s = self.comps[canon]
        return s if sign == 1 else {J: -c for J, c in s.items()}

    def coordinates(self) -> dict:
        """Jet coordinates (component index, J) -> d^J T_idx(base)."""
        return {
            (idx, J): self.comps[idx].get(J, 0) * J.factorial()
            for idx in self.ttype.component_indices(self.n)
            for J in multi_indices_upto(self.n, self.order)
        }

    def values(self) -> dict:
        zero = MultiIndex.zero(self.n)
        return {idx: s.get(zero, 0) for idx, s in self.comps.items()}

    def truncate(self, h: int) -> "TensorJet":
        return TensorJet(self.base, self.ttype, self.n, min(h, self.order), self.comps)

    def __eq__(self, other):
        if not isinstance(other, TensorJet):
            return NotImplemented
        return (self.base, self.ttype, self.order, self.comps) == (other.base, other.ttype, other.order, other.comps)

    def __hash__(self):
        return hash((self.base, self.ttype, self.order))

    def __repr__(self):
        return f"TensorJet(base={self.base}, order={self.order}, comps={self.comps})"


def _series_derivative(series: dict, j: int) -> dict:
    out = {}
    for J, c in series.items():
        if J[j]:
            out[tuple(J[:j]) + (J[j] - 1,) + tuple(J[j + 1:])] = c * J[j]
    return out


def _matrix_series_inverse(M: list, n: int, k: int) -> list:
    """Inverse of a matrix of truncated series with invertible constant part."""
    zero = (0,) * n
    M0 = [[M[i][j].get(zero, 0) for j in range(n)] for i in range(n)]
    M0inv = linalg.inverse(M0)
    # N = M0^{-1} (M - M0); inverse = sum_i (-N)^i M0^{-1}
    rest = [[{J: c for J, c in M[i][j].items() if J != zero} for j in range(n)] for i in range(n)]
    N = [[{} for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            acc = {}
            for a in range(n):
                if M0inv[i][a] != 0 and rest[a][j]:
                    acc = series_add(acc, rest[a][j], scale=M0inv[i][a])
            N[i][j] = acc
    ident = [[{zero: 1} if i == j else {} for j in range(n)] for i in range(n)]
    total = ident
    power = ident
    for step in range(k):
        new = [[{} for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                acc = {}
                for a in range(n):
                    if power[i][a] and N[a][j]:
                        acc = series_add(acc, series_mul(power[i][a], N[a][j], k), scale=-1)
                new[i][j] = acc
        power = new
        total = [[series_add(total[i][j], power[i][j]) for j in range(n)] for i in range(n)]
    out = [[{} for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            acc = {}
            for a in range(n):
                if total[i][a] and M0inv[a][j] != 0:
                    acc = series_add(acc, total[i][a], scale=M0inv[a][j])
            out[i][j] = acc
    return out


def pullback_jet(phi: PolyJet, T: TensorJet) -> TensorJet:
    """k-jet of phi^* T at phi.base, where T is a k-jet at phi.target and
    ``phi`` has order >= k + 1."""
    k = T.order
    n = T.n
    if phi.p != n or phi.q != n:
        raise ValueError("map jet dimension does not match the tensor base")
    if phi.order < k + 1:
        raise OrderMismatch(f"a {k}-jet of a tensor needs a map jet of order {k + 1}, got {phi.order}")
    if tuple(phi.target) != tuple(T.base):
        raise BasePointMismatch(f"map jet targets {phi.target}, tensor jet is based at {T.base}")
    ttype = T.ttype
    zero_mi = MultiIndex.zero(n)
    full_idx = ttype.full_indices(n)
    # components of T composed with phi (order k)
    comps_list = list(full_idx)
    G = PolyJet(
        T.base,
        [T.full(idx).get(zero_mi, 0) for idx in comps_list],
        k,
        [{J: c for J, c in T.full(idx).items() if J != zero_mi} for idx in comps_list],
    )
    composed = polyjet_compose(G, phi.truncate(k)) if k > 0 else None
    TC = {}
    for c, idx in enumerate(comps_list):
        if composed is None:
            val = G.target[c]
            TC[idx] = {tuple(zero_mi): val} if val != 0 else {}
        else:
            TC[idx] = composed.series(c)
    jac = [[_series_derivative(phi.series(a), j) for j in range(n)] for a in range(n)]
    jac = [[{J: c for J, c in s.items() if sum(J) <= k} for s in row] for row in jac]
    r, s = ttype.contravariant, ttype.covariant
    inv = _matrix_series_inverse(jac, n, k) if r else None
    out = {}
    for I in ttype.component_indices(n):
        upper, lower = I[:r], I[r:]
        acc: dict = {}
        for A in product(range(n), repeat=r):
            wa = {tuple(zero_mi): 1}
            for t in range(r):
                wa = series_mul(wa, inv[upper[t]][A[t]], k)
                if not wa:
                    break
            if not wa:
                continue
            for B in product(range(n), repeat=s):
                term = TC[A + B]
                if not term:
                    continue
                term = series_mul(term, wa, k)
                for t in range(s):
                    if not term:
                        break
                    term = series_mul(term, jac[B[t]][lower[t]], k)
                if term:
                    acc = series_add(acc, term)
        out[I] = acc
    return TensorJet(phi.base, ttype, n, k, out)


def pushforward_jet(Z: PolyJet, T: TensorJet) -> TensorJet:
    """Transport a tensor jet at Z.base to Z.target (pullback by the inverse jet)."""
    if tuple(Z.base) != tuple(T.base):
        raise BasePointMismatch(f"map jet is based at {Z.base}, tensor jet at {T.base}")
    return pullback_jet(polyjet_invert(Z), T)
