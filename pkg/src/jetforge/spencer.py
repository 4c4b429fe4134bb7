"""Symbols of linear jet systems and the Spencer machinery around them.

A symbol of order q lives in S^q T* (x) W.  Its coordinates are indexed by
(J, w) with |J| = q, ordered by J and then w, and a coordinate stands for the
derivative d^J of the w-th component, so the contraction d_i shifts J by e_i.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Mapping, Sequence

from .errors import DegenerateFlag
from .jetspace import JetSpec, MultiIndex, multi_indices, multi_indices_upto
from .prolongation import VectorField, prolong_field
from .sampling import SplitMix64
from .structures import LinearJetSystem
from .symcore import Expr, linalg

ZERO = Expr.const(0)


def _coords(n: int, W: int, q: int) -> list:
    if q < 0:
        return []
    return [(J, w) for J in multi_indices(n, q) for w in range(W)]


@dataclass
class SymbolSpace:
    """Exact subspace of S^q T* (x) W given by a basis of coordinate vectors."""

    n: int
    W: int
    q: int
    basis: list

    def __post_init__(self):
        width = self.ambient_dimension
        rows = [[Fraction(v) for v in b] for b in self.basis]
        for r in rows:
            if len(r) != width:
                raise ValueError("basis vector has the wrong length")
        # keep an echelon basis so equal subspaces compare equal
        self.basis = linalg.row_space(rows, width) if rows else []

    @classmethod
    def full(cls, n: int, W: int, q: int) -> "SymbolSpace":
        d = W * comb(n + q - 1, q) if q >= 0 else 0
        return cls(n, W, q, [[1 if i == j else 0 for j in range(d)] for i in range(d)])

    @classmethod
    def zero(cls, n: int, W: int, q: int) -> "SymbolSpace":
        return cls(n, W, q, [])

    @property
    def coordinates(self) -> list:
        return _coords(self.n, self.W, self.q)

    @property
    def ambient_dimension(self) -> int:
        return self.W * comb(self.n + self.q - 1, self.q) if self.q >= 0 else 0

    @property
    def dim(self) -> int:
        return len(self.basis)

    def annihilator(self) -> list:
        """Rows a with a . v = 0 for every v in the space."""
        if not self.basis:
            d = self.ambient_dimension
            return [[Fraction(1) if i == j else Fraction(0) for j in range(d)] for i in range(d)]
        return linalg.nullspace(self.basis, self.ambient_dimension)

    def contains(self, vec) -> bool:
        return all(sum(a * v for a, v in zip(row, vec)) == 0 for row in self.annihilator())

    def __eq__(self, other):
        if not isinstance(other, SymbolSpace):
            return NotImplemented
        return (self.n, self.W, self.q, self.basis) == (other.n, other.W, other.q, other.basis)

    def __hash__(self):
        return hash((self.n, self.W, self.q, self.dim))

    def __repr__(self):
        return f"SymbolSpace(n={self.n}, W={self.W}, q={self.q}, dim={self.dim})"


def symbol_of(sys: LinearJetSystem, point) -> SymbolSpace:
    """Kernel of the top-order block of the fiber matrix at ``point``."""
    n, q = sys.n, sys.order
    top = sys.top_block(point)
    width = n * comb(n + q - 1, q)
    basis = linalg.nullspace(top, width) if top else SymbolSpace.full(n, n, q).basis
    # top-block columns are ordered by J then component, as SymbolSpace coordinates
    return SymbolSpace(n, n, q, basis)


def _contraction(n: int, W: int, q: int, i: int) -> list:
    """Matrix of d_i : S^{q+1} (x) W -> S^q (x) W in coordinates."""
    src = {c: k for k, c in enumerate(_coords(n, W, q + 1))}
    rows = []
    for J, w in _coords(n, W, q):
        row = [Fraction(0)] * len(src)
        row[src[(J.plus(i), w)]] = Fraction(1)
        rows.append(row)
    return rows


def algebraic_prolong(g: SymbolSpace, times: int = 1) -> SymbolSpace:
    """g^(times): tau with every contraction d_i tau in the previous space."""
    for _ in range(times):
        n, W, q = g.n, g.W, g.q
        ann = g.annihilator()
        width = W * comb(n + q, q + 1)
        rows = []
        for i in range(n):
            C = _contraction(n, W, q, i)
            rows.extend(linalg.matmul(ann, C) if ann else [])
        basis = linalg.nullspace(rows, width) if rows else SymbolSpace.full(n, W, q + 1).basis
        g = SymbolSpace(n, W, q + 1, basis)
    return g


# -- delta complex ------------------------------------------------------------------------------


@dataclass
class DeltaMap:
    """delta : Lambda^p T* (x) S^q T* (x) W -> Lambda^{p+1} T* (x) S^{q-1} T* (x) W."""

    n: int
    W: int
    q: int
    p: int
    source: list
    target: list
    matrix: list

    @property
    def rank(self) -> int:
        return linalg.rank(self.matrix, len(self.source)) if self.matrix and self.source else 0

    @property
    def nullity(self) -> int:
        return len(self.source) - self.rank


def _wedge_coords(n: int, W: int, q: int, p: int) -> list:
    if q < 0 or p < 0 or p > n:
        return []
    return [(I, J, w) for I in combinations(range(n), p) for J in multi_indices(n, q) for w in range(W)]


def delta_map(n: int, W: int, q: int, p: int) -> DeltaMap:
    """(delta w)_{I', K} = sum_t (-1)^t w_{I' minus i_t, K + e_{i_t}}."""
    source = _wedge_coords(n, W, q, p)
    target = _wedge_coords(n, W, q - 1, p + 1)
    col = {c: k for k, c in enumerate(source)}
    matrix = []
    for I, K, w in target:
        row = [Fraction(0)] * len(source)
        for t, i in enumerate(I):
            rest = I[:t] + I[t + 1:]
            row[col[(rest, K.plus(i), w)]] += (-1) ** t
        matrix.append(row)
    return DeltaMap(n, W, q, p, source, target, matrix)


def _symbol_tower(g: SymbolSpace, m: int) -> SymbolSpace:
    """g_m: ambient below g.q, g itself at g.q, prolongations above."""
    if m < g.q:
        return SymbolSpace.full(g.n, g.W, m)
    return algebraic_prolong(g, m - g.q)


def _restricted_delta(g_src: SymbolSpace, p: int):
    """delta on Lambda^p (x) g_src, as a matrix on the tensor basis."""
    n, W, q = g_src.n, g_src.W, g_src.q
    D = delta_map(n, W, q, p)
    wedges = list(combinations(range(n), p))
    sym = g_src.coordinates
    col = {c: k for k, c in enumerate(D.source)}
    basis = []
    for I in wedges:
        for b in g_src.basis:
            v = [Fraction(0)] * len(D.source)
            for (J, w), val in zip(sym, b):
                if val:
                    v[col[(I, J, w)]] = val
            basis.append(v)
    if not D.matrix:
        return [], len(basis)
    images = linalg.matmul(D.matrix, [list(c) for c in zip(*basis)]) if basis else []
    return images, len(basis)


def delta_cohomology(g: SymbolSpace, m: int, p: int) -> int:
    """dim H^{m,p}: cohomology of Lambda^{p-1} (x) g_{m+1} -> Lambda^p (x) g_m -> Lambda^{p+1} (x) g_{m-1}."""
    g_m = _symbol_tower(g, m)
    out_img, dim_src = _restricted_delta(g_m, p)
    ker = dim_src - (linalg.rank(out_img, dim_src) if out_img and dim_src else 0)
    if p == 0:
        return ker
    g_up = _symbol_tower(g, m + 1)
    in_img, dim_up = _restricted_delta(g_up, p - 1)
    im = linalg.rank(in_img, dim_up) if in_img and dim_up else 0
    return ker - im


# -- Cartan characters -------------------------------------------------------------------------


def _restriction_dims(g: SymbolSpace, flag: list) -> list:
    """dim g_i for i = 0..n, g_i = {tau in g : iota_{v_1} tau = ... = iota_{v_i} tau = 0}."""
    n, W, q = g.n, g.W, g.q
    if q == 0:
        return [g.dim] * (n + 1)
    contractions = [_contraction(n, W, q - 1, i) for i in range(n)]
    coords_T = [list(c) for c in zip(*g.basis)] if g.basis else []
    dims = [g.dim]
    rows: list = []
    for v in flag:
        iota = [[sum(v[i] * contractions[i][r][c] for i in range(n)) for c in range(g.ambient_dimension)]
                for r in range(len(contractions[0]))]
        if coords_T:
            rows.extend(linalg.matmul(iota, coords_T))
        dims.append(g.dim - (linalg.rank(rows, g.dim) if rows and g.dim else 0))
    return dims


def random_flag(n: int, seed: int) -> list:
    rng = SplitMix64(seed)
    flag = [[rng.rational(9, 5) for _ in range(n)] for _ in range(n)]
    if linalg.det(flag) == 0:
        raise DegenerateFlag(f"flag drawn with seed {seed} is not a basis")
    return flag


def cartan_characters(g: SymbolSpace, seeds: Sequence[int] = (0, 1, 2), flag=None) -> list:
    """Characters sigma_i = dim g_{i-1} - dim g_i for a generic flag.

    With ``flag`` given it is used directly; otherwise each seed draws a
    random rational flag and the smallest dim g_i over the draws wins
    (generic flags minimize them).  Degenerate draws are skipped.
    """
    if g.q < 1:
        raise ValueError("Cartan characters are defined for symbols of order >= 1")
    if flag is not None:
        if linalg.det(flag) == 0:
            raise DegenerateFlag("flag is not a basis")
        dims = _restriction_dims(g, flag)
    else:
        dims = None
        for seed in seeds:
            try:
                d = _restriction_dims(g, random_flag(g.n, seed))
            except DegenerateFlag:
                continue
            dims = d if dims is None else [min(a, b) for a, b in zip(dims, d)]
        if dims is None:
            raise DegenerateFlag("every seeded flag was degenerate")
    return [dims[i - 1] - dims[i] for i in range(1, g.n + 1)]


def is_involutive(g: SymbolSpace, seeds: Sequence[int] = (0, 1, 2)) -> bool:
    """Cartan's test: dim g^(1) = sum_i i * sigma_i."""
    sigma = cartan_characters(g, seeds)
    return algebraic_prolong(g).dim == sum(i * s for i, s in enumerate(sigma, start=1))


# -- Spencer operator on sections ------------------------------------------------------------


def spencer_D(s: Mapping, spec: JetSpec, k: int) -> list:
    """(Ds)_{i,(mu,J)} = d_i s^mu_J - s^mu_{J+e_i} for |J| <= k.

    ``s`` maps (mu, J) with |J| <= k + 1 to Expr in the base variables.
    Rows are indexed by i, columns by (J, mu) in jet-coordinate order.
    """
    xs = spec.base_symbols
    cols = [(mu, J) for J in multi_indices_upto(spec.n, k) for mu in range(spec.m)]
    return [[s[(mu, J)].diff(xs[i]) - s[(mu, J.plus(i))] for (mu, J) in cols] for i in range(spec.n)]


def holonomic_family(components: Sequence[Expr], spec: JetSpec, k: int) -> dict:
    """s^mu_J = d^J sigma^mu, the jet family of an honest section."""
    from .jetspace import partial_derivatives

    out = {}
    for mu, c in enumerate(components):
        for J, d in partial_derivatives(c, spec.base_symbols, k).items():
            out[(mu, J)] = d
    return out


def _bindings(s: Mapping, spec: JetSpec, k: int) -> dict:
    return {spec.jet(mu, J): s[(mu, J)] for J in multi_indices_upto(spec.n, k) for mu in range(spec.m)}


def lambda_of_section(v: VectorField, s: Mapping, k: int) -> dict:
    """lambda(s)^mu_J = phi^mu_J(s) - xi~^i d_i s^mu_J with xi~ = xi(x, s_0(x))."""
    spec = v.spec.with_order(k)
    pf = prolong_field(v, k)
    bind = _bindings(s, spec, k)
    xs = spec.base_symbols
    xt = [c.subs(bind) for c in v.xi]
    out = {}
    for J in multi_indices_upto(spec.n, k):
        for mu in range(spec.m):
            acc = pf.phiJ[(mu, J)].subs(bind)
            for i in range(spec.n):
                if not xt[i].is_zero:
                    acc = acc - xt[i] * s[(mu, J)].diff(xs[i])
            out[(mu, J)] = acc
    return out


def lambda_D_commutation_check(v: VectorField, s: Mapping, k: int) -> bool:
    """D(lambda(s)) equals the linearized action applied to Ds, exactly.

    For |J| <= k - 1 the right side is
        -xi~^i d_i (Ds)_{J,j} - (d_j xi~^i) (Ds)_{J,i}
        + sum_{nu,K} dphi_J/du^nu_K (s) (Ds)^nu_{K,j}
        - sum_{i,nu} s_{J+e_i} dxi^i/du^nu (s) (Ds)^nu_{0,j},
    which follows from the prolongation recursion; the left side is
    computed from lambda(s) directly.
    """
    if k < 1:
        raise ValueError("the check needs k >= 1")
    spec = v.spec.with_order(k)
    n, m = spec.n, spec.m
    xs = spec.base_symbols
    lam = lambda_of_section(v, s, k)
    pf = prolong_field(v, k)
    bind = _bindings(s, spec, k)
    xt = [c.subs(bind) for c in v.xi]
    zero = MultiIndex.zero(n)

    def Ds(mu, K, j):
        return s[(mu, K)].diff(xs[j]) - s[(mu, K.plus(j))]

    dxi_du = [[v.xi[i].diff(spec.jet(nu, zero)).subs(bind) for nu in range(m)] for i in range(n)]
    for J in multi_indices_upto(n, k - 1):
        for mu in range(m):
            phi = pf.phiJ[(mu, J)]
            grads = {}
            for K in multi_indices_upto(n, J.order):
                for nu in range(m):
                    d = phi.diff(spec.jet(nu, K))
                    if not d.is_zero:
                        grads[(nu, K)] = d.subs(bind)
            for j in range(n):
                lhs = lam[(mu, J)].diff(xs[j]) - lam[(mu, J.plus(j))]
                rhs = ZERO
                for i in range(n):
                    if not xt[i].is_zero:
                        rhs = rhs - xt[i] * Ds(mu, J, j).diff(xs[i])
                    dxt = xt[i].diff(xs[j])
                    if not dxt.is_zero:
                        rhs = rhs - dxt * Ds(mu, J, i)
                for (nu, K), g in grads.items():
                    rhs = rhs + g * Ds(nu, K, j)
                for i in range(n):
                    for nu in range(m):
                        if not dxi_du[i][nu].is_zero:
                            rhs = rhs - s[(mu, J.plus(i))] * dxi_du[i][nu] * Ds(nu, zero, j)
                if lhs != rhs:
                    return False
    return True
