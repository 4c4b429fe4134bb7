"""Prolongation of point vector fields to jet space, brackets of prolonged
fields, the finite action of map jets on tensor jets, and a numeric flow
harness comparing the two."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import NumericOverflow, OrderMismatch
from .jetspace import (
    JetSpec,
    MultiIndex,
    PolyJet,
    jet_of_section,
    multi_indices,
    multi_indices_upto,
    polyjet_compose,
    polyjet_invert,
    series_eval_poly_expr,
    total_derivative,
)
from .symcore import Expr, Symbol, parse
from .tensors import TensorJet, pushforward_jet


class VectorField:
    """xi^i d/dx_i + phi^mu d/du^mu with coefficients on order-0 variables only."""

    __slots__ = ("spec", "xi", "phi")

    def __init__(self, spec: JetSpec, xi: Sequence[Expr], phi: Sequence[Expr] = ()):
        spec = spec.with_order(0)
        xi = tuple(Expr.const(0) if c is None else c for c in xi)
        phi = tuple(Expr.const(0) if c is None else c for c in phi)
        if len(xi) != spec.n or len(phi) != spec.m:
            raise ValueError(f"expected {spec.n} base and {spec.m} fiber coefficients")
        allowed = set(spec.coordinates(0))
        for c in xi + phi:
            bad = [s.name for s in c.free_symbols if s not in allowed]
            if bad:
                raise ValueError(f"vector field coefficients may only use order-0 variables, found {sorted(bad)}")
        self.spec = spec
        self.xi = xi
        self.phi = phi

    @classmethod
    def parse(cls, spec: JetSpec, xi: Sequence[str], phi: Sequence[str] = ()) -> "VectorField":
        spec0 = spec.with_order(0)
        return cls(spec0, [parse(t, spec0) for t in xi], [parse(t, spec0) for t in phi])

    @property
    def components(self) -> tuple:
        return self.xi + self.phi

    @property
    def variables(self) -> tuple:
        return tuple(self.spec.coordinates(0))

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.spec, [a + b for a, b in zip(self.xi, other.xi)], [a + b for a, b in zip(self.phi, other.phi)])

    def scale(self, c) -> "VectorField":
        c = Expr.const(c) if not isinstance(c, Expr) else c
        return VectorField(self.spec, [c * a for a in self.xi], [c * a for a in self.phi])

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.spec == other.spec and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.components)

    def __repr__(self):
        return f"VectorField(xi={[str(c) for c in self.xi]}, phi={[str(c) for c in self.phi]})"


def bracket(v: VectorField, w: VectorField) -> VectorField:
    """[v, w]^a = v^b d_b w^a - w^b d_b v^a over all order-0 variables."""
    if v.spec != w.spec:
        raise ValueError("vector fields live on different spaces")
    coords = v.variables
    out = []
    for a in range(len(coords)):
        acc = Expr.const(0)
        for b, z in enumerate(coords):
            if not v.components[b].is_zero:
                acc = acc + v.components[b] * w.components[a].diff(z)
            if not w.components[b].is_zero:
                acc = acc - w.components[b] * v.components[a].diff(z)
        out.append(acc)
    n = v.spec.n
    return VectorField(v.spec, out[:n], out[n:])


@dataclass
class ProlongedField:
    """p_k xi: the base coefficients plus phi^mu_J for every |J| <= k."""

    field: VectorField
    order: int
    phiJ: dict

    @property
    def spec(self) -> JetSpec:
        return self.field.spec.with_order(self.order)

    def coefficient(self, s: Symbol) -> Expr:
        """Coefficient of d/ds for a coordinate s of J_k."""
        spec = self.spec
        if s.kind == 0:
            return self.field.xi[spec.independents.index(s.base)]
        mu, J = spec.decompose(s)
        if J.order > self.order:
            raise OrderMismatch(f"{s.name} has order {J.order} > {self.order}")
        return self.phiJ[(mu, J)]

    def coefficients(self) -> list:
        """(coordinate, coefficient) pairs in coordinate order."""
        return [(s, self.coefficient(s)) for s in self.spec.coordinates(self.order)]

    def truncate(self, h: int) -> "ProlongedField":
        h = min(h, self.order)
        return ProlongedField(self.field, h, {key: e for key, e in self.phiJ.items() if key[1].order <= h})

    def __eq__(self, other):
        if not isinstance(other, ProlongedField):
            return NotImplemented
        return self.field == other.field and self.order == other.order and self.phiJ == other.phiJ

    def __hash__(self):
        return hash((self.field, self.order))


def prolong_field(v: VectorField, k: int) -> ProlongedField:
    """Lie's recursion phi_{J+e_i} = D_i phi_J - sum_j (D_i xi^j) u_{J+e_j}."""
    if k < 0:
        raise ValueError("prolongation order must be non-negative")
    spec = v.spec.with_order(k)
    n = spec.n
    phiJ = {(mu, MultiIndex.zero(n)): v.phi[mu] for mu in range(spec.m)}
    dxi = {}
    for r in range(1, k + 1):
        for J in multi_indices(n, r):
            i = J.first_nonzero()
            prev = J.minus(i)
            if i not in dxi:
                dxi[i] = [total_derivative(c, i, spec) for c in v.xi]
            for mu in range(spec.m):
                e = total_derivative(phiJ[(mu, prev)], i, spec)
                for j in range(n):
                    if not dxi[i][j].is_zero:
                        e = e - dxi[i][j] * Expr.symbol(spec.jet(mu, prev.plus(j)))
                phiJ[(mu, J)] = e
    return ProlongedField(v, k, phiJ)


def apply_prolonged(pf: ProlongedField, f: Expr) -> Expr:
    """Directional derivative of f along p_k xi."""
    spec = pf.spec
    order = spec.expr_order(f)
    if order > pf.order:
        raise OrderMismatch(f"expression has order {order}, prolonged field only {pf.order}")
    acc = Expr.const(0)
    for s in sorted(f.free_symbols):
        if s.kind == 0 and s.base not in spec.independents:
            continue
        if s.kind != 0 and spec.decompose(s) is None:
            continue
        c = pf.coefficient(s)
        if not c.is_zero:
            acc = acc + c * f.diff(s)
    return acc


def jet_bracket(a: ProlongedField, b: ProlongedField) -> ProlongedField:
    """Bracket of two prolonged fields, computed on J_k as A(B_z) - B(A_z).

    The inputs have order k + 1; the result has order k.
    """
    if a.spec != b.spec:
        raise OrderMismatch("prolonged fields must share the jet space and order")
    if a.order < 1:
        raise OrderMismatch("bracketing absorbs one order; inputs need order >= 1")
    k = a.order - 1
    spec = a.spec.with_order(k)

    def comp(s):
        return apply_prolonged(a, b.coefficient(s)) - apply_prolonged(b, a.coefficient(s))

    xi = [comp(s) for s in spec.base_symbols]
    phiJ = {}
    for J in multi_indices_upto(spec.n, k):
        for mu in range(spec.m):
            phiJ[(mu, J)] = comp(spec.jet(mu, J))
    base = VectorField(spec, xi, [phiJ[(mu, MultiIndex.zero(spec.n))] for mu in range(spec.m)])
    return ProlongedField(base, k, phiJ)


def groupoid_act(Z: PolyJet, jS: TensorJet, ell: int = 1) -> TensorJet:
    """Transport a k-jet of a tensor field at Z.base to Z.target along Z.

    Z must have order ell + k; only tensor bundles (ell = 1) are supported.
    """
    if ell != 1:
        raise NotImplementedError("only first-order natural bundles (tensors) are supported")
    if Z.order != ell + jS.order:
        raise OrderMismatch(f"map jet of order {Z.order} cannot act on {jS.order}-jets (needs {ell + jS.order})")
    return pushforward_jet(Z, jS)


# -- numeric flow harness ------------------------------------------------------------------------


@dataclass
class FlowReport:
    passed: bool
    max_deviation: float
    tol: float
    t_step: float
    entries: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_deviation": self.max_deviation,
            "tol": self.tol,
            "t_step": self.t_step,
            "entries": self.entries,
        }


def _series_rhs(v: VectorField, state: list, n: int, k: int) -> list:
    values = dict(zip(v.variables, state))
    return [series_eval_poly_expr(c, values, n, k) for c in v.components]


def _axpy(state, delta, h):
    out = []
    for s, d in zip(state, delta):
        r = dict(s)
        for J, c in d.items():
            r[J] = r.get(J, 0.0) + h * c
        out.append(r)
    return out


def _rk4_series(v: VectorField, state: list, t: float, steps: int, n: int, k: int) -> list:
    h = t / steps
    for _ in range(steps):
        k1 = _series_rhs(v, state, n, k)
        k2 = _series_rhs(v, _axpy(state, k1, h / 2), n, k)
        k3 = _series_rhs(v, _axpy(state, k2, h / 2), n, k)
        k4 = _series_rhs(v, _axpy(state, k3, h), n, k)
        new = []
        for s, a, b, c, d in zip(state, k1, k2, k3, k4):
            r = dict(s)
            for src, w in ((a, 1), (b, 2), (c, 2), (d, 1)):
                for J, val in src.items():
                    r[J] = r.get(J, 0.0) + h * w * val / 6
            new.append(r)
        state = new
        for s in state:
            for val in s.values():
                if not math.isfinite(val):
                    raise NumericOverflow("flow integration diverged")
    return state


def _transported_jet(v: VectorField, sigma: Sequence[Expr], point: Sequence, k: int, t: float, steps: int) -> list:
    """Float coordinates of j_k(sigma_t) at the moved base point, in J_k order."""
    spec = v.spec.with_order(k)
    n, m = spec.n, spec.m
    zero = (0,) * n
    base_syms = spec.base_symbols
    shifted = {s: {zero: float(p), MultiIndex.unit(n, i): 1.0} for i, (s, p) in enumerate(zip(base_syms, point))}
    state = [dict(shifted[s]) for s in base_syms]
    for c in sigma:
        state.append({J: float(val) for J, val in series_eval_poly_expr(c, shifted, n, k).items()})
    state = _rk4_series(v, state, t, steps, n, k)
    origin = tuple(0.0 for _ in range(n))
    X = PolyJet(origin, [s.get(zero, 0.0) for s in state[:n]], k, [{J: c for J, c in s.items() if J != zero} for s in state[:n]])
    U = PolyJet(origin, [s.get(zero, 0.0) for s in state[n:]], k, [{J: c for J, c in s.items() if J != zero} for s in state[n:]])
    Xinv = polyjet_invert(X, tol=1e-300)
    Xinv = PolyJet(Xinv.base, origin, k, Xinv.coeffs)
    sig_t = polyjet_compose(U, Xinv) if k > 0 else U
    out = list(X.target)
    for J in multi_indices_upto(n, k):
        for mu in range(m):
            val = sig_t.target[mu] if J.order == 0 else sig_t.coeffs[mu].get(J, 0.0) * J.factorial()
            out.append(float(val))
    return out


def flow_check(
    v: VectorField,
    sigma: Sequence[Expr],
    point: Sequence,
    k: int,
    t_step: float = 1e-2,
    tol: float = 1e-5,
    substeps: int = 8,
    max_halvings: int = 12,
) -> FlowReport:
    """Differentiate the flow-transported k-jet of ``sigma`` at t = 0 and
    compare with p_k v at j_k sigma(point).

    The time derivative uses central differences at h and h/2 combined by
    Richardson extrapolation.  The first h is ``t_step`` divided by the
    fastest relative rate max |dz/dt| / max(1, |z|) over the jet
    coordinates; h is then halved until two successive extrapolations agree
    to tol/100.  Deviations are relative to max(1, |exact|).
    """
    spec = v.spec.with_order(k)
    pf = prolong_field(v, k)
    jet = jet_of_section(sigma, point, k, spec)
    coords = spec.coordinates(k)
    exact = [pf.coefficient(s).eval_rational(jet) for s in coords]
    values = [jet[s] for s in coords]
    rate = max(abs(float(e)) / max(1.0, abs(float(z))) for e, z in zip(exact, values))
    cache = {}

    def central(h):
        if h not in cache:
            plus = _transported_jet(v, sigma, point, k, h, substeps)
            minus = _transported_jet(v, sigma, point, k, -h, substeps)
            cache[h] = [(a - b) / (2 * h) for a, b in zip(plus, minus)]
        return cache[h]

    def richardson(h):
        return [(4 * b - a) / 3 for a, b in zip(central(h), central(h / 2))]

    h = t_step / max(1.0, rate)
    for _ in range(max_halvings):
        try:
            numeric = richardson(h)
            break
        except NumericOverflow:
            h /= 2
    else:
        raise NumericOverflow("flow integration diverged at every trial step")
    for _ in range(max_halvings):
        try:
            finer = richardson(h / 2)
        except NumericOverflow:
            break
        spread = max(abs(a - b) / max(1.0, abs(b)) for a, b in zip(numeric, finer))
        numeric = finer
        h /= 2
        if spread <= tol / 100:
            break
    entries = []
    worst = 0.0
    for s, e, num in zip(coords, exact, numeric):
        dev = abs(num - float(e)) / max(1.0, abs(float(e)))
        if not math.isfinite(dev):
            raise NumericOverflow("flow derivative is not finite")
        worst = max(worst, dev)
        entries.append({"coordinate": s.name, "exact": str(Fraction(e)), "numeric": num, "deviation": dev})
    return FlowReport(worst <= tol, worst, tol, h, entries)
