"""Orbit distributions of Lie pseudo-algebras on jet spaces: assembly from a
finite basis of vector fields or from a Lie equation, generic ranks and
codimensions, the kernel filtration and transitivity."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import AllSamplesSingular, BracketClosureViolation, DomainError
from .jetspace import JetSpec, MultiIndex, multi_indices, multi_indices_upto
from .prolongation import ProlongedField, VectorField, bracket, prolong_field
from .sampling import MAX_RETRIES, PRNG_NAME, SplitMix64, random_point
from .spencer import SymbolSpace, algebraic_prolong
from .structures import LinearJetSystem, lie_equation
from .symcore import Expr, Poly, Symbol, linalg, symbol
from .tensors import StructureField, TensorType

ZERO = Expr.const(0)


# -- the space acted on -------------------------------------------------------------------------


@dataclass(frozen=True)
class ActionSpace:
    """Where the pseudo-algebra acts.

    ``sections``: jets of sections of R^n x R^m, vector fields live on (x, u).
    ``structure``: jets of sections of a tensor bundle over R^n, vector fields
    live on the base and act through their natural lift.
    """

    mode: str
    independents: tuple
    dependents: tuple = ()
    ttype: TensorType | None = None
    fiber_name: str = "g"

    @classmethod
    def sections(cls, independents, dependents) -> "ActionSpace":
        return cls("sections", tuple(independents), tuple(dependents))

    @classmethod
    def structure(cls, independents, ttype: TensorType, fiber_name: str = "g") -> "ActionSpace":
        n = len(independents)
        names = tuple(ttype.component_name(fiber_name, idx) for idx in ttype.component_indices(n))
        return cls("structure", tuple(independents), names, ttype, fiber_name)

    @property
    def jet_spec(self) -> JetSpec:
        return JetSpec(self.independents, self.dependents)

    @property
    def base_spec(self) -> JetSpec:
        """Space the generators live on."""
        if self.mode == "sections":
            return self.jet_spec
        return JetSpec(self.independents, ())

    @property
    def ell(self) -> int:
        """Order of the bundle: jets of fields needed per jet of sections."""
        return 1 if self.mode == "structure" else 0

    @property
    def n(self) -> int:
        return len(self.independents)

    def ambient_dimension(self, k: int) -> int:
        return self.jet_spec.dimension(k)

    def lift(self, v: VectorField) -> VectorField:
        """Generator as a vector field on the total space of the bundle."""
        if self.mode == "sections":
            return v
        n = self.n
        spec = self.jet_spec
        xs = spec.base_symbols
        ttype = self.ttype
        r, s = ttype.contravariant, ttype.covariant
        fiber = {idx: Expr.symbol(sym) for idx, sym in zip(ttype.component_indices(n), spec.dependent_symbols)}

        def T(idx):
            sign, canon = ttype.canonical(idx)
            if sign == 0:
                return ZERO
            return fiber[canon] if sign == 1 else -fiber[canon]

        dxi = [[v.xi[i].diff(x) for x in xs] for i in range(n)]
        phi = []
        for I in ttype.component_indices(n):
            acc = ZERO
            for t in range(r):
                for k in range(n):
                    if not dxi[I[t]][k].is_zero:
                        acc = acc + T(I[:t] + (k,) + I[t + 1:]) * dxi[I[t]][k]
            for t in range(r, r + s):
                for k in range(n):
                    if not dxi[k][I[t]].is_zero:
                        acc = acc - T(I[:t] + (k,) + I[t + 1:]) * dxi[k][I[t]]
            phi.append(acc)
        return VectorField(spec, v.xi, phi)


# -- pseudo-algebras ---------------------------------------------------------------------------


@dataclass
class PseudoAlgebraSpec:
    """Either a finite basis of vector fields or the automorphisms of a structure."""

    kind: str
    generators: list = field(default_factory=list)
    structure: StructureField | None = None

    @classmethod
    def finite_basis(cls, generators: Sequence[VectorField]) -> "PseudoAlgebraSpec":
        return cls("finite_basis", list(generators))

    @classmethod
    def lie_equation(cls, S: StructureField) -> "PseudoAlgebraSpec":
        return cls("lie_equation", [], S)

    def system(self, q: int) -> LinearJetSystem:
        return lie_equation(self.structure, max(q, 1))


def structure_constants(L: PseudoAlgebraSpec, seed: int = 0) -> dict:
    """c[a, b] with [X_a, X_b] = sum_c c[a, b][c] X_c, solved at sample
    points and then confirmed symbolically."""
    gens = L.generators
    if not gens:
        return {}
    spec = gens[0].spec
    coords = spec.coordinates(0)
    rng = SplitMix64(seed)
    N = len(gens)
    out = {}
    for a in range(N):
        for b in range(a + 1, N):
            br = bracket(gens[a], gens[b])
            rows, rhs = [], []
            for _ in range(N + 2):
                for _attempt in range(MAX_RETRIES):
                    pt = random_point(rng, coords)
                    try:
                        vals = [[g.components[c].eval_rational(pt) for g in gens] for c in range(len(coords))]
                        target = [br.components[c].eval_rational(pt) for c in range(len(coords))]
                    except (DomainError, ZeroDivisionError):
                        continue
                    rows.extend(vals)
                    rhs.extend(target)
                    break
            sol = linalg.solve(rows, rhs) if rows else None
            if sol is None:
                raise BracketClosureViolation(f"[X{a + 1}, X{b + 1}] is not in the span of the generators")
            combo = VectorField(spec, [ZERO] * spec.n, [ZERO] * spec.m)
            for c, g in zip(sol, gens):
                if c:
                    combo = combo + g.scale(c)
            if combo != br:
                raise BracketClosureViolation(f"[X{a + 1}, X{b + 1}] is not a constant combination of the generators")
            out[(a, b)] = sol
    return out


def frame_bracket_closure(L: PseudoAlgebraSpec, space: ActionSpace, k: int) -> bool:
    """Prolonged generators close under the jet bracket with the same constants."""
    from .prolongation import jet_bracket

    consts = structure_constants(L)
    lifted = [space.lift(g) for g in L.generators]
    pf = [prolong_field(g, k + 1) for g in lifted]
    low = [p.truncate(k) for p in pf]
    for (a, b), cs in consts.items():
        br = jet_bracket(pf[a], pf[b])
        for key, e in br.phiJ.items():
            combo = ZERO
            for c, p in zip(cs, low):
                if c:
                    combo = combo + Expr.const(c) * p.phiJ[key]
            if combo != e:
                return False
        for i, e in enumerate(br.field.xi):
            combo = ZERO
            for c, p in zip(cs, low):
                if c:
                    combo = combo + Expr.const(c) * p.field.xi[i]
            if combo != e:
                return False
    return True


# -- distribution frames ------------------------------------------------------------------------


def _taylor_field(solution: dict, base_point: Sequence[Fraction], spec: JetSpec) -> VectorField:
    """Polynomial vector field whose jet at ``base_point`` is ``solution``."""
    xs = spec.coordinates(0)
    N = len(xs)
    comps = []
    for i in range(N):
        terms = {}
        for (c, J), val in solution.items():
            if c != i or not val:
                continue
            poly = Poly.const(Fraction(val) / J.factorial())
            for j, e in enumerate(J):
                if e:
                    poly = poly * (Poly.var(xs[j]) - Poly.const(base_point[j])) ** e
            for m, cf in poly.terms.items():
                terms[m] = terms.get(m, 0) + cf
        comps.append(Expr.from_poly(Poly({m: c for m, c in terms.items() if c})))
    return VectorField(spec, comps[: spec.n], comps[spec.n:])


@dataclass
class DistributionFrame:
    """Rows spanning Delta_k.

    For a finite basis the rows are symbolic prolonged generators; for a Lie
    equation they are produced per point from the fiber solutions there.
    """

    space: ActionSpace
    order: int
    coordinates: list
    rows: list | None = None
    pointwise: Callable | None = None

    def row_count(self, point=None) -> int:
        return len(self.rows) if self.rows is not None else len(self.evaluate(point))

    def evaluate(self, point: dict) -> list:
        """Exact rational row matrix at a point of J_k."""
        if self.rows is not None:
            cache: dict = {}
            out = []
            for row in self.rows:
                vals = []
                for e in row:
                    if e not in cache:
                        cache[e] = e.eval_rational(point)
                    vals.append(cache[e])
                out.append(vals)
            return out
        return self.pointwise(point, self.order)

    def truncate(self, h: int) -> "DistributionFrame":
        cut = len(self.space.jet_spec.coordinates(h))
        if self.rows is not None:
            return DistributionFrame(self.space, h, self.coordinates[:cut], [r[:cut] for r in self.rows])
        return DistributionFrame(self.space, h, self.coordinates[:cut], None, self.pointwise)


def build_distribution(L: PseudoAlgebraSpec, space: ActionSpace, k: int, check_closure: bool = True) -> DistributionFrame:
    """Delta_k on J_k of the action space."""
    spec = space.jet_spec.with_order(k)
    coords = spec.coordinates(k)
    if L.kind == "finite_basis":
        if check_closure:
            structure_constants(L)
        rows = []
        for g in L.generators:
            pf = prolong_field(space.lift(g), k)
            rows.append([pf.coefficient(s) for s in coords])
        return DistributionFrame(space, k, coords, rows)

    S = L.structure
    base_spec = space.base_spec
    n_base = len(base_spec.coordinates(0))

    def pointwise(point: dict, order: int) -> list:
        q = order + space.ell
        sys = L.system(q)
        base_syms = base_spec.coordinates(0)
        base_point = [point[s] for s in base_syms]
        if len(sys.coords) != n_base:
            raise ValueError("structure coordinates do not match the space the pseudo-algebra acts on")
        sols = sys.fiber_solutions(base_point)
        out = []
        cs = space.jet_spec.coordinates(order)
        for sol in sols:
            v = _taylor_field(sol, base_point, base_spec)
            pf = prolong_field(space.lift(v), order)
            out.append([pf.coefficient(s).eval_rational(point) for s in cs])
        return out

    return DistributionFrame(space, k, coords, None, pointwise)


# -- ranks ------------------------------------------------------------------------------------


@dataclass
class RankReport:
    seed: int
    samples: int
    orders: list = field(default_factory=list)
    prng: str = PRNG_NAME

    def entry(self, k: int) -> dict:
        return next(e for e in self.orders if e["order"] == k)

    @property
    def codimensions(self) -> list:
        return [e["codim"] for e in self.orders]

    def as_dict(self) -> dict:
        return {"prng": self.prng, "seed": self.seed, "samples": self.samples, "orders": self.orders}


def sample_jet_points(space: ActionSpace, frame: DistributionFrame, samples: int, seed: int) -> list:
    """Pole-free random points of J_k for ``frame``."""
    rng = SplitMix64(seed)
    coords = frame.coordinates
    out = []
    for _ in range(samples):
        for _attempt in range(MAX_RETRIES):
            pt = random_point(rng, coords)
            try:
                frame.evaluate(pt)
            except (DomainError, ZeroDivisionError):
                continue
            out.append(pt)
            break
        else:
            raise AllSamplesSingular(f"no pole-free sample point after {MAX_RETRIES} attempts")
    return out


def _rank(rows: list, width: int) -> int:
    return linalg.rank(rows, width) if rows else 0


def generic_rank(frame: DistributionFrame, samples: int = 10, seed: int = 0) -> RankReport:
    return rank_table(frame, frame.order, samples, seed, min_order=frame.order)


def rank_table(frame: DistributionFrame, max_order: int | None = None, samples: int = 10, seed: int = 0, min_order: int = 0) -> RankReport:
    """Ranks of Delta_k for k = min_order..max_order.

    Points are drawn once on J_max and projected to lower orders.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    K = frame.order if max_order is None else max_order
    if K > frame.order:
        raise ValueError("frame order is below the requested maximum order")
    top = frame.truncate(K)
    points = sample_jet_points(frame.space, top, samples, seed)
    report = RankReport(seed, samples)
    matrices = [top.evaluate(p) for p in points]
    prev = None
    for k in range(min_order, K + 1):
        width = len(frame.space.jet_spec.coordinates(k))
        if top.rows is not None:
            ranks = [_rank([r[:width] for r in M], width) for M in matrices]
        else:
            sub = top.truncate(k)
            ranks = [_rank(sub.evaluate(p), width) for p in points]
        rank = max(ranks)
        ambient = frame.space.ambient_dimension(k)
        entry = {
            "order": k,
            "ambient": ambient,
            "rank": rank,
            "codim": ambient - rank,
            "kernel_dim": rank - prev if prev is not None else rank,
            "constant": len(set(ranks)) == 1,
            "ranks": ranks,
        }
        report.orders.append(entry)
        prev = rank
    return report


# -- kernel filtration -----------------------------------------------------------------------------


def _kernel_subspace(space: ActionSpace, rows: list, k: int) -> SymbolSpace:
    """Delta_{k-1,k}: vectors of Delta_k with no component below order k (k >= 1)."""
    spec = space.jet_spec
    low = len(spec.coordinates(k - 1))
    width = len(spec.coordinates(k))
    if not rows:
        return SymbolSpace(spec.n, spec.m, k, [])
    lower = [[r[c] for r in rows] for c in range(low)]
    combos = linalg.nullspace(lower, len(rows))
    top = [[sum(c[i] * rows[i][col] for i in range(len(rows))) for col in range(low, width)] for c in combos]
    return SymbolSpace(spec.n, spec.m, k, top)


@dataclass
class FiltrationReport:
    max_order: int
    kernel_dims: dict
    equality: dict
    stabilization_order: int | None
    samples: int
    seed: int

    def as_dict(self) -> dict:
        return {
            "max_order": self.max_order,
            "kernel_dims": {str(k): v for k, v in self.kernel_dims.items()},
            "prolongation_equality": {str(k): v for k, v in self.equality.items()},
            "stabilization_order": self.stabilization_order,
            "samples": self.samples,
            "seed": self.seed,
        }


def kernel_filtration(frame: DistributionFrame, max_order: int | None = None, samples: int = 5, seed: int = 0) -> FiltrationReport:
    """Compare Delta_{k,k+1} with the algebraic prolongation of Delta_{k-1,k}.

    ``equality[k]`` records whether the two agree at every sample point of
    J_{k+1} (and its projection to J_k); the stabilization order is the
    smallest k from which equality holds up to ``max_order - 1``.
    """
    K = frame.order if max_order is None else max_order
    top = frame.truncate(K)
    points = sample_jet_points(frame.space, top, samples, seed)
    spec = frame.space.jet_spec
    kernel_dims: dict = {k: [] for k in range(1, K + 1)}
    equality: dict = {k: True for k in range(1, K)}
    for p in points:
        M = top.evaluate(p)
        spaces = {}
        for k in range(1, K + 1):
            width = len(spec.coordinates(k))
            spaces[k] = _kernel_subspace(frame.space, [r[:width] for r in M], k)
            kernel_dims[k].append(spaces[k].dim)
        for k in range(1, K):
            if algebraic_prolong(spaces[k]) != spaces[k + 1]:
                equality[k] = False
    stab = None
    for k in range(K - 1, 0, -1):
        if equality[k]:
            stab = k
        else:
            break
    return FiltrationReport(K, {k: max(v) for k, v in kernel_dims.items()}, equality, stab, samples, seed)


# -- transitivity ---------------------------------------------------------------------------------


@dataclass
class TransitivityReport:
    points: list
    spans: list

    @property
    def transitive(self) -> bool:
        return all(self.spans)

    def as_dict(self) -> dict:
        return {
            "transitive": self.transitive,
            "points": [[str(v) for v in p] for p in self.points],
            "spans": self.spans,
        }


def transitivity_check(L: PseudoAlgebraSpec, q: int = 1, samples: int = 5, seed: int = 0, points=None, space: ActionSpace | None = None) -> TransitivityReport:
    """Do the order-0 parts of the pseudo-algebra span the tangent space at each sampled point?"""
    if L.kind == "finite_basis":
        spec = L.generators[0].spec
        coords = spec.coordinates(0)
    else:
        coords = list(L.structure.base_symbols)
    dim = len(coords)
    if points is None:
        rng = SplitMix64(seed)
        points = [[rng.rational() for _ in coords] for _ in range(samples)]
    spans = []
    for p in points:
        p = [Fraction(v) for v in p]
        if L.kind == "finite_basis":
            at = dict(zip(coords, p))
            rows = [[c.eval_rational(at) for c in g.components] for g in L.generators]
        else:
            zero = MultiIndex.zero(dim)
            sols = L.system(q).fiber_solutions(p)
            rows = [[sol.get((i, zero), Fraction(0)) for i in range(dim)] for sol in sols]
        spans.append(_rank(rows, dim) == dim)
    return TransitivityReport([list(p) for p in points], spans)
