"""Differential invariants: verification, a bounded rational ansatz search,
admissible formal derivations and the finiteness span check."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Sequence

from .errors import DomainError, OrderMismatch, UnsupportedOperation
from .jetspace import JetSpec, total_derivative
from .orbits import ActionSpace, DistributionFrame, PseudoAlgebraSpec, build_distribution
from .prolongation import apply_prolonged, prolong_field
from .sampling import MAX_RETRIES, SplitMix64, radical_aware_point
from .symcore import ONE, Expr, Poly, linalg

ZERO = Expr.const(0)


@dataclass(frozen=True)
class InvariantCandidate:
    """A function on J_k, with k at least the highest jet order it uses."""

    order: int
    expr: Expr

    def check(self, spec: JetSpec):
        used = spec.expr_order(self.expr)
        if used > self.order:
            raise OrderMismatch(f"expression uses order {used} coordinates, declared order {self.order}")
        return self


@dataclass(frozen=True)
class FormalDerivation:
    """d_c = sum_i c^i D_i with coefficients on jet space."""

    coefficients: tuple
    order: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(self.coefficients))
        if all(c.is_zero for c in self.coefficients):
            raise ValueError("a formal derivation must not vanish identically")

    def apply(self, f: Expr, spec: JetSpec) -> Expr:
        acc = ZERO
        for i, c in enumerate(self.coefficients):
            if not c.is_zero:
                acc = acc + c * total_derivative(f, i, spec)
        return acc


def _generator_fields(L: PseudoAlgebraSpec, space: ActionSpace):
    if L.kind != "finite_basis":
        raise ValueError("symbolic checks need a finite basis of generators")
    return [space.lift(g) for g in L.generators]


def _spec(space: ActionSpace, k: int) -> JetSpec:
    return space.jet_spec.with_order(k)


# -- pointwise machinery --------------------------------------------------------------------------


def _gradient(f: Expr, coords) -> list:
    return [f.diff(s) for s in coords]


def _sample(frame: DistributionFrame, exprs: Sequence[Expr], samples: int, seed: int) -> list:
    """Points of J_k where the frame and every expression evaluate exactly."""
    rng = SplitMix64(seed)
    out = []
    for _ in range(samples):
        for _attempt in range(MAX_RETRIES):
            pt = radical_aware_point(rng, frame.coordinates, exprs)
            try:
                M = frame.evaluate(pt)
                vals = [e.eval_rational(pt) for e in exprs]
            except (DomainError, ZeroDivisionError):
                continue
            out.append((pt, M, vals))
            break
        else:
            from .errors import AllSamplesSingular

            raise AllSamplesSingular(f"no admissible sample point after {MAX_RETRIES} attempts")
    return out


def verify_invariant(f: InvariantCandidate, L: PseudoAlgebraSpec, space: ActionSpace, samples: int = 10, seed: int = 0) -> bool:
    """Every prolonged generator annihilates f.

    Exact and symbolic for a finite basis; for a Lie equation the check runs
    at seeded sample points, still in exact arithmetic.
    """
    spec = _spec(space, f.order)
    f.check(spec)
    if L.kind == "finite_basis":
        for g in _generator_fields(L, space):
            if not apply_prolonged(prolong_field(g, f.order), f.expr).is_zero:
                return False
        return True
    frame = build_distribution(L, space, f.order)
    grad = _gradient(f.expr, frame.coordinates)
    for _pt, M, g in _sample(frame, grad, samples, seed):
        for row in M:
            if sum(a * b for a, b in zip(row, g)) != 0:
                return False
    return True


# -- ansatz search ----------------------------------------------------------------------------------


def _lcm(a: Poly, b: Poly) -> Poly:
    g, ca, _cb = a.cofactors(b)
    return ca * b


def ansatz_monomials(coords, degree: int) -> list:
    """Monomials of total degree <= degree in ``coords`` (constant first)."""
    out = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(len(coords)), d):
            mono: dict = {}
            for i in combo:
                mono[coords[i]] = mono.get(coords[i], 0) + 1
            out.append(Poly({tuple(sorted(mono.items())): Fraction(1)}))
    return out


def search_invariants(L: PseudoAlgebraSpec, space: ActionSpace, k: int, degree: int, Q: Expr) -> list:
    """Basis (modulo constants) of invariants P/Q with deg P <= degree.

    For each generator X, X(P/Q) = 0 reads X(P) - P r = 0 with r = X(Q)/Q,
    a linear condition on the coefficients of P.  r must be rational, which
    holds for Q a rational power of a polynomial.  An empty list means the
    ansatz contains no non-constant invariant.
    """
    spec = _spec(space, k)
    coords = spec.coordinates(k)
    monos = ansatz_monomials(coords, degree)
    rows: list = []
    for g in _generator_fields(L, space):
        pf = prolong_field(g, k)
        r = apply_prolonged(pf, Q) / Q
        if not r.is_rational:
            raise UnsupportedOperation("X(Q)/Q must be a rational function; choose Q as a power of a polynomial")
        cond = []
        den = ONE
        for m in monos:
            e = apply_prolonged(pf, Expr.from_poly(m)) - Expr.from_poly(m) * r
            num, d = e.as_ratfunc()
            cond.append((num, d))
            if not num.is_zero:
                den = _lcm(den, d)
        table: dict = {}
        for c, (num, d) in enumerate(cond):
            if num.is_zero:
                continue
            # d divides den, so den = d * (den/g) / unit with unit = d/g constant
            _g, scale, unit = den.cofactors(d)
            full = num * scale.scale(1 / unit.const_value())
            for mono, coef in full.terms.items():
                slot = table.setdefault(mono, {})
                slot[c] = slot.get(c, 0) + coef
        for mono in sorted(table, key=lambda m: str(m)):
            row = [Fraction(0)] * len(monos)
            for c, v in table[mono].items():
                row[c] = Fraction(v)
            rows.append(row)
    null = linalg.nullspace(rows, len(monos)) if rows else [
        [Fraction(1) if i == j else Fraction(0) for j in range(len(monos))] for i in range(len(monos))
    ]
    # quotient by the constant solution P = Q when Q belongs to the ansatz
    qvec = None
    if Q.is_polynomial:
        qp = Q.as_poly()
        index = {tuple(m.terms)[0]: c for c, m in enumerate(monos)}
        if all(mono in index for mono in qp.terms):
            qvec = [Fraction(0)] * len(monos)
            for mono, coef in qp.terms.items():
                qvec[index[mono]] = coef
    if qvec is not None:
        j = next(i for i, v in enumerate(qvec) if v)
        null = [[b[i] - b[j] / qvec[j] * qvec[i] for i in range(len(monos))] for b in null]
    basis = linalg.row_space([b for b in null if any(b)], len(monos)) if null else []
    out = []
    for b in basis:
        P = Poly({tuple(m.terms)[0]: v for m, v in zip(monos, b) if v})
        out.append(InvariantCandidate(k, Expr.from_poly(P) / Q))
    return out


# -- formal derivations ----------------------------------------------------------------------------


def admissibility_test(c: FormalDerivation, L: PseudoAlgebraSpec, space: ActionSpace) -> bool:
    """p xi(c^j) = sum_i c^i D_i xi^j for every generator xi and every j."""
    n = space.n
    if len(c.coefficients) != n:
        raise ValueError(f"expected {n} coefficients")
    order = max([1] + [space.jet_spec.expr_order(e) for e in c.coefficients])
    spec = _spec(space, order)
    for g in _generator_fields(L, space):
        pf = prolong_field(g, order)
        for j in range(n):
            lhs = apply_prolonged(pf, c.coefficients[j])
            rhs = ZERO
            for i in range(n):
                if not c.coefficients[i].is_zero:
                    rhs = rhs + c.coefficients[i] * total_derivative(g.xi[j], i, spec)
            if lhs != rhs:
                return False
    return True


def formal_derive(c: FormalDerivation, f: InvariantCandidate, space: ActionSpace) -> InvariantCandidate:
    spec = _spec(space, f.order + 1)
    order = max(f.order + 1, max(spec.expr_order(e) for e in c.coefficients))
    return InvariantCandidate(order, c.apply(f.expr, spec))


def derivation_bracket(c: FormalDerivation, d: FormalDerivation, space: ActionSpace) -> FormalDerivation:
    """Coefficients of [d_c, d_d] = sum_i (d_c d^i - d_d c^i) D_i."""
    order = max(space.jet_spec.expr_order(e) for e in c.coefficients + d.coefficients) + 1
    spec = _spec(space, order)
    coeffs = [c.apply(b, spec) - d.apply(a, spec) for a, b in zip(c.coefficients, d.coefficients)]
    if all(e.is_zero for e in coeffs):
        return None
    return FormalDerivation(tuple(coeffs), order)


# -- finiteness -----------------------------------------------------------------------------------


@dataclass
class FinitenessReport:
    order: int
    function_count: int
    entries: list = field(default_factory=list)

    @property
    def generic_rank(self) -> int:
        return max((e["rank_differentials"] for e in self.entries), default=0)

    @property
    def generic_codim(self) -> int:
        return min((e["codim"] for e in self.entries), default=0)

    @property
    def singular_samples(self) -> int:
        """Samples where the differentials drop below their generic rank."""
        return sum(1 for e in self.entries if e["rank_differentials"] < self.generic_rank)

    @property
    def passed(self) -> bool:
        """Annihilation everywhere, and generic rank equal to generic codimension."""
        return bool(self.entries) and all(e["annihilates"] for e in self.entries) and self.generic_rank == self.generic_codim

    def as_dict(self) -> dict:
        return {
            "order": self.order,
            "functions": self.function_count,
            "passed": self.passed,
            "generic_rank": self.generic_rank,
            "generic_codim": self.generic_codim,
            "singular_samples": self.singular_samples,
            "samples": self.entries,
        }


def finiteness_span_check(
    invs: Sequence[InvariantCandidate],
    ders: Sequence[FormalDerivation],
    L: PseudoAlgebraSpec,
    space: ActionSpace,
    k: int,
    samples: int = 10,
    seed: int = 0,
) -> FinitenessReport:
    """At sample points of J_{k+1}, do d(rho^* f) and d(d_c f) cut out Delta_{k+1}?

    A sample is regular when the differentials annihilate Delta_{k+1} and
    their rank equals its codimension, i.e. their joint kernel is
    Delta_{k+1}.  The check passes when annihilation holds at every sample
    and the generic (maximal) rank equals the generic codimension; samples
    on the proper subvariety where the differentials degenerate (u2 = 0 for
    the curvature) are counted, not failed.
    """
    spec = _spec(space, k + 1)
    funcs = []
    for f in invs:
        f.check(space.jet_spec.with_order(k))
        funcs.append(f.expr)
        for c in ders:
            funcs.append(c.apply(f.expr, spec))
    frame = build_distribution(L, space, k + 1)
    coords = frame.coordinates
    grads = [g for f in funcs for g in _gradient(f, coords)]
    report = FinitenessReport(k + 1, len(funcs))
    width = len(coords)
    for _pt, M, vals in _sample(frame, grads, samples, seed):
        dF = [vals[i * width:(i + 1) * width] for i in range(len(funcs))]
        rank_delta = linalg.rank(M, width) if M else 0
        codim = width - rank_delta
        rank_dF = linalg.rank(dF, width) if dF else 0
        annihilates = all(sum(a * b for a, b in zip(row, g)) == 0 for row in M for g in dF)
        report.entries.append(
            {"rank_differentials": rank_dF, "codim": codim, "annihilates": annihilates, "regular": annihilates and rank_dF == codim}
        )
    return report
