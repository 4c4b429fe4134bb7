"""Acceptance criteria as seeded, self-contained checks.

Each ``criterion_N(seed)`` returns a :class:`CriterionResult`; ``run_all``
collects them for the ``autotest`` command.  Details hold only exact data
or rounded floats so that reports are byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .invariants import (
    FormalDerivation,
    InvariantCandidate,
    admissibility_test,
    finiteness_span_check,
    formal_derive,
    search_invariants,
    verify_invariant,
)
from .jetspace import JetSpec, MultiIndex, PolyJet, multi_indices, multi_indices_upto, polyjet_compose, polyjet_invert
from .orbits import ActionSpace, PseudoAlgebraSpec, build_distribution, kernel_filtration, rank_table
from .prolongation import VectorField, bracket, flow_check, groupoid_act, jet_bracket, prolong_field
from .sampling import SplitMix64, random_polynomial
from .spencer import (
    algebraic_prolong,
    delta_map,
    holonomic_family,
    lambda_D_commutation_check,
    spencer_D,
    symbol_of,
)
from .structures import lie_equation, phi_S, prolong_system
from .symcore import Expr, linalg, parse
from .tensors import StructureField, TensorType

E = Expr.const


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.passed, "details": self.details}

    def line(self) -> str:
        return f"criterion {self.number:2d} {'PASS' if self.passed else 'FAIL'}  {self.title}"


# -- shared fixtures --------------------------------------------------------------------------------

CURVES = JetSpec(("x",), ("u",))


def curve_field(xi: str, phi: str) -> VectorField:
    return VectorField.parse(CURVES, [xi], [phi])


def se2_algebra() -> PseudoAlgebraSpec:
    return PseudoAlgebraSpec.finite_basis([curve_field("1", "0"), curve_field("0", "1"), curve_field("-u", "x")])


def se2_space() -> ActionSpace:
    return ActionSpace.sections(("x",), ("u",))


def euclidean(n: int) -> StructureField:
    coords = ("x", "y", "z")[:n]
    return StructureField(coords, TensorType(0, 2, "symmetric"), {(i, i): E(1) for i in range(n)})


def area_form() -> StructureField:
    return StructureField(("x", "y"), TensorType(0, 2, "antisymmetric"), {(0, 1): E(1)})


KAPPA2 = "u2^2/(1+u1^2)^3"
ARCLENGTH = "(1+u1^2)^(-1/2)"


def _point(rng: SplitMix64, n: int) -> tuple:
    return tuple(rng.rational(5, 3) for _ in range(n))


# -- 1 ---------------------------------------------------------------------------------------------


def criterion_1(seed: int = 0) -> CriterionResult:
    spec2 = CURVES.with_order(2)
    expected = {
        "rotation": (curve_field("-u", "x"), ["1 + u1^2", "3*u1*u2"]),
        "scaling": (curve_field("x", "u"), ["0", "-u2"]),
    }
    details = {}
    ok = True
    for name, (v, want) in expected.items():
        pf = prolong_field(v, 2)
        got = [pf.coefficient(spec2.resolve(s)) for s in ("u1", "u2")]
        match = all(g == parse(w, spec2) for g, w in zip(got, want))
        details[name] = {"phi1": str(got[0]), "phi2": str(got[1]), "match": match}
        ok &= match
    return CriterionResult(1, "prolongation recursion against classical values", ok, details)


# -- 2 ---------------------------------------------------------------------------------------------


def criterion_2(seed: int = 0, fields: int = 20, k: int = 3, tol: float = 1e-5) -> CriterionResult:
    rng = SplitMix64(seed)
    coords = CURVES.coordinates(0)
    worst = 0.0
    failures = []
    for t in range(fields):
        while True:
            xi = random_polynomial(rng, coords, 2)
            phi = random_polynomial(rng, coords, 2)
            if not (xi.is_zero and phi.is_zero):
                break
        v = VectorField(CURVES, [xi], [phi])
        sigma = random_polynomial(rng, CURVES.base_symbols, 3)
        x0 = rng.rational(3, 4)
        report = flow_check(v, [sigma], (x0,), k, tol=tol)
        worst = max(worst, report.max_deviation)
        if not report.passed:
            failures.append({"xi": str(xi), "phi": str(phi), "sigma": str(sigma), "x0": str(x0), "deviation": f"{report.max_deviation:.3e}"})
    details = {"fields": fields, "order": k, "tol": tol, "max_deviation": f"{worst:.1e}", "failures": failures}
    return CriterionResult(2, "flow consistency of prolonged fields", not failures, details)


# -- 3 ---------------------------------------------------------------------------------------------


def criterion_3(seed: int = 0, pairs: int = 20) -> CriterionResult:
    rng = SplitMix64(seed)
    failures = []
    tested = []
    for t in range(pairs):
        spec = CURVES if t % 5 else JetSpec(("x", "y"), ("u",))
        k = t % 4 if spec.n == 1 else t % 3
        coords = spec.coordinates(0)

        def rand_field():
            return VectorField(spec, [random_polynomial(rng, coords, 2) for _ in range(spec.n)], [random_polynomial(rng, coords, 2) for _ in range(spec.m)])

        v, w = rand_field(), rand_field()
        lhs = prolong_field(bracket(v, w), k)
        rhs = jet_bracket(prolong_field(v, k + 1), prolong_field(w, k + 1))
        same = lhs.field == rhs.field and lhs.phiJ == rhs.phiJ
        tested.append([spec.n, k])
        if not same:
            failures.append({"v": [str(c) for c in v.components], "w": [str(c) for c in w.components], "k": k})
    return CriterionResult(3, "prolongation is a Lie algebra morphism", not failures, {"pairs": tested, "failures": failures})


# -- 4 ---------------------------------------------------------------------------------------------


def criterion_4(seed: int = 0, points: int = 3) -> CriterionResult:
    rng = SplitMix64(seed)
    details = {}
    ok = True
    for n, want in ((2, 3), (3, 6)):
        S = euclidean(n)
        R2 = lie_equation(S, 2)
        R1 = lie_equation(S, 1)
        dims, g2, g1p = [], [], []
        for _ in range(points):
            p = _point(rng, n)
            dims.append(R2.solution_dimension(p))
            g2.append(symbol_of(R2, p).dim)
            g1p.append(algebraic_prolong(symbol_of(R1, p)).dim)
        good = all(d == want for d in dims) and not any(g2) and not any(g1p)
        details[f"euclidean{n}"] = {"solution_dims": dims, "expected": want, "symbol_g2_dims": g2, "prolonged_g1_dims": g1p}
        ok &= good
    return CriterionResult(4, "Killing dimensions and finite type", ok, details)


# -- 5 ---------------------------------------------------------------------------------------------


def criterion_5(seed: int = 0, max_k: int = 3) -> CriterionResult:
    rng = SplitMix64(seed)
    details = {}
    ok = True
    for name, S in (("euclidean2", euclidean(2)), ("volume2", area_form())):
        p = _point(rng, 2)
        g1 = symbol_of(lie_equation(S, 1), p)
        rows = []
        for k in range(max_k + 1):
            a = symbol_of(lie_equation(S, 1 + k), p)
            b = algebraic_prolong(g1, k)
            rows.append({"k": k, "dim": a.dim, "equal": a == b})
            ok &= a == b
        details[name] = rows
    return CriterionResult(5, "symbol of R_{1+k} equals the k-th algebraic prolongation", ok, details)


# -- 6 ---------------------------------------------------------------------------------------------


def criterion_6(seed: int = 0, points: int = 5, max_total: int = 4) -> CriterionResult:
    rng = SplitMix64(seed)
    details = {}
    ok = True
    for name, S in (("euclidean2", euclidean(2)), ("volume2", area_form())):
        pts = [_point(rng, 2) for _ in range(points)]
        rows = []
        for q in range(1, max_total):
            base = lie_equation(S, q)
            for h in range(1, max_total - q + 1):
                direct = lie_equation(S, q + h)
                formal = prolong_system(base, h)
                width = direct.unknown_count
                equal = formal.unknowns() == direct.unknowns() and all(
                    linalg.same_row_space(direct.fiber_matrix(p), formal.fiber_matrix(p), width) for p in pts
                )
                rows.append({"q": q, "h": h, "equal": equal})
                ok &= equal
        details[name] = rows
    return CriterionResult(6, "Lie equation of order q+h is the h-th prolongation of order q", ok, details)


# -- 7 ---------------------------------------------------------------------------------------------


def random_map_jet(rng: SplitMix64, base, target, order: int) -> PolyJet:
    """Random invertible jet with small rational Taylor coefficients."""
    n = len(base)
    while True:
        A = [[Fraction(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(n)] for _ in range(n)]
        if linalg.det(A) != 0:
            break
    coeffs = []
    for c in range(n):
        comp = {MultiIndex.unit(n, j): A[c][j] for j in range(n)}
        for r in range(2, order + 1):
            for J in multi_indices(n, r):
                comp[J] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        coeffs.append(comp)
    return PolyJet(base, target, order, coeffs)


def covariance_pairs(S: StructureField, seed: int, count: int, max_k: int):
    """Composable pairs (X, Y, k): Y goes c -> a and X goes a -> b."""
    rng = SplitMix64(seed)
    n = S.n
    out = []
    for t in range(count):
        k = t % (max_k + 1)
        a, b, c = (_point(rng, n) for _ in range(3))
        Y = random_map_jet(rng, c, a, k + 1)
        X = random_map_jet(rng, a, b, k + 1)
        out.append((X, Y, k))
    return out


def covariance_holds(S: StructureField, X: PolyJet, Y: PolyJet, k: int) -> bool:
    lhs = phi_S(polyjet_compose(X, Y), S, k)
    rhs = groupoid_act(polyjet_invert(Y), phi_S(X, S, k))
    return lhs == rhs


def criterion_7(seed: int = 0, pairs: int = 10, max_k: int = 2) -> CriterionResult:
    S = euclidean(2)
    results = []
    for X, Y, k in covariance_pairs(S, seed, pairs, max_k):
        results.append({"k": k, "equal": covariance_holds(S, X, Y, k)})
    return CriterionResult(7, "covariance of the structure map under jet composition", all(r["equal"] for r in results), {"pairs": results})


# -- 8 ---------------------------------------------------------------------------------------------


def criterion_8(seed: int = 0, samples: int = 10) -> CriterionResult:
    frame = build_distribution(se2_algebra(), se2_space(), 4)
    table = rank_table(frame, 4, samples, seed)
    filt = kernel_filtration(frame, 4, 5, seed)
    codims = table.codimensions
    stab = filt.stabilization_order
    ok = codims == [0, 0, 1, 2, 3] and stab is not None and stab <= 3
    details = {"codimensions": codims, "expected": [0, 0, 1, 2, 3], "filtration": filt.as_dict()}
    return CriterionResult(8, "orbit codimensions and kernel filtration for se(2) on curves", ok, details)


# -- 9 ---------------------------------------------------------------------------------------------


def criterion_9(seed: int = 0) -> CriterionResult:
    L, space = se2_algebra(), se2_space()
    spec = space.jet_spec.with_order(3)
    kappa = InvariantCandidate(2, parse(KAPPA2, spec))
    verified = verify_invariant(kappa, L, space)
    basis = search_invariants(L, space, 2, 6, parse("(1+u1^2)^3", spec))
    spanned = len(basis) == 1 and (basis[0].expr / kappa.expr).is_constant
    ds = FormalDerivation((parse(ARCLENGTH, spec),))
    dx = FormalDerivation((E(1),))
    adm_ds = admissibility_test(ds, L, space)
    adm_dx = admissibility_test(dx, L, space)
    ok = verified and spanned and adm_ds and not adm_dx
    details = {
        "verify_kappa2": verified,
        "search_basis": [str(b.expr) for b in basis],
        "spanned_by_kappa2": spanned,
        "arclength_admissible": adm_ds,
        "dx_admissible": adm_dx,
    }
    return CriterionResult(9, "curvature invariant: verification, search and admissibility", ok, details)


# -- 10 --------------------------------------------------------------------------------------------


def criterion_10(seed: int = 0, samples: int = 10) -> CriterionResult:
    L, space = se2_algebra(), se2_space()
    spec = space.jet_spec.with_order(4)
    kappa = InvariantCandidate(2, parse(KAPPA2, spec))
    ds = FormalDerivation((parse(ARCLENGTH, spec),))
    invs2 = [kappa]
    invs3 = [kappa, formal_derive(ds, kappa, space)]
    details = {}
    ok = True
    for k, invs in ((2, invs2), (3, invs3)):
        rep = finiteness_span_check(invs, [ds], L, space, k, samples, seed)
        details[f"{k}->{k + 1}"] = {
            "passed": rep.passed,
            "functions": rep.function_count,
            "generic_rank": rep.generic_rank,
            "generic_codim": rep.generic_codim,
            "singular_samples": rep.singular_samples,
        }
        ok &= rep.passed
    return CriterionResult(10, "finiteness: invariants and their derivatives cut out the orbits", ok, details)


# -- 11 --------------------------------------------------------------------------------------------


def koszul_checks(max_n: int = 3, max_q: int = 4, W: int = 1) -> dict:
    """delta^2 = 0, rank + nullity = dim, and exactness of the Koszul complex
    away from total degree zero."""
    squares = rank_nullity = exact = 0
    bad = []
    for n in range(1, max_n + 1):
        for q in range(0, max_q + 1):
            for p in range(0, n + 1):
                A = delta_map(n, W, q, p)
                if A.rank + A.nullity != len(A.source):
                    bad.append(["rank-nullity", n, q, p])
                rank_nullity += 1
                B = delta_map(n, W, q - 1, p + 1)
                if A.matrix and B.matrix:
                    prod = linalg.matmul(B.matrix, A.matrix)
                    if any(x != 0 for row in prod for x in row):
                        bad.append(["square", n, q, p])
                    squares += 1
                if q + p > 0 and p >= 1:
                    up = delta_map(n, W, q + 1, p - 1)
                    if A.nullity != up.rank:
                        bad.append(["exact", n, q, p])
                    exact += 1
    return {"delta_squared": squares, "rank_nullity": rank_nullity, "exactness": exact, "failures": bad}


def criterion_11(seed: int = 0, cases: int = 10) -> CriterionResult:
    rng = SplitMix64(seed)
    kos = koszul_checks()
    holo = []
    for t in range(4):
        spec = CURVES if t % 2 == 0 else JetSpec(("x", "y"), ("u",))
        k = 2
        comps = [random_polynomial(rng, spec.base_symbols, 4) for _ in range(spec.m)]
        fam = holonomic_family(comps, spec, k + 1)
        D = spencer_D(fam, spec, k)
        holo.append(all(e.is_zero for row in D for e in row))
    lam = []
    for t in range(cases):
        spec = CURVES if t < cases - 2 else JetSpec(("x", "y"), ("u",))
        coords = spec.coordinates(0)
        v = VectorField(spec, [random_polynomial(rng, coords, 2) for _ in range(spec.n)], [random_polynomial(rng, coords, 2) for _ in range(spec.m)])
        s = {(mu, J): random_polynomial(rng, spec.base_symbols, 3) for mu in range(spec.m) for J in multi_indices_upto(spec.n, 2)}
        lam.append(lambda_D_commutation_check(v, s, 2))
    ok = not kos["failures"] and all(holo) and all(lam)
    details = {"koszul": kos, "holonomic_D_vanishes": holo, "lambda_D": lam}
    return CriterionResult(11, "Spencer complex identities", ok, details)


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 12)}


def run_all(seed: int = 0, only=None) -> list:
    """Criteria 1-11; criterion 12 (byte-identical autotest output) needs two processes."""
    chosen = sorted(CRITERIA) if not only else sorted(only)
    return [CRITERIA[i](seed) for i in chosen]


__all__ = ["CRITERIA", "CriterionResult", "run_all", "koszul_checks", "covariance_pairs", "covariance_holds", "random_map_jet"]
