"""Command-line front end: ``jetforge <command> [problem.json] [flags]``.

Reports are JSON (sorted keys, no timings) or a plain-text rendering of the
same document.  Exit codes: 0 success, 2 parse or validation error,
3 mathematical-domain error, 4 failed property check under ``--strict``.

Jet coordinates are written u1, u2, ... when there is one independent
variable and u[1,2] (exponent list) otherwise; the Taylor variable x
itself is order zero.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .errors import DomainError, JetforgeError, ProblemValidationError
from .jetspace import JetSpec, PolyJet
from .problem import ProblemSpec, load_problem
from .sampling import PRNG_NAME, SplitMix64, sample_points
from .symcore import Expr, parse

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN, EXIT_STRICT = 0, 2, 3, 4


class InputError(JetforgeError, ValueError):
    """A flag or problem that does not fit the requested command."""


# -- report plumbing ------------------------------------------------------------------------------


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.6e}")
    if isinstance(obj, Fraction):
        return str(obj)
    return str(obj)


def render_json(report: dict) -> str:
    return json.dumps(jsonable(report), indent=2, sort_keys=True) + "\n"


def render_text(report: dict) -> str:
    lines = []

    def walk(obj, indent):
        pad = "  " * indent
        if isinstance(obj, dict):
            for k in sorted(obj):
                v = obj[k]
                if isinstance(v, (dict, list)) and v:
                    lines.append(f"{pad}{k}:")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}{k}: {_scalar(v)}")
        elif isinstance(obj, list):
            if all(not isinstance(v, (dict, list)) for v in obj):
                lines.append(f"{pad}{', '.join(_scalar(v) for v in obj)}")
            else:
                for v in obj:
                    lines.append(f"{pad}-")
                    walk(v, indent + 1)
        else:
            lines.append(f"{pad}{_scalar(obj)}")

    walk(jsonable(report), 0)
    return "\n".join(lines) + "\n"


def _scalar(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if v == [] or v == {}:
        return "(none)"
    return str(v)


# -- argument helpers -------------------------------------------------------------------------------


def _fractions(text: str | None, n: int, what: str) -> tuple:
    if text is None:
        return tuple(Fraction(0) for _ in range(n))
    try:
        vals = tuple(Fraction(t.strip()) for t in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise InputError(f"{what}: expected comma-separated rationals, got {text!r}") from None
    if len(vals) != n:
        raise InputError(f"{what}: expected {n} values, got {len(vals)}")
    return vals


def _expr(text: str, vocab, what: str) -> Expr:
    try:
        return parse(text, vocab)
    except JetforgeError as exc:
        raise ProblemValidationError(str(exc), what) from exc


def _generators(problem: ProblemSpec, which: int | None):
    L = problem.pseudo_algebra
    if L.kind != "finite_basis":
        raise InputError("this command needs a finite basis of generators")
    names = [g.get("name", f"X{i + 1}") for i, g in enumerate(problem.raw["pseudo_algebra"]["generators"])]
    pairs = list(zip(names, L.generators))
    if which is not None:
        if not 1 <= which <= len(pairs):
            raise InputError(f"--generator must lie in 1..{len(pairs)}")
        pairs = [pairs[which - 1]]
    return [(name, problem.space.lift(g)) for name, g in pairs]


def _structure(problem: ProblemSpec):
    S = problem.pseudo_algebra.structure if problem.pseudo_algebra.kind == "lie_equation" else problem.structure
    if S is None:
        raise InputError("this command needs a structure (structure block or lie_equation pseudo-algebra)")
    return S


def _base_points(S, count: int, seed: int, accept):
    return sample_points(SplitMix64(seed), S.base_symbols, count, accept)


# -- commands --------------------------------------------------------------------------------------


def cmd_prolong(problem, args):
    from .prolongation import prolong_field

    k = args.order
    out = []
    for name, v in _generators(problem, args.generator):
        pf = prolong_field(v, k)
        out.append({"name": name, "coefficients": {s.name: str(c) for s, c in pf.coefficients()}})
    return {"order": k, "generators": out}, {}


def cmd_flowcheck(problem, args):
    from .prolongation import flow_check

    if problem.mode != "sections":
        raise InputError("flowcheck acts on sections; use a sections-mode problem")
    spec = problem.jet_spec
    vocab = JetSpec(spec.independents, ())
    sections = args.section or ["0"] * spec.m
    if len(sections) != spec.m:
        raise InputError(f"--section is needed once per dependent variable ({spec.m})")
    sigma = [_expr(t, vocab, f"--section {i + 1}") for i, t in enumerate(sections)]
    point = _fractions(args.point, spec.n, "--point")
    out, checks = [], {}
    for name, v in _generators(problem, args.generator):
        rep = flow_check(v, sigma, point, args.order, t_step=args.t_step, tol=args.tol)
        out.append({"name": name, **rep.as_dict()})
        checks[f"flow:{name}"] = rep.passed
    return {"order": args.order, "section": [str(s) for s in sigma], "point": point, "generators": out}, checks


def cmd_lie_eq(problem, args):
    from .structures import isotropy_fiber, lie_equation

    S = _structure(problem)
    q = args.order
    if q < 1:
        raise InputError("--order must be at least 1")
    system = lie_equation(S, q)
    pts = _base_points(S, args.samples, args.seed, lambda p: system.fiber_matrix(p) is not None)
    profile = system.rank_profile(pts)
    dims = [system.unknown_count - r for r in profile.ranks]
    at = _fractions(args.point, S.n, "--point") if args.point else tuple(pts[0][s] for s in S.base_symbols)
    iso = isotropy_fiber(system, at)
    result = {
        "order": q,
        "unknowns": system.unknown_count,
        "equations": len(system.equations),
        "solution_dimension": system.unknown_count - profile.generic_rank,
        "solution_dimensions": dims,
        "regular": profile.constant,
        "isotropy": {"point": at, "dimension": len(iso)},
    }
    if args.show_equations:
        result["system"] = system.format_equations()
    return result, {"regular": profile.constant}


def cmd_symbol(problem, args):
    from .spencer import algebraic_prolong, symbol_of
    from .structures import lie_equation

    S = _structure(problem)
    q = args.order
    if q < 1:
        raise InputError("--order must be at least 1")
    R = lie_equation(S, q)
    pt = _fractions(args.point, S.n, "--point") if args.point else tuple(
        _base_points(S, 1, args.seed, lambda p: R.fiber_matrix(p) is not None)[0][s] for s in S.base_symbols
    )
    g = symbol_of(R, pt)
    rows, checks = [], {}
    finite = None
    for h in range(0, args.prolong + 1):
        alg = algebraic_prolong(g, h)
        direct = symbol_of(lie_equation(S, q + h), pt)
        rows.append({"h": h, "order": q + h, "dimension": alg.dim, "ambient": alg.ambient_dimension, "matches_lie_equation": alg == direct})
        checks[f"prolongation:{h}"] = alg == direct
        if finite is None and alg.dim == 0:
            finite = q + h
    return {"order": q, "point": pt, "dimension": g.dim, "prolongations": rows, "finite_type_order": finite}, checks


def cmd_characters(problem, args):
    from .spencer import algebraic_prolong, cartan_characters, delta_cohomology, is_involutive, symbol_of
    from .structures import lie_equation

    S = _structure(problem)
    q = args.order
    if q < 1:
        raise InputError("--order must be at least 1")
    R = lie_equation(S, q)
    pt = _fractions(args.point, S.n, "--point") if args.point else tuple(
        _base_points(S, 1, args.seed, lambda p: R.fiber_matrix(p) is not None)[0][s] for s in S.base_symbols
    )
    g = symbol_of(R, pt)
    seeds = (args.seed, args.seed + 1, args.seed + 2)
    sigma = cartan_characters(g, seeds)
    inv = is_involutive(g, seeds)
    coh = {f"{m},{p}": delta_cohomology(g, m, p) for m in (q, q + 1) for p in range(0, S.n + 1)}
    result = {
        "order": q,
        "point": pt,
        "dimension": g.dim,
        "characters": sigma,
        "weighted_sum": sum((i + 1) * s for i, s in enumerate(sigma)),
        "prolongation_dimension": algebraic_prolong(g).dim,
        "involutive": inv,
        "delta_cohomology": coh,
    }
    return result, {"involutive": inv}


def cmd_orbits(problem, args):
    from .orbits import build_distribution, kernel_filtration, rank_table, transitivity_check

    problem.require_closure()
    K = args.max_order
    frame = build_distribution(problem.pseudo_algebra, problem.space, K)
    table = rank_table(frame, K, args.samples, args.seed)
    result = {"max_order": K, "codimensions": table.codimensions, "ranks": table.as_dict()}
    checks = {"constant_rank": all(e["constant"] for e in table.orders)}
    if K >= 2:
        filt = kernel_filtration(frame, K, min(args.samples, 5), args.seed)
        result["filtration"] = filt.as_dict()
    trans = transitivity_check(problem.pseudo_algebra, samples=min(args.samples, 5), seed=args.seed, space=problem.space)
    result["transitivity"] = trans.as_dict()
    return result, checks


def _invariant_inputs(problem, args):
    inv = problem.invariants
    spec = problem.jet_spec.with_order(12)
    if args.expr:
        exprs = [_expr(t, spec, f"--expr {i + 1}") for i, t in enumerate(args.expr)]
    else:
        exprs = list(inv.get("expressions", []))
    return spec, exprs


def cmd_invariants(problem, args):
    from .invariants import (
        FormalDerivation,
        InvariantCandidate,
        admissibility_test,
        finiteness_span_check,
        formal_derive,
        search_invariants,
        verify_invariant,
    )

    spec, exprs = _invariant_inputs(problem, args)
    L, space = problem.pseudo_algebra, problem.space
    action = args.action
    if action in ("derive", "finiteness"):
        if args.derivation:
            ders = [[_expr(t, spec, f"--derivation {i + 1}") for t in d.split(";")] for i, d in enumerate(args.derivation)]
        else:
            ders = problem.invariants.get("derivations", [])
        try:
            derivations = [FormalDerivation(tuple(d)) for d in ders]
        except ValueError as exc:
            raise InputError(str(exc)) from None
        for d in derivations:
            if len(d.coefficients) != space.n:
                raise InputError(f"a derivation needs {space.n} coefficients")

    def candidate(e):
        order = args.order if args.order is not None else spec.expr_order(e)
        return InvariantCandidate(order, e).check(spec)

    if action == "verify":
        if not exprs:
            raise InputError("give --expr or an invariants block in the problem")
        rows = [{"expr": str(e), "order": candidate(e).order, "invariant": verify_invariant(candidate(e), L, space, args.samples, args.seed)} for e in exprs]
        return {"results": rows}, {f"invariant:{i + 1}": r["invariant"] for i, r in enumerate(rows)}

    if action == "search":
        from .orbits import build_distribution, rank_table

        k = args.order if args.order is not None else problem.invariants.get("order", problem.max_order)
        degree = args.degree if args.degree is not None else problem.invariants.get("degree", 4)
        if args.denominator:
            Q = _expr(args.denominator, spec, "--denominator")
        else:
            Q = problem.invariants.get("denominator", Expr.const(1))
        basis = search_invariants(L, space, k, degree, Q)
        frame = build_distribution(L, space, k)
        codim = rank_table(frame, k, args.samples, args.seed, min_order=k).codimensions[-1]
        verified = [verify_invariant(b, L, space, args.samples, args.seed) for b in basis]
        result = {
            "order": k,
            "degree": degree,
            "denominator": str(Q),
            "basis": [str(b.expr) for b in basis],
            "count": len(basis),
            "codim": codim,
        }
        return result, {"verified": all(verified), "count_within_codim": len(basis) <= codim}

    if action == "derive":
        if not exprs:
            raise InputError("give --expr or an invariants block in the problem")
        rows, checks = [], {}
        for j, d in enumerate(derivations):
            adm = admissibility_test(d, L, space)
            row = {"derivation": [str(c) for c in d.coefficients], "admissible": adm, "derived": []}
            checks[f"admissible:{j + 1}"] = adm
            for e in exprs:
                f = candidate(e)
                g = formal_derive(d, f, space)
                ok = verify_invariant(g, L, space, args.samples, args.seed)
                row["derived"].append({"expr": str(g.expr), "order": g.order, "invariant": ok})
                if adm:
                    checks[f"derived_invariant:{j + 1}"] = checks.get(f"derived_invariant:{j + 1}", True) and ok
            rows.append(row)
        return {"derivations": rows}, checks

    # finiteness
    k = args.order if args.order is not None else problem.invariants.get("order", 2)
    invs = [InvariantCandidate(k, e).check(spec.with_order(k)) for e in exprs]
    rep = finiteness_span_check(invs, derivations, L, space, k, args.samples, args.seed)
    return {"from_order": k, **rep.as_dict()}, {"finiteness": rep.passed}


def cmd_act(problem, args):
    from .prolongation import groupoid_act
    from .structures import automorphism_test

    S = _structure(problem)
    if problem.mode != "structure":
        raise InputError("act transports structure jets; use a structure-mode problem")
    k = args.order
    vocab = JetSpec(S.coords, ())
    if not args.map:
        raise InputError("--map is required (comma-separated components)")
    comps = [_expr(t, vocab, f"--map {i + 1}") for i, t in enumerate(args.map.split(","))]
    if len(comps) != S.n:
        raise InputError(f"--map needs {S.n} components")
    point = _fractions(args.point, S.n, "--point")
    Z = PolyJet.from_exprs(comps, S.base_symbols, point, k + 1)
    source = S.jet(point, k)
    moved = groupoid_act(Z, source)
    target = S.jet(Z.target, k)

    def coords(T):
        return {f"{S.name}{''.join(str(i + 1) for i in idx)}[{','.join(map(str, J))}]": str(Fraction(v)) for (idx, J), v in T.coordinates().items()}

    auto = automorphism_test(Z, S, k)
    result = {"order": k, "source": point, "target": Z.target, "transported": coords(moved), "structure_at_target": coords(target), "automorphism": auto}
    return result, {"automorphism": auto}


def cmd_autotest(problem, args):
    from .acceptance import run_all

    only = [int(t) for t in args.criteria.split(",")] if args.criteria else None
    results = run_all(args.seed, only)
    return {"criteria": [r.as_dict() for r in results]}, {f"criterion_{r.number}": r.passed for r in results}


COMMANDS = {
    "prolong": cmd_prolong,
    "flowcheck": cmd_flowcheck,
    "lie-eq": cmd_lie_eq,
    "symbol": cmd_symbol,
    "characters": cmd_characters,
    "orbits": cmd_orbits,
    "invariants": cmd_invariants,
    "act": cmd_act,
    "autotest": cmd_autotest,
}


# -- parser ----------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--samples", type=int, default=None, help="sample points for pointwise checks (default: problem file, else 10)")
    common.add_argument("--seed", type=int, default=None, help="seed for the splitmix64 generator (default: problem file, else 0)")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--strict", action="store_true", help="exit 4 when a property check fails")

    p = argparse.ArgumentParser(
        prog="jetforge",
        description="Exact jet-bundle calculus on problem files.",
        epilog="Jet coordinates: u1, u2, ... for one independent variable; u[1,2] otherwise.",
    )
    p.add_argument("--version", action="version", version=f"jetforge {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_text, problem=True):
        sp = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        if problem:
            sp.add_argument("problem", help="problem file (JSON)")
        return sp

    sp = add("prolong", "prolonged coefficients of each generator")
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--generator", type=int, help="1-based generator index")

    sp = add("flowcheck", "compare prolonged fields with numerically transported jets")
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--section", action="append", help="section component u = sigma(x); repeat per dependent")
    sp.add_argument("--point", help="base point, comma-separated rationals")
    sp.add_argument("--generator", type=int)
    sp.add_argument("--tol", type=float, default=1e-5)
    sp.add_argument("--t-step", type=float, default=1e-2)

    sp = add("lie-eq", "linear Lie equation of the structure and its solution dimensions")
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--point", help="base point for the isotropy count")
    sp.add_argument("--show-equations", action="store_true")

    sp = add("symbol", "symbol of the Lie equation and its algebraic prolongations")
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--prolong", type=int, default=2, help="number of prolongations to compare")
    sp.add_argument("--point")

    sp = add("characters", "Cartan characters and involutivity of the symbol")
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--point")

    sp = add("orbits", "rank table of the orbit distribution")
    sp.add_argument("--max-order", type=int, default=None)

    sp = add("invariants", "differential invariants", problem=False)
    sp.add_argument("action", choices=ACTIONS)
    sp.add_argument("problem", help="problem file (JSON)")
    sp.add_argument("--expr", action="append", help="candidate invariant (repeatable)")
    sp.add_argument("--derivation", action="append", help="formal derivation coefficients separated by ';' (repeatable)")
    sp.add_argument("--denominator")
    sp.add_argument("--degree", type=int)
    sp.add_argument("--order", type=int)

    sp = add("act", "transport a structure jet along the jet of a map")
    sp.add_argument("--map", help="map components, comma-separated; write --map=... when the first starts with '-'")
    sp.add_argument("--point", help="source point")
    sp.add_argument("--order", type=int, default=1)

    sp = add("autotest", "run the acceptance criteria", problem=False)
    sp.add_argument("--criteria", help="comma-separated subset, e.g. 1,4,8")
    return p


ACTIONS = ("verify", "search", "derive", "finiteness")


def _reorder(argv):
    """Accept ``invariants PROBLEM verify`` as well as ``invariants verify PROBLEM``."""
    if len(argv) >= 3 and argv[0] == "invariants" and argv[2] in ACTIONS and argv[1] not in ACTIONS:
        argv = [argv[0], argv[2], argv[1]] + argv[3:]
    return argv


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = _reorder(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        problem = None
        if args.command != "autotest":
            problem = load_problem(args.problem)
            for w in problem.warnings:
                print(f"warning: {w}", file=stderr)
        if args.seed is None:
            args.seed = problem.seed if problem else 0
        if args.samples is None:
            args.samples = problem.samples if problem else 10
        if args.samples < 1:
            raise InputError("--samples must be positive")
        if getattr(args, "order", None) is not None and args.order < 0:
            raise InputError("--order must be non-negative")
        if args.command == "orbits" and args.max_order is None:
            args.max_order = problem.max_order
        result, checks = COMMANDS[args.command](problem, args)
    except (ProblemValidationError, InputError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except (DomainError, ZeroDivisionError) as exc:
        print(f"domain error: {exc}", file=stderr)
        return EXIT_DOMAIN
    except JetforgeError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_DOMAIN if not isinstance(exc, ValueError) or type(exc).__name__ in _DOMAIN_LIKE else EXIT_INPUT

    flags = {k: v for k, v in vars(args).items() if k not in ("command", "problem", "format", "action") and v is not None}
    report = {
        "jetforge": __version__,
        "command": args.command if args.command != "invariants" else f"invariants {args.action}",
        "problem": problem.name if problem else None,
        "flags": flags,
        "prng": PRNG_NAME,
        "warnings": problem.warnings if problem else [],
        "result": result,
        "checks": checks,
        "passed": all(checks.values()),
    }
    stdout.write(render_json(report) if args.format == "json" else render_text(report))
    if args.strict and not report["passed"]:
        return EXIT_STRICT
    return EXIT_OK


# errors that signal a mathematical obstruction rather than bad input
_DOMAIN_LIKE = {"BracketClosureViolation", "PrerequisiteNotAutomorphism", "NegativeBaseFractionalPower", "UnsupportedOperation"}


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
