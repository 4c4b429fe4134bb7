"""Problem files: JSON schema validation, semantic checks and eager parsing."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import BracketClosureViolation, JetforgeError, ProblemValidationError
from .jetspace import JetSpec
from .orbits import ActionSpace, PseudoAlgebraSpec, structure_constants
from .prolongation import VectorField
from .symcore import Expr, linalg, parse
from .tensors import StructureField, TensorType

SCHEMA_VERSION = 1
DEFAULTS = {"samples": 10, "seed": 0, "max_order": 3}


def load_schema() -> dict:
    text = resources.files("jetforge").joinpath("schema/problem.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def fixture_path(name: str) -> Path:
    """Path of a shipped fixture, by stem (``se2_curves``) or file name."""
    stem = name[:-5] if name.endswith(".json") else name
    return Path(str(resources.files("jetforge").joinpath(f"fixtures/{stem}.json")))


def fixture_names() -> list:
    root = resources.files("jetforge").joinpath("fixtures")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


@dataclass
class ProblemSpec:
    name: str
    mode: str
    space: ActionSpace
    pseudo_algebra: PseudoAlgebraSpec
    structure: StructureField | None
    max_order: int
    seed: int
    samples: int
    invariants: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def jet_spec(self) -> JetSpec:
        return self.space.jet_spec

    def echo(self) -> dict:
        """The normalized problem document, defaults filled in."""
        return copy.deepcopy(self.raw)

    def require_closure(self):
        """Orbit commands refuse a basis that is not bracket-closed."""
        for w in self.warnings:
            if w.startswith("bracket closure"):
                raise BracketClosureViolation(w)


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def _parse_at(text: str, vocab, pointer: str) -> Expr:
    try:
        return parse(text, vocab)
    except JetforgeError as exc:
        raise ProblemValidationError(str(exc), pointer) from exc


def _structure(block: dict, coords, pointer: str) -> StructureField:
    tt = block["tensor_type"]
    ttype = TensorType(tt.get("contravariant", 0), tt["covariant"], tt.get("symmetry", "none"))
    rank = ttype.contravariant + ttype.covariant
    n = len(coords)
    vocab = JetSpec(tuple(coords), ()).with_order(0)
    comps = {}
    for key, text in block["components"].items():
        where = f"{pointer}/components/{key}"
        idx = tuple(int(ch) - 1 for ch in key)
        if len(idx) != rank or any(i >= n for i in idx):
            raise ProblemValidationError(f"index {key!r} does not address a rank-{rank} tensor on {n} coordinates", where)
        comps[idx] = _parse_at(text, vocab, where)
    # symmetry is checked on the full declared index set, before canonicalization
    for idx, e in comps.items():
        sign, canon = ttype.canonical(idx)
        if sign == 0 and not e.is_zero:
            raise ProblemValidationError("diagonal component of an antisymmetric tensor must vanish", f"{pointer}/components/{''.join(str(i + 1) for i in idx)}")
        if canon != idx and canon in comps and comps[canon] != (e if sign == 1 else -e):
            key = "".join(str(i + 1) for i in idx)
            raise ProblemValidationError(f"components violate the declared {ttype.symmetry} symmetry", f"{pointer}/components/{key}")
    S = StructureField(tuple(coords), ttype, comps, block.get("name", "g"))
    if ttype.contravariant == 0 and ttype.covariant == 2 and ttype.symmetry == "symmetric":
        det = _det([[S.full((i, j)) for j in range(n)] for i in range(n)])
        if det.is_zero:
            raise ProblemValidationError("metric is degenerate (determinant vanishes identically)", f"{pointer}/components")
    return S


def _det(M):
    """Cofactor expansion; fine for the small matrices of metric fixtures."""
    if len(M) == 1:
        return M[0][0]
    acc = Expr.const(0)
    for j, a in enumerate(M[0]):
        if a.is_zero:
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = a * _det(minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def _closure_warning(L: PseudoAlgebraSpec, seed: int):
    try:
        structure_constants(L, seed)
    except BracketClosureViolation as exc:
        return f"bracket closure: {exc}"
    return None


def validate_problem(doc: dict) -> ProblemSpec:
    """Schema check, then semantic checks; raises ProblemValidationError."""
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        raise ProblemValidationError(err.message, _pointer(err.absolute_path))
    raw = copy.deepcopy(doc)
    for key, value in DEFAULTS.items():
        raw.setdefault(key, value)
    raw.setdefault("name", "problem")
    raw.setdefault("dependents", [])

    mode = raw["mode"]
    indep = tuple(raw["independents"])
    deps = tuple(raw["dependents"])
    clash = set(indep) & set(deps)
    if clash:
        raise ProblemValidationError(f"names declared twice: {sorted(clash)}", "/dependents")

    structure = None
    if mode == "sections":
        if not deps:
            raise ProblemValidationError("sections mode needs at least one dependent variable", "/dependents")
        space = ActionSpace.sections(indep, deps)
        if "structure" in raw:
            structure = _structure(raw["structure"], indep + deps, "/structure")
    else:
        if deps:
            raise ProblemValidationError("structure mode takes no dependent variables", "/dependents")
        if "structure" not in raw:
            raise ProblemValidationError("structure mode requires a structure block", "")
        structure = _structure(raw["structure"], indep, "/structure")
        space = ActionSpace.structure(indep, structure.ttype, structure.name)

    pa = raw["pseudo_algebra"]
    warnings = []
    if pa["type"] == "finite_basis":
        base = space.base_spec.with_order(0)
        gens = []
        for gi, g in enumerate(pa["generators"]):
            where = f"/pseudo_algebra/generators/{gi}"
            phi = g.get("phi", [])
            if len(g["xi"]) != base.n:
                raise ProblemValidationError(f"expected {base.n} xi components", f"{where}/xi")
            if mode == "structure" and phi:
                raise ProblemValidationError("structure mode generators live on the base; phi is induced", f"{where}/phi")
            if mode == "sections" and len(phi) != base.m:
                raise ProblemValidationError(f"expected {base.m} phi components", f"{where}/phi")
            xi = [_parse_at(t, base, f"{where}/xi/{j}") for j, t in enumerate(g["xi"])]
            ph = [_parse_at(t, base, f"{where}/phi/{j}") for j, t in enumerate(phi)]
            if all(e.is_zero for e in xi + ph):
                raise ProblemValidationError("generator vanishes identically", where)
            gens.append(VectorField(base, xi, ph))
        L = PseudoAlgebraSpec.finite_basis(gens)
        if not _independent(gens, raw["seed"]):
            raise ProblemValidationError("generators are linearly dependent", "/pseudo_algebra/generators")
        w = _closure_warning(L, raw["seed"])
        if w:
            warnings.append(w)
    else:
        if "structure" in pa:
            coords = indep + deps
            S = _structure(pa["structure"], coords, "/pseudo_algebra/structure")
        elif structure is not None and mode == "structure":
            S = structure
        else:
            raise ProblemValidationError("lie_equation needs a structure (inline or the problem's structure block)", "/pseudo_algebra")
        L = PseudoAlgebraSpec.lie_equation(S)

    invariants = dict(raw.get("invariants", {}))
    if invariants:
        order = invariants.get("order", raw["max_order"])
        vocab = space.jet_spec.with_order(max(order, raw["max_order"]) + 1)
        parsed = {"order": order}
        parsed["expressions"] = [_parse_at(t, vocab, f"/invariants/expressions/{i}") for i, t in enumerate(invariants.get("expressions", []))]
        ders = []
        for i, d in enumerate(invariants.get("derivations", [])):
            if len(d) != space.n:
                raise ProblemValidationError(f"expected {space.n} coefficients", f"/invariants/derivations/{i}")
            ders.append([_parse_at(t, vocab, f"/invariants/derivations/{i}/{j}") for j, t in enumerate(d)])
        parsed["derivations"] = ders
        if "denominator" in invariants:
            parsed["denominator"] = _parse_at(invariants["denominator"], vocab, "/invariants/denominator")
        if "degree" in invariants:
            parsed["degree"] = invariants["degree"]
        invariants = parsed

    return ProblemSpec(
        name=raw["name"],
        mode=mode,
        space=space,
        pseudo_algebra=L,
        structure=structure,
        max_order=raw["max_order"],
        seed=raw["seed"],
        samples=raw["samples"],
        invariants=invariants,
        raw=raw,
        warnings=warnings,
    )


def _independent(gens, seed: int) -> bool:
    """Linear independence over the reals, from exact values at seeded points."""
    from .errors import DomainError
    from .sampling import SplitMix64, random_point

    rng = SplitMix64(seed)
    syms = gens[0].variables
    rows = [[] for _ in gens]
    taken = 0
    for _ in range(64):
        pt = random_point(rng, syms)
        try:
            vals = [[e.eval_rational(pt) for e in v.components] for v in gens]
        except (DomainError, ZeroDivisionError):
            continue
        for r, v in zip(rows, vals):
            r.extend(v)
        taken += 1
        if taken > len(gens) + 2:
            break
    return linalg.rank(rows, len(rows[0])) == len(gens)


def load_problem(path) -> ProblemSpec:
    """Read, validate and parse a problem file."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ProblemValidationError(f"no such file: {path}", None) from None
    except UnicodeDecodeError as exc:
        raise ProblemValidationError(f"not UTF-8: {exc}", None) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemValidationError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", None) from None
    spec = validate_problem(doc)
    if spec.raw.get("name") == "problem" and "name" not in doc:
        spec.raw["name"] = spec.name = p.stem
    return spec


def dump_problem(spec: ProblemSpec) -> str:
    return json.dumps(spec.echo(), indent=2, sort_keys=True) + "\n"
