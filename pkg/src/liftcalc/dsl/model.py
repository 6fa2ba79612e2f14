"""Model documents: YAML text declaring an algebroid and named objects on it.

Recognized keys (indices are 0-based)::

    name: so3
    base_dim: 1
    fiber_dim: 3
    anchor: [["0"], ["0"], ["0"]]          # k columns a(e_a), each n strings
    structure:                              # C^c_ab, only a < b
      - {a: 0, b: 1, c: 2, expr: "1"}
    cotangent_of: pi                        # alternative to anchor/structure
    sections: {X: ["x0", "1", "0"]}
    dual_sections: {phi: [...]}
    vector_fields: {x: [...]}               # n entries, or n+k in variables x*, v*
    one_forms: {w: [...]}
    bivectors: {pi: [...]}                  # entries pi^{ij}, i < j, row-major
    groupoid_fields: {xi: [...]}            # 2n entries in variables y*, x*
    poisson_pair:
      bivector: pi
      star_forms: {Phi: {over: w, components: [...]}}   # 2n entries in y*, x*
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..algebroid import DualSection, LieAlgebroid, SectionA, cotangent_algebroid
from ..smooth import Bivector, ChartOneForm, ChartVectorField, ScalarField
from .compile import compile_expr
from .errors import DimensionMismatch, DslError, SchemaError
from .parser import VarSpec, parse

_KEYS = {
    "name", "base_dim", "fiber_dim", "anchor", "structure", "cotangent_of", "sections", "dual_sections",
    "vector_fields", "one_forms", "bivectors", "groupoid_fields", "poisson_pair",
}


class ModelParseError(SchemaError):
    """An expression inside a model failed to lex or parse; ``cause`` carries the position."""

    def __init__(self, where: str, cause: DslError):
        self.cause = cause
        self.pos = cause.pos
        super().__init__(where, str(cause))


@dataclass
class StarFormData:
    form: ChartOneForm  # on 2n variables (y, x)
    over: str
    sources: list[str]


@dataclass
class Model:
    name: str
    n: int
    k: int
    algebroid: LieAlgebroid
    sections: dict[str, SectionA] = field(default_factory=dict)
    dual_sections: dict[str, DualSection] = field(default_factory=dict)
    vector_fields: dict[str, ChartVectorField] = field(default_factory=dict)
    one_forms: dict[str, ChartOneForm] = field(default_factory=dict)
    bivectors: dict[str, Bivector] = field(default_factory=dict)
    groupoid_fields: dict[str, ChartVectorField] = field(default_factory=dict)
    poisson_bivector: str | None = None
    star_forms: dict[str, StarFormData] = field(default_factory=dict)
    cotangent_of: str | None = None
    sources: dict[str, list[str]] = field(default_factory=dict)

    def total_fields(self) -> dict[str, ChartVectorField]:
        return {k: v for k, v in self.vector_fields.items() if v.dim == self.n + self.k}

    def base_fields(self) -> dict[str, ChartVectorField]:
        return {k: v for k, v in self.vector_fields.items() if v.dim == self.n}


def _text(value, where: str) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise SchemaError(where, f"expected an expression string, got {type(value).__name__}")
    return str(value)


def _expr(src, where: str, spec: VarSpec) -> ScalarField:
    src = _text(src, where)
    try:
        return compile_expr(parse(src, spec), spec, label=src)
    except DslError as exc:
        raise ModelParseError(where, exc) from exc


def _dim(doc: dict, key: str, minimum: int) -> int:
    v = doc.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise SchemaError(key, f"must be an integer >= {minimum}")
    return v


def _named_lists(doc: dict, key: str) -> dict[str, list]:
    block = doc.get(key) or {}
    if not isinstance(block, dict):
        raise SchemaError(key, "expected a mapping of name -> list of expressions")
    for name, entries in block.items():
        if not isinstance(entries, list):
            raise SchemaError(f"{key}.{name}", "expected a list of expressions")
    return block


def _compile_list(entries: list, where: str, spec: VarSpec, expected: int | tuple[int, ...]) -> list[ScalarField]:
    allowed = (expected,) if isinstance(expected, int) else expected
    if len(entries) not in allowed:
        raise DimensionMismatch(where, allowed[0], len(entries))
    return [_expr(src, f"{where}[{i}]", spec) for i, src in enumerate(entries)]


def _algebroid(doc: dict, n: int, k: int, bivectors: dict[str, Bivector]) -> tuple[LieAlgebroid, str | None]:
    name = str(doc.get("name", ""))
    base = VarSpec([("x", n)])
    if "cotangent_of" in doc:
        if "anchor" in doc or "structure" in doc:
            raise SchemaError("cotangent_of", "cannot be combined with anchor/structure")
        target = doc["cotangent_of"]
        if target not in bivectors:
            raise SchemaError("cotangent_of", f"unknown bivector {target!r}")
        if k != n:
            raise DimensionMismatch("fiber_dim of a cotangent algebroid", n, k)
        return cotangent_algebroid(bivectors[target], name=name), target

    anchor_src = doc.get("anchor")
    if not isinstance(anchor_src, list):
        raise SchemaError("anchor", "expected a list of k columns")
    if len(anchor_src) != k:
        raise DimensionMismatch("anchor", k, len(anchor_src))
    columns = []
    for a, col in enumerate(anchor_src):
        if not isinstance(col, list):
            raise SchemaError(f"anchor[{a}]", "expected a list of n expressions")
        columns.append(_compile_list(col, f"anchor[{a}]", base, n))

    entries = []
    seen = set()
    for idx, item in enumerate(doc.get("structure") or []):
        where = f"structure[{idx}]"
        if not isinstance(item, dict) or set(item) != {"a", "b", "c", "expr"}:
            raise SchemaError(where, "expected {a, b, c, expr}")
        a, b, c = item["a"], item["b"], item["c"]
        if not all(isinstance(i, int) and 0 <= i < k for i in (a, b, c)):
            raise SchemaError(where, f"indices must be integers in [0, {k})")
        if a >= b:
            raise SchemaError(where, f"antisymmetry: only entries with a < b may be given (got a={a}, b={b})")
        if (a, b, c) in seen:
            raise SchemaError(where, f"duplicate entry ({a}, {b}, {c})")
        seen.add((a, b, c))
        entries.append((a, b, c, _expr(item["expr"], f"{where}.expr", base)))

    col_fns = [[f.fn for f in col] for col in columns]
    zero_anchor = all(f.label.strip() in ("0", "0.0") for col in columns for f in col)
    constant = all(not any(ch.isalpha() for ch in e[3].label) for e in entries)

    def anchor(p):
        return [[f(p) for f in col] for col in col_fns]

    if constant:
        const_entries = [(a, b, c, float(f.fn([0.0] * n))) for a, b, c, f in entries]

        def structure(p):
            return const_entries
    else:
        fn_entries = [(a, b, c, f.fn) for a, b, c, f in entries]

        def structure(p):
            return [(a, b, c, f(p)) for a, b, c, f in fn_entries]

    return LieAlgebroid(n, k, anchor, structure, name=name, zero_anchor=zero_anchor, constant_structure=constant), None


def build_model(doc: dict) -> Model:
    if not isinstance(doc, dict):
        raise SchemaError("<document>", "expected a mapping at top level")
    unknown = set(doc) - _KEYS
    if unknown:
        raise SchemaError(sorted(unknown)[0], "unknown key")
    n = _dim(doc, "base_dim", 1)
    base = VarSpec([("x", n)])
    sources: dict[str, list[str]] = {}

    bivectors = {}
    for name, entries in _named_lists(doc, "bivectors").items():
        comps = _compile_list(entries, f"bivectors.{name}", base, n * (n - 1) // 2)
        bivectors[name] = Bivector.from_components(n, comps)
        sources[name] = [str(e) for e in entries]

    k = n if ("cotangent_of" in doc and "fiber_dim" not in doc) else _dim(doc, "fiber_dim", 1)
    algebroid, cot = _algebroid(doc, n, k, bivectors)
    model = Model(str(doc.get("name", "")), n, k, algebroid, bivectors=bivectors, cotangent_of=cot, sources=sources)

    for name, entries in _named_lists(doc, "sections").items():
        model.sections[name] = algebroid.section(_compile_list(entries, f"sections.{name}", base, k))
        sources[name] = [str(e) for e in entries]
    for name, entries in _named_lists(doc, "dual_sections").items():
        model.dual_sections[name] = algebroid.dual_section(_compile_list(entries, f"dual_sections.{name}", base, k))
        sources[name] = [str(e) for e in entries]

    total = VarSpec([("x", n), ("v", k)])
    for name, entries in _named_lists(doc, "vector_fields").items():
        spec = base if len(entries) == n else total
        comps = _compile_list(entries, f"vector_fields.{name}", spec, (n, n + k))
        model.vector_fields[name] = ChartVectorField.from_components(comps, spec.dim)
        sources[name] = [str(e) for e in entries]
    for name, entries in _named_lists(doc, "one_forms").items():
        model.one_forms[name] = ChartOneForm.from_components(_compile_list(entries, f"one_forms.{name}", base, n), n)
        sources[name] = [str(e) for e in entries]

    pair = VarSpec([("y", n), ("x", n)])
    for name, entries in _named_lists(doc, "groupoid_fields").items():
        comps = _compile_list(entries, f"groupoid_fields.{name}", pair, 2 * n)
        model.groupoid_fields[name] = ChartVectorField.from_components(comps, 2 * n)
        sources[name] = [str(e) for e in entries]

    pp = doc.get("poisson_pair")
    if pp is not None:
        if not isinstance(pp, dict) or "bivector" not in pp:
            raise SchemaError("poisson_pair", "expected {bivector, star_forms}")
        if pp["bivector"] not in bivectors:
            raise SchemaError("poisson_pair.bivector", f"unknown bivector {pp['bivector']!r}")
        model.poisson_bivector = pp["bivector"]
        for name, spec_ in (pp.get("star_forms") or {}).items():
            where = f"poisson_pair.star_forms.{name}"
            if not isinstance(spec_, dict) or set(spec_) != {"over", "components"}:
                raise SchemaError(where, "expected {over, components}")
            if spec_["over"] not in model.one_forms:
                raise SchemaError(f"{where}.over", f"unknown one-form {spec_['over']!r}")
            comps = _compile_list(spec_["components"], f"{where}.components", pair, 2 * n)
            form = ChartOneForm.from_components(comps, 2 * n)
            model.star_forms[name] = StarFormData(form, spec_["over"], [str(e) for e in spec_["components"]])
    return model


def loads(text: str) -> Model:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "<document>"
        raise SchemaError(where, f"malformed document: {getattr(exc, 'problem', exc)}") from exc
    return build_model(doc)


def load_model(path) -> Model:
    path = Path(path)
    model = loads(path.read_text(encoding="utf-8"))
    if not model.name:
        model.name = path.stem
    return model
