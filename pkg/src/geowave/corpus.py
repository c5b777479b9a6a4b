"""Build checkable objects (Pde, VectorField, ...) from model sections."""

from __future__ import annotations

from pathlib import Path

from .conservation import ConservedVector, Multiplier
from .geometry import Metric, box_operator
from .jet import Pde
from .kernel import atoms as A
from .kernel.expr import Expr, substitute, substitute_function
from .parser import Model, ModelError, Section, load_model, parse_bindings, parse_expr
from .reduction import VariableMap
from .symmetry import VectorField

__all__ = [
    "CORPUS_DIR",
    "resolve_model",
    "instantiate",
    "instances",
    "equation",
    "lagrangian",
    "generator",
    "generator_sides",
    "gauge",
    "flux",
    "multiplier",
    "variable_map",
    "map_chain",
    "metric",
]

CORPUS_DIR = Path(__file__).resolve().parents[2] / "corpus"


def resolve_model(path_or_name) -> Model:
    """Load a model file; bare names resolve inside the shipped corpus."""
    p = Path(path_or_name)
    if not p.exists() and not p.suffix:
        cand = CORPUS_DIR / f"{path_or_name}.gw"
        if cand.exists():
            p = cand
    return load_model(p)


def instantiate(e: Expr, model: Model, bindings: dict | None) -> Expr:
    """Substitute function bodies and parameter values."""
    if not bindings:
        return e
    sc = model.scope
    for name, body in bindings.items():
        if name in sc.functions:
            args = [sc.atom_for(a) for a in sc.functions[name]]
            e = substitute_function(e, name, body, args)
    pvals = {A.param(n): v for n, v in bindings.items() if n in sc.params}
    if pvals:
        bind = dict(pvals)
        for a in e.atoms():
            if a.kind == A.SPOW and a.args[1] in pvals:
                val = pvals[a.args[1]]
                if not val.is_constant():
                    raise ModelError(f"symbolic power {A.atom_text(a)} needs a constant exponent")
                bind[a] = Expr.atom(a.args[0]) ** val.constant_value()
        e = substitute(e, bind)
    return e


def instances(model: Model, sec: Section) -> list:
    """(label, bindings) pairs; an empty instance means uninstantiated."""
    raw = sec.get_all("instance")
    if not raw:
        return [("", {})]
    out = []
    for text in raw:
        text = text.strip()
        if text in ("", "symbolic"):
            out.append(("symbolic", {}))
        else:
            out.append((text, parse_bindings(model, text)))
    return out


def _expr(model: Model, sec: Section, key: str, scope=None) -> Expr:
    e = sec.entry(key)
    try:
        return parse_expr(e.value, scope or model.scope)
    except ValueError as exc:
        raise ModelError(f"[{sec.kind} {sec.name}] {key}: {exc}", e.line) from None


def metric(model: Model) -> Metric:
    return Metric.from_model(model)


def _coords(model: Model, sec: Section) -> tuple:
    raw = sec.get("coords")
    if raw is None:
        return tuple(model.coordinates)
    cs = tuple(x.strip() for x in raw.split(",") if x.strip())
    for c in cs:
        if c not in model.coordinates:
            raise ModelError(f"[{sec.kind} {sec.name}] coords: {c!r} is not a coordinate", sec.line)
    return cs


def equation(model: Model, name: str, bindings: dict | None = None,
             extra_sides=(), extra_side_leadings=()) -> Pde:
    sec = model.section("equation", name)
    coords = _coords(model, sec)
    lead_atom = _single_atom(_expr(model, sec, "leading")) if sec.get("leading") else None
    if sec.get("box") is not None:
        src = _expr(model, sec, "box")
        delta = box_operator(metric(model), src, model.field, lead_atom, name).delta
    else:
        delta = _expr(model, sec, "delta")
    delta = instantiate(delta, model, bindings)
    sides = [instantiate(parse_expr(s, model.scope), model, bindings) for s in sec.get_all("side")]
    leads = [_single_atom(parse_expr(s, model.scope)) for s in sec.get_all("side_leading")]
    sides += list(extra_sides)
    leads += list(extra_side_leadings)
    return Pde.build(delta, coords, model.field, lead_atom, sides, leads, name)


def _single_atom(e: Expr):
    if e.den or len(e.num) != 1:
        raise ModelError(f"expected a single derivative atom, got {e}")
    (m, c), = e.num.items()
    if len(m) != 1 or not m[0][1].is_one() or not c.is_one():
        raise ModelError(f"expected a single derivative atom, got {e}")
    return m[0][0]


def lagrangian(model: Model, name: str, bindings: dict | None = None) -> Expr:
    sec = model.section("lagrangian", name)
    return instantiate(_expr(model, sec, "density"), model, bindings)


def generator(model: Model, name: str, bindings: dict | None = None) -> VectorField:
    sec = model.section("generator", name)
    coords = tuple(model.coordinates)
    fkey = "phi" if "phi" not in coords else model.field
    xi = {}
    for c in coords:
        if sec.get(c) is not None and not (c == fkey):
            xi[c] = instantiate(_expr(model, sec, c), model, bindings)
    phi = instantiate(_expr(model, sec, fkey), model, bindings) if sec.get(fkey) is not None \
        else Expr.const(0)
    return VectorField(coords, xi, phi, model.field, name)


def generator_sides(model: Model, name: str, bindings: dict | None = None):
    """Side relations declared on a generator (only used uninstantiated)."""
    sec = model.section("generator", name)
    if bindings:
        return [], []
    sides = [parse_expr(s, model.scope) for s in sec.get_all("side")]
    leads = [_single_atom(parse_expr(s, model.scope)) for s in sec.get_all("side_leading")]
    return sides, leads


def gauge(model: Model, name: str, bindings: dict | None = None) -> dict | None:
    sec = model.section("generator", name)
    out = {}
    for c in model.coordinates:
        key = f"gauge {c}"
        if sec.get(key) is not None:
            out[c] = instantiate(_expr(model, sec, key), model, bindings)
    return out or None


def flux(model: Model, name: str, coords=None) -> ConservedVector:
    sec = model.section("flux", name)
    if coords is None:
        eq = sec.get("equation")
        coords = _coords(model, model.section("equation", eq)) if eq else tuple(model.coordinates)
    comps = {c: _expr(model, sec, c) for c in coords if sec.get(c) is not None}
    return ConservedVector(comps, tuple(coords), name)


def multiplier(model: Model, name: str) -> Multiplier:
    sec = model.section("multiplier", name)
    m = Multiplier(_expr(model, sec, "q"), name)
    if sec.get("density") is not None:
        m.detail["density"] = _expr(model, sec, "density")
    return m


# -- maps ------------------------------------------------------------------

def _map_scope(model: Model):
    sc = model.scope.copy()
    for s in model.named("map"):
        for e in s.entries:
            head, _, var = e.key.partition(" ")
            if head == "new" and var not in sc.coords:
                sc.coords.append(var)
        fld = s.get("field")
        if fld and fld not in sc.fields:
            sc.fields.append(fld)
    A.register_suffix_names(sc.coords)
    return sc


def variable_map(model: Model, name: str, old_coords, old_field: str) -> VariableMap:
    sec = model.section("map", name)
    sc = _map_scope(model)
    new, inverse, dep = {}, {}, None
    for e in sec.entries:
        head, _, var = e.key.partition(" ")
        if head not in ("new", "inverse", "dep"):
            continue
        try:
            val = parse_expr(e.value, sc)
        except ValueError as exc:
            raise ModelError(f"[map {name}] {e.key}: {exc}", e.line) from None
        if head == "new":
            new[var] = val
        elif head == "inverse":
            inverse[var] = val
        else:
            if var != old_field:
                raise ModelError(f"[map {name}] dep names {var!r}, the field is {old_field!r}", e.line)
            dep = val
    keep = tuple(x.strip() for x in (sec.get("keep") or "").split(",") if x.strip())
    new_field = sec.get("field") or old_field
    return VariableMap(tuple(old_coords), keep, new, inverse, old_field, new_field, dep, name)


def map_chain(model: Model, name: str) -> tuple[str, list]:
    """(root equation name, [map names from the root outward])."""
    chain = []
    cur = name
    seen = set()
    while True:
        if cur in seen:
            raise ModelError(f"map chain through {cur!r} is cyclic")
        seen.add(cur)
        sec = model.section("map", cur)
        chain.append(cur)
        src = sec.get("source")
        if src:
            cur = src
            continue
        eq = sec.get("equation")
        if not eq:
            raise ModelError(f"[map {cur}] needs an equation or a source map")
        return eq, list(reversed(chain))
