"""Run corpus checks and turn verdicts into report records."""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dc_field

from . import corpus as C
from .conservation import (
    ConservationError,
    compare_density,
    divergence_on_shell,
    multiplier_check,
    noether_condition,
    noether_flux,
    pair_check,
)
from .geometry import equal_up_to_unit
from .jet import euler_operator
from .kernel.expr import Expr, coefficient_of
from .oracle import DEFAULT_DIGITS, DEFAULT_TRIALS, Verdict, confirm_nonzero
from .parser import Model, ModelError
from .symmetry import check_symmetry, commutator

__all__ = [
    "Options",
    "Record",
    "erratum_record",
    "run_symmetries",
    "run_noether",
    "run_fluxes",
    "run_multipliers",
    "run_lagrangians",
    "run_box",
    "run_commutators",
]


@dataclass
class Options:
    trials: int = DEFAULT_TRIALS
    digits: int = DEFAULT_DIGITS
    seed: int = 0
    timing: bool = False
    corrected: bool = False  # include sections marked reading = corrected


@dataclass
class Record:
    command: str
    name: str
    holds: bool | None
    residual: str | None = None
    witness: list = dc_field(default_factory=list)
    detail: dict = dc_field(default_factory=dict)
    timing: float | None = None
    confirmed: bool | None = None

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "name": self.name,
            "holds": self.holds,
            "residual": self.residual,
            "witness": self.witness,
            "detail": self.detail,
            "timing": self.timing,
        }

    @property
    def is_erratum(self) -> bool:
        return self.holds is False

    @property
    def is_disagreement(self) -> bool:
        """Symbolically nonzero but numerically zero at every sample."""
        return self.holds is False and self.confirmed is False


def erratum_record(r: Record) -> dict:
    return {
        "kind": "erratum" if not r.is_disagreement else "disagreement",
        "name": r.name,
        "residual": r.residual,
        "witness_points": [w["point"] for w in r.witness],
        "witness_values": [w["value"] for w in r.witness],
    }


def _text(e) -> str | None:
    if e is None:
        return None
    return str(e)


def _detail_value(v):
    if isinstance(v, Expr):
        return str(v)
    if isinstance(v, dict):
        return {k: _detail_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_detail_value(x) for x in v]
    return v


def _record(command: str, name: str, v: Verdict, opts: Options, t0: float,
            extra: dict | None = None) -> Record:
    detail = {k: _detail_value(x) for k, x in (v.detail or {}).items()}
    if extra:
        detail.update(extra)
    residual = "0" if v.holds else _text(v.residual)
    return Record(command, name, v.holds, residual, list(v.witness or []), detail,
                  round(time.perf_counter() - t0, 3) if opts.timing else None, v.confirmed)


def _selected(model: Model, kind: str, case: str | None, pred=None, corrected: bool = False) -> list:
    """Sections of a kind; corrected readings only when asked for or named by case."""
    out = []
    for s in model.named(kind):
        if case is not None and s.get("case") != case:
            continue
        if case is None and not corrected and s.get("reading") == "corrected":
            continue
        if pred is not None and not pred(s):
            continue
        out.append(s)
    return out


def _label(s, inst: str) -> str:
    return f"{s.name}[{inst}]" if inst else s.name


# -- Lie point symmetries --------------------------------------------------

def run_symmetries(model: Model, case: str | None, opts: Options) -> list[Record]:
    out = []
    for s in _selected(model, "generator", case, lambda s: s.get("kind", "lie") == "lie", opts.corrected):
        eq = s.get("equation")
        if not eq:
            raise ModelError(f"[generator {s.name}] names no equation", s.line)
        for inst, bind in C.instances(model, s):
            t0 = time.perf_counter()
            X = C.generator(model, s.name, bind)
            sides, leads = C.generator_sides(model, s.name, bind)
            pde = C.equation(model, eq, bind, sides, leads)
            v = check_symmetry(X, pde, opts.trials, opts.digits, opts.seed)
            out.append(_record("check-symmetries", _label(s, inst), v, opts, t0,
                               {"case": s.get("case"), "equation": eq}))
    return out


# -- Noether operators -----------------------------------------------------

def run_noether(model: Model, case: str | None, opts: Options) -> list[Record]:
    """Noether condition (Euler test) plus the strict flux and its density."""
    out = []
    fluxes_by_gen = {f.get("generator"): f for f in model.named("flux") if f.get("generator")}
    for s in _selected(model, "generator", case, lambda s: s.get("kind") == "noether",
                       opts.corrected):
        lname = s.get("lagrangian")
        if not lname:
            raise ModelError(f"[generator {s.name}] names no lagrangian", s.line)
        for inst, bind in C.instances(model, s):
            t0 = time.perf_counter()
            X = C.generator(model, s.name, bind)
            L = C.lagrangian(model, lname, bind)
            gauge = C.gauge(model, s.name, bind)
            v = noether_condition(X, L, gauge, opts.trials, opts.digits, opts.seed)
            name = _label(s, inst)
            out.append(_record("check-noether", name, v, opts, t0,
                               {"case": s.get("case"), "lagrangian": lname}))
            fsec = fluxes_by_gen.get(s.name)
            if not v.holds or fsec is None or "t" not in X.coords:
                continue
            t0 = time.perf_counter()
            try:
                phi = noether_flux(X, L, gauge)
            except ConservationError:
                out.append(Record("check-noether", f"{name}:density", None,
                                  detail={"status": "non-strict: gauge unknown, density not compared"}))
                continue
            printed = C.flux(model, fsec.name, X.coords)
            if "t" not in printed.components:
                continue
            pde = C.equation(model, s.get("equation"), bind) if s.get("equation") else None
            dv = compare_density(phi.components["t"], printed.components["t"], pde,
                                 opts.trials, opts.digits, opts.seed)
            out.append(_record("check-noether", f"{name}:density", dv, opts, t0,
                               {"flux": fsec.name, "computed": str(phi.components["t"])}))
    return out


# -- printed fluxes --------------------------------------------------------

def run_fluxes(model: Model, case: str | None, opts: Options) -> list[Record]:
    out = []
    for s in _selected(model, "flux", case, corrected=opts.corrected):
        t0 = time.perf_counter()
        eq = s.get("equation")
        if not eq:
            raise ModelError(f"[flux {s.name}] names no equation", s.line)
        pde = C.equation(model, eq)
        phi = C.flux(model, s.name, pde.coords)
        if not phi.complete():
            out.append(Record("check-fluxes", s.name, None,
                              detail={"status": "partial: density only",
                                      "missing": [c for c in pde.coords if c not in phi.components]}))
            continue
        v = divergence_on_shell(phi, pde, opts.trials, opts.digits, opts.seed)
        extra = {"equation": eq}
        if not v.holds:
            extra["form_sign_reading"] = _form_sign_reading(phi, pde)
        out.append(_record("check-fluxes", s.name, v, opts, t0, extra))
    return out


def _form_sign_reading(phi, pde) -> bool:
    """Whether the components, read as 3-form coefficients with alternating
    signs in coordinate order, give an on-shell conserved vector."""
    comps = {c: (v if i % 2 == 0 else -v) for i, (c, v) in
             enumerate((c, phi.components[c]) for c in pde.coords)}
    return pde.reduce(type(phi)(comps, phi.coords, phi.name).divergence()).is_zero()


# -- multipliers -----------------------------------------------------------

def run_multipliers(model: Model, case: str | None, opts: Options) -> list[Record]:
    out = []
    for s in _selected(model, "multiplier", case, corrected=opts.corrected):
        t0 = time.perf_counter()
        eq = s.get("equation")
        if not eq:
            raise ModelError(f"[multiplier {s.name}] names no equation", s.line)
        pde = C.equation(model, eq)
        m = C.multiplier(model, s.name)
        v = multiplier_check(m, pde, opts.trials, opts.digits, opts.seed)
        extra = {"equation": eq}
        if "density" in m.detail:
            extra["density"] = "partial: density-only record"
        out.append(_record("check-multipliers", s.name, v, opts, t0, extra))
    return out


# -- Lagrangians -----------------------------------------------------------

def run_lagrangians(model: Model, case: str | None, opts: Options) -> list[Record]:
    """E_u[L] against the section's equation, up to a unit."""
    out = []
    for s in _selected(model, "lagrangian", None, corrected=opts.corrected):
        eq = s.get("equation")
        if not eq:
            continue
        t0 = time.perf_counter()
        pde = C.equation(model, eq)
        E = euler_operator(C.lagrangian(model, s.name), model.field)
        v = _compare_up_to_unit(pde, E, opts)
        out.append(_record("check-lagrangians", s.name, v, opts, t0, {"equation": eq}))
    return out


def _compare_up_to_unit(target, other: Expr, opts: Options) -> Verdict:
    """equal_up_to_unit(target.delta, other); on failure the unit is read off
    the leading coefficients and target - unit*other is witnessed."""
    v = equal_up_to_unit(target.delta, other)
    if v.holds:
        return v
    lead = target.leading
    unit = coefficient_of(target.delta, lead)[0] / coefficient_of(other, lead)[0]
    res = target.delta - unit * other
    c = confirm_nonzero(res, opts.trials, opts.digits, opts.seed)
    return Verdict(False, res, "symbolic+numeric", c.witness, name=target.name,
                   detail={"unit": unit, "reason": v.detail.get("reason")}, confirmed=c.holds)


# -- box -------------------------------------------------------------------

def run_box(model: Model, source: str, compare: str | None, opts: Options):
    """(Pde of box u = source, optional comparison Record).

    On a mismatch the residual target - unit*box is witnessed numerically.
    """
    from .geometry import box_operator

    t0 = time.perf_counter()
    g = C.metric(model)
    src = model.expr(source)
    if compare is None:
        return box_operator(g, src, model.field, None, "box"), None
    target = C.equation(model, compare)
    pde = box_operator(g, src, model.field, target.leading, "box")
    v = _compare_up_to_unit(target, pde.delta, opts)
    return pde, _record("box", f"box~{compare}", v, opts, t0, {"source": source})


# -- commutators -----------------------------------------------------------

def run_commutators(model: Model, case: str | None, opts: Options):
    """(names, table of [Xi, Xj] texts, antisymmetry Record)."""
    gens = _selected(model, "generator", case, lambda s: s.get("kind", "lie") == "lie", opts.corrected)
    fields = [(s.name, C.generator(model, s.name)) for s in gens]
    names = [n for n, _ in fields]
    table = []
    t0 = time.perf_counter()
    ok = True
    bad = []
    for i, (ni, Xi) in enumerate(fields):
        row = []
        for j, (nj, Xj) in enumerate(fields):
            Z = commutator(Xi, Xj)
            row.append("0" if Z.is_zero() else Z.text())
            if j < i:
                continue
            if not (Z + commutator(Xj, Xi)).is_zero():
                ok = False
                bad.append(f"[{ni},{nj}]")
        table.append(row)
    rec = Record("commutators", f"antisymmetry[{case or 'all'}]", ok, "0" if ok else None,
                 detail={"violations": bad} if bad else {},
                 timing=round(time.perf_counter() - t0, 3) if opts.timing else None)
    return names, table, rec


def density_pair(model: Model, mult: str, flux: str, opts: Options) -> Record:
    """Pair a multiplier with a complete flux; density-only fluxes are partial."""
    t0 = time.perf_counter()
    m = C.multiplier(model, mult)
    pde = C.equation(model, model.section("multiplier", mult).get("equation"))
    phi = C.flux(model, flux, pde.coords)
    v = pair_check(m, phi, pde, opts.trials, opts.digits, opts.seed)
    if v.residual is None and not v.holds:
        return Record("pair", f"{mult}~{flux}", None, detail=_detail_value(v.detail))
    return _record("pair", f"{mult}~{flux}", v, opts, t0)
