"""Command-line front end: box, check, detsys, reduce, commutators.

Exit codes: 0 everything holds, 1 at least one erratum, 2 usage or model error.
"""

from __future__ import annotations

import json
import re
import sys
from dataclasses import dataclass, field as dc_field

import click

from . import checks as K
from . import corpus as C
from .kernel.expr import KernelError
from .oracle import DEFAULT_DIGITS, DEFAULT_TRIALS
from .parser import ModelError
from .reduction import change_variables, monomial_map
from .symmetry import determining_system

TRUNCATE = 2000
ROMAN = {"1": "i", "2": "ii", "3": "iii", "4": "iv"}


def truncate(text: str | None, limit: int = TRUNCATE) -> str:
    if text is None:
        return ""
    if len(text) <= limit:
        return text
    return text[:limit] + f"... [{len(text) - limit} more characters]"


@dataclass
class Session:
    opts: K.Options
    json_path: str | None = None
    records: list = dc_field(default_factory=list)

    def add(self, rec: K.Record) -> None:
        self.records.append(rec)
        self.echo(_human(rec))

    def echo(self, text: str = "") -> None:
        if self.json_path != "-":
            click.echo(text)

    def finish(self) -> None:
        """Write the JSON report, print the summary and exit with the contract code."""
        if self.json_path:
            lines = [json.dumps(r.to_dict(), ensure_ascii=False) for r in self.records]
            lines += [json.dumps(K.erratum_record(r), ensure_ascii=False)
                      for r in self.records if r.is_erratum]
            text = "".join(line + "\n" for line in lines)
            if self.json_path == "-":
                click.echo(text, nl=False)
            else:
                with open(self.json_path, "w", encoding="utf-8") as fh:
                    fh.write(text)
        judged = [r for r in self.records if r.holds is not None]
        passed = sum(1 for r in judged if r.holds)
        errata = len(judged) - passed
        other = len(self.records) - len(judged)
        summary = f"summary: {passed}/{len(judged)} hold, {errata} errata"
        if other:
            summary += f", {other} not judged"
        self.echo(summary)
        sys.exit(1 if errata else 0)


def _human(r: K.Record) -> str:
    tag = {True: "PASS", False: "FAIL", None: "INFO"}[r.holds]
    line = f"{tag} {r.command} {r.name}"
    if r.timing is not None:
        line += f" ({r.timing}s)"
    out = [line]
    if r.holds is None:
        status = r.detail.get("status")
        if status:
            out.append(f"  status: {status}")
    unit = r.detail.get("unit")
    if unit is not None:
        out.append(f"  unit: {unit}")
    if r.holds is False:
        out.append(f"  residual: {truncate(r.residual)}")
        for w in r.witness[:1]:
            out.append(f"  witness: {w['value']} at {w['point']}")
        if r.is_disagreement:
            out.append("  disagreement: symbolic residual nonzero but numerically zero")
    return "\n".join(out)


def _fail(msg: str) -> None:
    click.echo(f"error: {msg}", err=True)
    sys.exit(2)


def _load(model: str):
    try:
        return C.resolve_model(model)
    except OSError as exc:
        _fail(f"cannot read model {model!r}: {exc.strerror or exc}")


def _guard(fn):
    """Turn model and kernel errors into exit code 2."""
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ModelError, KernelError) as exc:
            _fail(str(exc))

    return wrapper


def _common(fn):
    for opt in (
        click.option("--timing", is_flag=True, default=None, help="Record wall-clock timings."),
        click.option("--json", "json_path", default=None, help="JSON-lines report path ('-' for stdout)."),
        click.option("--trials", type=click.IntRange(1), default=None, help="Oracle sample points."),
        click.option("--digits", type=click.IntRange(30), default=None, help="Oracle working precision."),
        click.option("--seed", type=int, default=None, help="Oracle seed."),
    ):
        fn = opt(fn)
    return fn


def _session(ctx: click.Context, seed, digits, trials, json_path, timing) -> Session:
    base = ctx.obj or {}

    def pick(name, value, default):
        if value is not None:
            return value
        if base.get(name) is not None:
            return base[name]
        return default

    opts = K.Options(trials=pick("trials", trials, DEFAULT_TRIALS), digits=pick("digits", digits, DEFAULT_DIGITS),
                     seed=pick("seed", seed, 0), timing=bool(pick("timing", timing, False)))
    return Session(opts, pick("json_path", json_path, None))


@click.group()
@_common
@click.version_option(package_name="artifact")
@click.pass_context
def main(ctx, seed, digits, trials, json_path, timing):
    """Verify symmetries, conservation laws and reductions of wave equations on model files.

    MODEL arguments are paths to .gw files or names of shipped corpus models (asd, kerr, mink).
    """
    ctx.obj = {"seed": seed, "digits": digits, "trials": trials, "json_path": json_path, "timing": timing}


@main.command()
@click.argument("model")
@click.option("--source", default="0", show_default=True, help="Right-hand side of box u = source.")
@click.option("--compare", default=None, help="Equation section to compare against, up to a unit.")
@_common
@click.pass_context
@_guard
def box(ctx, model, source, compare, **kw):
    """Derive the d'Alembertian equation of the model metric."""
    s = _session(ctx, **kw)
    m = _load(model)
    pde, rec = K.run_box(m, source, compare, s.opts)
    s.echo(f"box u = {source}")
    s.echo(f"delta = {pde.delta}")
    if rec is not None:
        s.add(rec)
    s.finish()


@main.command()
@click.argument("model")
@click.option("--symmetries", is_flag=True, help="Lie point symmetry generators.")
@click.option("--noether", is_flag=True, help="Noether operators and their densities.")
@click.option("--fluxes", is_flag=True, help="Printed conserved vectors.")
@click.option("--multipliers", is_flag=True, help="Conservation-law multipliers.")
@click.option("--lagrangians", is_flag=True, help="Euler-Lagrange equations of the Lagrangians.")
@click.option("--all", "run_all", is_flag=True, help="Every kind above.")
@click.option("--case", default=None, help="Restrict to sections with this case label.")
@click.option("--corrected", is_flag=True, help="Also run sections marked as corrected readings.")
@_common
@click.pass_context
@_guard
def check(ctx, model, symmetries, noether, fluxes, multipliers, lagrangians, run_all, case, corrected, **kw):
    """Check corpus sections and report one record per object."""
    kinds = [("symmetries", symmetries, K.run_symmetries), ("noether", noether, K.run_noether),
             ("fluxes", fluxes, K.run_fluxes), ("multipliers", multipliers, K.run_multipliers),
             ("lagrangians", lagrangians, K.run_lagrangians)]
    chosen = [fn for _, flag, fn in kinds if flag or run_all]
    if not chosen:
        raise click.UsageError("choose at least one of --symmetries --noether --fluxes --multipliers "
                               "--lagrangians --all")
    s = _session(ctx, **kw)
    s.opts.corrected = corrected
    m = _load(model)
    for fn in chosen:
        for rec in fn(m, case, s.opts):
            s.add(rec)
    s.finish()


@main.command()
@click.argument("model")
@click.option("--mode", type=click.Choice(["lie", "noether"]), default="lie", show_default=True)
@click.option("--equation", default=None, help="Equation section (lie mode); default the first.")
@click.option("--lagrangian", default=None, help="Lagrangian section (noether mode); default the first.")
@click.option("--raw", is_flag=True, help="Print the rows before triangular simplification.")
@_common
@click.pass_context
@_guard
def detsys(ctx, model, mode, equation, lagrangian, raw, **kw):
    """Separate the determining system of a generic point field by jet monomials."""
    s = _session(ctx, **kw)
    m = _load(model)
    coords = tuple(m.coordinates)
    if mode == "noether":
        secs = m.named("lagrangian")
        if lagrangian is None and not secs:
            _fail("noether mode needs a [lagrangian] section")
        name = lagrangian or secs[0].name
        ds = determining_system(None, "noether", C.lagrangian(m, name), coords, m.field)
    else:
        secs = m.named("equation")
        if equation is None and not secs:
            _fail("lie mode needs an [equation] section")
        name = equation or secs[0].name
        ds = determining_system(C.equation(m, name), "lie")
    for line in ds.table(simplified=not raw):
        s.echo(truncate(line))
    ok = (ds.reconstruct() - ds.residual).is_zero()
    s.add(K.Record("detsys", f"{mode}:{name}", ok, "0" if ok else None,
                   detail={"rows": len(ds.rows), "table": ds.table(simplified=not raw)}))
    s.finish()


def _alias(model, name: str) -> str:
    """X6case1 -> i_X6 when the model has no section of that name."""
    if any(sec.name == name for sec in model.named("generator")):
        return name
    mt = re.fullmatch(r"(X\d+)case(\d+)", name)
    if mt and mt.group(2) in ROMAN:
        return f"{ROMAN[mt.group(2)]}_{mt.group(1)}"
    return name


@main.command()
@click.argument("model")
@click.option("--map", "map_name", default=None, help="Map section; source maps are applied first.")
@click.option("--generator", default=None, help="Monomial-class generator whose invariants define the map.")
@click.option("--equation", default=None, help="Equation to reduce (generator mode).")
@_common
@click.pass_context
@_guard
def reduce(ctx, model, map_name, generator, equation, **kw):
    """Change variables along a map chain or the invariants of a generator."""
    if (map_name is None) == (generator is None):
        raise click.UsageError("give exactly one of --map and --generator")
    s = _session(ctx, **kw)
    m = _load(model)
    if map_name is not None:
        root, chain = C.map_chain(m, map_name)
        pde = C.equation(m, root)
        s.echo(f"{root}: {pde.delta}")
        for step in chain:
            vm = C.variable_map(m, step, pde.coords, pde.field)
            pde = change_variables(pde, vm, seed=s.opts.seed)
            s.echo(f"{step}: {pde.delta}")
        name = map_name
    else:
        name = _alias(m, generator)
        X = C.generator(m, name)
        sec = m.section("generator", name)
        eq = equation or sec.get("equation")
        if not eq:
            _fail(f"[generator {name}] names no equation; pass --equation")
        pde = C.equation(m, eq)
        vm = monomial_map(X, name, used=pde.coords)
        shown = [f"{k} = {v}" for k, v in vm.new.items()] + [f"{vm.old_field} = {vm.dep}"]
        s.echo(f"map: {', '.join(shown)}; keep {', '.join(vm.keep) or 'none'}")
        pde = change_variables(pde, vm, seed=s.opts.seed)
        s.echo(f"{name}: {pde.delta}")
    s.add(K.Record("reduce", name, True, "0", detail={"coords": list(pde.coords), "field": pde.field,
                                                      "delta": str(pde.delta)}))
    s.finish()


@main.command()
@click.argument("model")
@click.option("--case", default=None, help="Restrict to generators with this case label.")
@_common
@click.pass_context
@_guard
def commutators(ctx, model, case, **kw):
    """Pairwise commutator table of the Lie generators."""
    s = _session(ctx, **kw)
    m = _load(model)
    names, table, rec = K.run_commutators(m, case, s.opts)
    width = max((len(n) for n in names), default=0)
    s.echo(" " * width + " | " + " ".join(f"{j + 1:>2}" for j in range(len(names))))
    for i, n in enumerate(names):
        cells = " ".join(f"{'0' if table[i][j] == '0' else '*':>2}" for j in range(len(names)))
        s.echo(f"{n:<{width}} | {cells}")
    for i, n in enumerate(names):
        for j in range(i + 1, len(names)):
            if table[i][j] != "0":
                s.echo(f"[{n}, {names[j]}] = {truncate(table[i][j])}")
    rec.detail["names"] = names
    rec.detail["table"] = table
    s.add(rec)
    s.finish()


if __name__ == "__main__":
    main()
