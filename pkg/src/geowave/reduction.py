"""Invariants of monomial generators and change of variables for Pdes."""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import mpmath

from .geometry import clear_denominators
from .jet import Pde, choose_leading, total_derivative
from .kernel import atoms as A
from .kernel.expr import ONE_EXPR, ZERO_EXPR, Expr, KernelError, diff, esum, substitute
from .oracle import OracleError, SamplePoint, num_eval
from .symmetry import VectorField

__all__ = [
    "ReductionError",
    "VariableMap",
    "invariants",
    "monomial_map",
    "change_variables",
    "push_forward",
]

GREEK = ["alpha", "beta", "gamma", "delta", "epsilon", "kappa", "lambda", "mu", "nu", "sigma"]


class ReductionError(KernelError):
    pass


def _classify(X: VectorField):
    """Split the variables of X into untouched, scaled (c*v) and translated."""
    names = list(X.coords) + [X.field]
    comps = dict(X.xi)
    comps[X.field] = X.phi
    atoms = {c: A.coord(c) for c in X.coords}
    atoms[X.field] = A.field(X.field)
    untouched, scaled, shifted = [], {}, {}
    for v in names:
        comp = comps[v]
        if comp.is_zero():
            untouched.append(v)
            continue
        ratio = comp / Expr.atom(atoms[v])
        if ratio.is_constant():
            scaled[v] = ratio.constant_value()
        else:
            shifted[v] = comp
    free = {atoms[v] for v in untouched}
    for v, comp in shifted.items():
        if any(a.kind in (A.COORD, A.JET, A.SIN, A.COS) and a not in free
               for a in _base_atoms(comp)):
            raise ReductionError(
                f"generator is outside the monomial class ({v} component {comp}); "
                "supply invariants manually")
    if scaled and shifted:
        raise ReductionError("generator mixes scalings and translations; supply invariants manually")
    return names, atoms, untouched, scaled, shifted


def _base_atoms(e: Expr) -> set:
    out = set()
    for a in e.atoms():
        if a.kind == A.SPOW:
            out.add(a.args[0])
        elif a.kind == A.UFUNC:
            out.update(a.args)
        else:
            out.add(a)
    return out


def invariants(X: VectorField) -> list:
    """Functionally independent invariants of a monomial-class generator."""
    return [e for _, e, _v in _invariants(X)]


def _invariants(X: VectorField):
    """(kind, expr, variable) triples; kind is 'keep', 'field' or 'new'."""
    names, atoms, untouched, scaled, shifted = _classify(X)
    out = [("keep", Expr.atom(atoms[v]), v) for v in untouched]
    if scaled:
        coords_scaled = [v for v in X.coords if v in scaled]
        pivot = coords_scaled[-1] if coords_scaled else X.field
        cp = scaled[pivot]
        for v in names:
            if v in scaled and v != pivot:
                e = Expr.atom(atoms[v]) * Expr.atom(atoms[pivot]) ** (-scaled[v] / cp)
                out.append(("field" if v == X.field else "new", e, v))
    if shifted:
        order = [v for v in names if v in shifted]
        pivot = order[-1]
        for v in order[:-1]:
            e = Expr.atom(atoms[v]) - shifted[v] / shifted[pivot] * Expr.atom(atoms[pivot])
            out.append(("field" if v == X.field else "new", e, v))
    return out


@dataclass
class VariableMap:
    """Old coordinates -> chart (kept coordinates plus new variables).

    ``dep`` gives the old field in terms of the new field and chart/old
    variables; ``inverse`` expresses eliminated old coordinates in the chart.
    """

    old_coords: tuple
    keep: tuple
    new: dict  # name -> Expr in old variables
    inverse: dict  # old coordinate -> Expr in chart (and remaining old) variables
    old_field: str = "u"
    new_field: str = "U"
    dep: Expr | None = None  # old field in terms of new field
    name: str = ""
    chart: tuple = ()
    checked: bool = dc_field(default=False, repr=False)

    def __post_init__(self):
        self.old_coords = tuple(self.old_coords)
        self.keep = tuple(self.keep)
        if not self.chart:
            self.chart = tuple(self.keep) + tuple(self.new)
        self.chart = tuple(self.chart)
        if self.dep is None:
            self.dep = Expr.atom(A.field(self.new_field))
        for c in self.keep:
            if c not in self.old_coords:
                raise ReductionError(f"kept variable {c!r} is not an old coordinate")
        clash = set(self.new) & set(self.old_coords)
        if clash:
            raise ReductionError(f"new variables reuse old names: {sorted(clash)}")

    @property
    def eliminated(self) -> tuple:
        return tuple(c for c in self.old_coords if c not in self.keep)

    def round_trip(self, seed: int = 0, digits: int = 30, trials: int = 3) -> bool:
        """Old point -> chart -> old point agrees numerically."""
        rng = random.Random(seed)
        with mpmath.workdps(digits + 10):
            tol = mpmath.mpf(10) ** (10 - digits)
            for _ in range(trials):
                vals = {A.coord(c): Fraction(rng.randint(500, 2500), 1000) for c in self.old_coords}
                p = SamplePoint(dict(vals), {})
                chart_vals = {}
                for n, e in self.new.items():
                    _fill(p, e)
                    chart_vals[n] = num_eval(e, p, digits)
                for c, e in self.inverse.items():
                    q = _point_with(vals, chart_vals, e)
                    got = num_eval(e, q, digits)
                    want = mpmath.mpf(vals[A.coord(c)].numerator) / vals[A.coord(c)].denominator
                    if abs(got - want) > tol:
                        return False
        self.checked = True
        return True


def _fill(p: SamplePoint, e: Expr) -> None:
    for a in e.atoms():
        if a not in p.values and a.kind in (A.COORD, A.PARAM):
            raise OracleError(f"unassigned atom {A.atom_text(a)}")


def _point_with(old_vals: dict, chart_vals: dict, e: Expr) -> SamplePoint:
    vals = dict(old_vals)
    for n, v in chart_vals.items():
        vals[A.coord(n)] = _to_frac(v)
    return SamplePoint(vals, {})


def _to_frac(v) -> Fraction:
    m, e = v.man_exp
    return Fraction(int(m)) * (Fraction(2) ** int(e))


def monomial_map(X: VectorField, name: str = "", used=()) -> VariableMap:
    """VariableMap from the invariants of a monomial-class generator."""
    inv = _invariants(X)
    names, atoms, untouched, scaled, shifted = _classify(X)
    taken = set(used) | set(X.coords) | {X.field}
    greek = (g for g in GREEK if g not in taken)
    keep = [v for v in untouched if v != X.field]
    new = {}
    inverse = {}
    dep = None
    new_field = "U" if X.field != "U" else "V"
    for kind, e, v in inv:
        if kind == "keep":
            continue
        if kind == "field":
            # invariant field * pivot^k = U  =>  field = U * pivot^-k
            dep = Expr.atom(A.field(new_field)) * Expr.atom(A.field(X.field)) / e
            continue
        nm = next(greek)
        new[nm] = e
        inverse[v] = _solve_linear_or_monomial(e, A.coord(v), Expr.atom(A.coord(nm)))
    if X.field in untouched:
        dep = Expr.atom(A.field(new_field))
    if dep is None:
        dep = Expr.atom(A.field(new_field))
    chart = tuple(c for c in X.coords if c in keep) + tuple(new)
    vm = VariableMap(X.coords, tuple(keep), new, inverse, X.field, new_field, dep, name, chart)
    return vm


def _solve_linear_or_monomial(e: Expr, var, value: Expr) -> Expr:
    """Solve e(var) = value for var when e is var^1 * rest or var + rest."""
    c = diff(e, var)
    if not c.is_zero() and not (var in c.atoms()):
        return (value - (e - c * Expr.atom(var))) / c
    rest = e / Expr.atom(var)
    if var not in rest.atoms():
        return value / rest
    raise ReductionError(f"cannot solve {e} for {A.atom_text(var)}")


_TMP = "__new"


def _chart_jets(vm: VariableMap, field_name: str, order: int) -> dict:
    """Old jet atoms up to ``order`` as expressions in the chart."""
    old = vm.old_coords
    keep = set(vm.keep)
    coeff = {}
    inv = {A.coord(c): e for c, e in vm.inverse.items()}
    for c in old:
        row = {}
        for n in vm.chart:
            expr = Expr.atom(A.coord(n)) if n in keep else vm.new[n]
            d = diff(expr, A.coord(c))
            if not d.is_zero():
                row[n] = substitute(d, inv)
        coeff[c] = row
    eliminated = set(vm.eliminated)
    dep = substitute(vm.dep, {A.field(vm.new_field): Expr.atom(A.field(_TMP))}) \
        if vm.new_field != _TMP else vm.dep
    dep = substitute(dep, inv)
    table = {(): dep}

    def D(F: Expr, c: str) -> Expr:
        parts = []
        if c in eliminated:
            parts.append(diff(F, A.coord(c)))
        for n, k in coeff[c].items():
            parts.append(k * total_derivative(F, n))
        return esum(parts)

    def get(J: tuple) -> Expr:
        if J not in table:
            table[J] = D(get(J[:-1]), J[-1])
        return table[J]

    return get


def change_variables(pde: Pde, vm: VariableMap, seed: int = 0) -> Pde:
    """Chain-rule pullback of Delta into the chart of ``vm``."""
    if not vm.checked and not vm.round_trip(seed):
        raise ReductionError("variable map does not round-trip")
    delta = pde.delta
    for a in delta.atoms():
        if a.kind in (A.UFUNC, A.SPOW) and a.depends_on_field():
            raise ReductionError(f"cannot pull back {A.atom_text(a)} through a change of field")
    get = _chart_jets(vm, pde.field, delta.order())
    bind = {}
    for a in delta.atoms():
        if a.kind == A.JET and a.name == pde.field:
            bind[a] = get(a.derivs)
        elif a.kind == A.COORD and a.name in vm.inverse:
            bind[a] = vm.inverse[a.name]
    out = substitute(delta, bind)
    if out.is_zero():
        raise ReductionError("equation vanishes identically in the new variables")
    out = clear_denominators(out)
    eliminated = {A.coord(c) for c in vm.eliminated}
    bad = [a for a in out.atoms() if a in eliminated]
    if bad:
        raise ReductionError(
            f"reduction invalid: result still depends on {', '.join(sorted(A.atom_text(a) for a in bad))}: {out}")
    out = substitute(out, {a: Expr.atom(A.jet(vm.new_field, a.derivs))
                           for a in out.atoms() if a.kind == A.JET and a.name == _TMP})
    lead = choose_leading(out, vm.chart, vm.new_field)
    return Pde.build(out, vm.chart, vm.new_field, lead, name=f"{pde.name}|{vm.name}".strip("|"))


def push_forward(X: VectorField, vm: VariableMap) -> VectorField:
    """Components of X in the chart; fails if X does not project."""
    inv = {A.coord(c): e for c, e in vm.inverse.items()}
    eliminated = {A.coord(c) for c in vm.eliminated}
    xi = {}
    for n in vm.chart:
        expr = Expr.atom(A.coord(n)) if n in vm.keep else vm.new[n]
        comp = substitute(X.act(expr), inv)
        bad = [a for a in comp.atoms() if a in eliminated]
        if bad:
            raise ReductionError(
                f"generator does not project: {n} component {comp} depends on "
                f"{', '.join(sorted(A.atom_text(a) for a in bad))}")
        xi[n] = comp
    # field: U = u / P with u = P*U
    new_u = Expr.atom(A.field(vm.new_field))
    P = vm.dep / new_u
    if any(a.kind == A.JET for a in P.atoms()):
        raise ReductionError("dependent substitution must be u = P*U")
    P = substitute(P, {A.coord(n): e for n, e in vm.new.items()})
    old_u = Expr.atom(A.field(X.field))
    U_old = old_u / P
    comp = X.act(U_old)
    tmp_dep = substitute(vm.dep, {A.field(vm.new_field): Expr.atom(A.field(_TMP))})
    comp = substitute(comp, {A.field(X.field): tmp_dep})
    comp = substitute(comp, inv)
    comp = substitute(comp, {A.field(_TMP): new_u})
    bad = [a for a in comp.atoms() if a in eliminated]
    if bad:
        raise ReductionError(f"generator does not project: field component {comp}")
    return VectorField(vm.chart, xi, comp, vm.new_field, X.name)
