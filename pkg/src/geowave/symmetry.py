"""Point vector fields, prolongation, symmetry checks and determining systems."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .jet import Pde, _multiset_minus, total_derivative
from .kernel import atoms as A
from .kernel.expr import (
    ONE_EXPR,
    ZERO_EXPR,
    Expr,
    KernelError,
    coefficients,
    diff,
    esum,
    mono_expr,
    substitute,
)
from .scalars import ONE
from .oracle import DEFAULT_DIGITS, DEFAULT_TRIALS, Verdict, confirm_nonzero

__all__ = [
    "SymmetryError",
    "VectorField",
    "ProlongedField",
    "DeterminingSystem",
    "prolong",
    "apply",
    "check_symmetry",
    "commutator",
    "determining_system",
    "compact_text",
    "ansatz",
    "gauge_ansatz",
    "divergence",
    "noether_residual",
]


class SymmetryError(KernelError):
    pass


@dataclass
class VectorField:
    """X = sum xi^i d/dx^i + phi d/du on (coordinates, u)."""

    coords: tuple
    xi: dict
    phi: Expr = ZERO_EXPR
    field: str = "u"
    name: str = ""

    def __post_init__(self):
        self.coords = tuple(self.coords)
        xi = {}
        for c in self.coords:
            v = self.xi.get(c, ZERO_EXPR)
            xi[c] = v if isinstance(v, Expr) else Expr.const(v)
        extra = set(self.xi) - set(self.coords)
        if extra:
            raise SymmetryError(f"components for undeclared coordinates: {sorted(extra)}")
        self.xi = xi
        if not isinstance(self.phi, Expr):
            self.phi = Expr.const(self.phi)
        for comp in list(xi.values()) + [self.phi]:
            for a in comp.atoms():
                if a.kind == A.JET and (a.derivs or a.name != self.field):
                    raise SymmetryError(
                        f"component depends on the jet variable {A.atom_text(a)}")

    def components(self) -> list:
        return [self.xi[c] for c in self.coords] + [self.phi]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components())

    def act(self, f: Expr) -> Expr:
        """X(f) for f on (coordinates, u)."""
        out = []
        for c in self.coords:
            if not self.xi[c].is_zero():
                out.append(self.xi[c] * diff(f, A.coord(c)))
        if not self.phi.is_zero():
            out.append(self.phi * diff(f, A.field(self.field)))
        return esum(out)

    def characteristic(self) -> Expr:
        """W = phi - xi^j u_j."""
        parts = [self.phi]
        for c in self.coords:
            if not self.xi[c].is_zero():
                parts.append(-self.xi[c] * Expr.atom(A.jet(self.field, (c,))))
        return esum(parts)

    def map(self, fn) -> "VectorField":
        return VectorField(self.coords, {c: fn(v) for c, v in self.xi.items()}, fn(self.phi),
                           self.field, self.name)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.coords, {c: self.xi[c] + other.xi[c] for c in self.coords},
                           self.phi + other.phi, self.field)

    def scaled(self, k) -> "VectorField":
        k = k if isinstance(k, Expr) else Expr.const(k)
        return self.map(lambda v: k * v)

    def equals(self, other: "VectorField") -> bool:
        return all(a.equals(b) for a, b in zip(self.components(), other.components()))

    def text(self) -> str:
        parts = []
        for c in self.coords:
            if not self.xi[c].is_zero():
                parts.append(f"({self.xi[c]})*D{c}")
        if not self.phi.is_zero():
            parts.append(f"({self.phi})*D{self.field}")
        return " + ".join(parts) or "0"


class ProlongedField:
    """Prolongation of a point field; zeta_J computed lazily and cached.

    zeta_J = D_J W + xi^j u_{Jj} with W the characteristic.
    """

    def __init__(self, base: VectorField, order: int):
        if order < 0:
            raise SymmetryError("prolongation order must be >= 0")
        self.base = base
        self.order = order
        self._w = base.characteristic()
        self._dw = {(): self._w}

    def _dW(self, J: tuple) -> Expr:
        if J in self._dw:
            return self._dw[J]
        v = total_derivative(self._dW(J[:-1]), J[-1])
        self._dw[J] = v
        return v

    def zeta(self, derivs) -> Expr:
        J = tuple(sorted(derivs))
        if len(J) > self.order:
            raise SymmetryError(f"prolongation of order {self.order} has no coefficient for order {len(J)}")
        X = self.base
        out = [self._dW(J)]
        for c in X.coords:
            if not X.xi[c].is_zero():
                out.append(X.xi[c] * Expr.atom(A.jet(X.field, J + (c,))))
        return esum(out)

    @property
    def zeta1(self) -> dict:
        return {c: self.zeta((c,)) for c in self.base.coords}

    @property
    def zeta2(self) -> dict:
        cs = self.base.coords
        return {(a, b): self.zeta((a, b)) for i, a in enumerate(cs) for b in cs[i:]}


def prolong(X: VectorField, order: int = 2) -> ProlongedField:
    return ProlongedField(X, order)


def apply(Xpr: ProlongedField, e: Expr) -> Expr:
    """sum xi^i de/dx^i + phi de/du + sum_J zeta_J de/du_J."""
    X = Xpr.base
    if e.order() > Xpr.order:
        raise SymmetryError(f"expression of order {e.order()} needs a prolongation of that order, "
                            f"have {Xpr.order}")
    out = [X.act(e)]
    for a in sorted(e.atoms()):
        if a.kind == A.JET and a.name == X.field and a.derivs:
            de = diff(e, a)
            if not de.is_zero():
                out.append(Xpr.zeta(a.derivs) * de)
    return esum(out)


def _confirmed(v: Verdict, residual: Expr, trials, digits, seed) -> Verdict:
    """Attach an oracle witness to a symbolically nonzero residual."""
    c = confirm_nonzero(residual, trials, digits, seed)
    v.witness = c.witness
    v.confirmed = c.holds
    v.method = "symbolic+numeric"
    return v


def check_symmetry(X: VectorField, pde: Pde, trials: int = DEFAULT_TRIALS,
                   digits: int = DEFAULT_DIGITS, seed: int = 0) -> Verdict:
    """On-shell invariance pr X(Delta) = 0 modulo Delta = 0."""
    raw = apply(prolong(X, max(pde.order, 1)), pde.delta)
    res = pde.reduce(raw)
    v = Verdict(res.is_zero(), res, "symbolic", name=X.name)
    if not v.holds:
        _confirmed(v, res, trials, digits, seed)
    return v


def commutator(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y]^i = X(Y^i) - Y(X^i)."""
    if X.coords != Y.coords or X.field != Y.field:
        raise SymmetryError("vector fields live on different spaces")
    xi = {c: X.act(Y.xi[c]) - Y.act(X.xi[c]) for c in X.coords}
    return VectorField(X.coords, xi, X.act(Y.phi) - Y.act(X.phi), X.field)


# -- determining systems -------------------------------------------------

_GREEK = {"x": "xi", "y": "eta", "z": "gamma", "t": "tau"}


def ansatz(coords, field_name: str = "u") -> VectorField:
    """Generic point field with components uninterpreted in (coordinates, u)."""
    args = tuple(A.coord(c) for c in coords) + (A.field(field_name),)
    names = [_GREEK.get(c, f"xi{c}") for c in coords]
    if len(set(names)) != len(names):
        names = [f"xi{c}" for c in coords]
    xi = {c: Expr.atom(A.ufunc(n, args)) for c, n in zip(coords, names)}
    pname = "psi" if "phi" in coords else "phi"
    return VectorField(coords, xi, Expr.atom(A.ufunc(pname, args)), field_name, "ansatz")


def gauge_ansatz(coords, field_name: str = "u") -> dict:
    args = tuple(A.coord(c) for c in coords) + (A.field(field_name),)
    return {c: Expr.atom(A.ufunc(f"f{i + 1}", args)) for i, c in enumerate(coords)}


def _is_sep(a) -> bool:
    return a.kind == A.JET and bool(a.derivs)


@dataclass
class DeterminingSystem:
    """Residual separated by monomials in the derivative atoms.

    ``conditions`` holds the triangular reading of the rows: walking the
    rows in graded-lex order over the coordinates, unknown derivatives shown
    to vanish by earlier rows are set to zero, and a row that becomes a
    single unknown times a non-constant known factor is shown as that unknown.
    """

    rows: dict  # monomial -> Expr
    residual: Expr
    mode: str
    unknowns: tuple = ()
    coords: tuple = ()
    conditions: dict = dc_field(default_factory=dict)

    def _atom_key(self, a):
        idx = {c: i for i, c in enumerate(self.coords)}
        return (len(a.derivs), [idx.get(d, len(idx)) for d in a.derivs])

    def monomial_text(self, m) -> str:
        if not m:
            return "1"
        return " ".join(str(mono_expr(((a, e),))) for a, e in sorted(m, key=lambda ae: self._atom_key(ae[0])))

    def _key(self, m):
        exps = sorted(((a, int(e)) for a, e in m), key=lambda ae: self._atom_key(ae[0]))
        return (-sum(e for _, e in exps), [(self._atom_key(a), -e) for a, e in exps])

    def sorted_rows(self, simplified: bool = False) -> list:
        rows = self.conditions if simplified else self.rows
        return sorted(rows.items(), key=lambda kv: self._key(kv[0]))

    def row(self, monomial_text: str, simplified: bool = False) -> Expr | None:
        rows = self.conditions if simplified else self.rows
        want = monomial_text.replace("*", " ").split()
        for m, v in rows.items():
            if sorted(self.monomial_text(m).split()) == sorted(want):
                return v
        return None

    def reconstruct(self) -> Expr:
        return esum(mono_expr(m) * v for m, v in self.rows.items())

    def table(self, simplified: bool = True) -> list[str]:
        return [f"{self.monomial_text(m)} : {compact_text(v, self.unknowns)}"
                for m, v in self.sorted_rows(simplified)]


_SYMBOLS = {"xi": "ξ", "eta": "η", "gamma": "γ", "tau": "τ", "phi": "φ", "psi": "ψ"}


def compact_text(e: Expr, unknowns=()) -> str:
    """Render unknown functions as name_derivs, e.g. Diff(eta(x,u),u) -> η_u."""
    import re

    names = "|".join(sorted(unknowns, key=len, reverse=True)) or r"(?!)"
    text = re.sub(rf"Diff\(({names})\([\w,]*\),([\w,]+)\)",
                  lambda mt: f"{_SYMBOLS.get(mt.group(1), mt.group(1))}_{mt.group(2).replace(',', '')}", str(e))
    return re.sub(rf"\b({names})\([\w,]*\)", lambda mt: _SYMBOLS.get(mt.group(1), mt.group(1)), text)


def _mono_degree(m) -> int:
    return sum(int(e) for _, e in m)


def _unknown_derivs(e: Expr, unknowns) -> list:
    return [a for a in e.atoms() if a.kind == A.UFUNC and a.name in unknowns]


def _single_unknown(v: Expr, unknowns):
    """The atom a when v = c*a with c free of unknowns, else None."""
    us = _unknown_derivs(v, unknowns)
    if len(us) != 1:
        return None
    a = us[0]
    if list(coefficients(v, lambda x: x == a)) != [((a, ONE),)]:
        return None
    return a


def _derived_from(x, zeros) -> bool:
    return any(x.name == z.name and x.args == z.args
               and _multiset_minus(x.derivs, z.derivs) is not None for z in zeros)


def _triangular(ds: DeterminingSystem) -> dict:
    zeros: set = set()
    out = {}
    for m, v in ds.sorted_rows():
        bind = {x: ZERO_EXPR for x in v.atoms()
                if x.kind == A.UFUNC and x.name in ds.unknowns and _derived_from(x, zeros)}
        w = substitute(v, bind) if bind else v
        if w.is_zero():
            continue
        a = _single_unknown(w, ds.unknowns)
        if a is not None:
            zeros.add(a)
            c = w / Expr.atom(a)
            if not c.is_constant():
                w = Expr.atom(a)
        out[m] = w
    return out


def determining_system(pde: Pde | None = None, mode: str = "lie", lagrangian: Expr | None = None,
                       coords=None, field_name: str | None = None) -> DeterminingSystem:
    """Separate the Lie (on-shell) or Noether condition of a generic point field.

    Noether mode uses XL + L*Div(xi) - Div(f) with gauge unknowns f1..fn.
    """
    if coords is None:
        if pde is None:
            raise SymmetryError("coordinates are needed")
        coords = pde.coords
    fname = field_name or (pde.field if pde is not None else "u")
    X = ansatz(coords, fname)
    unknowns = {a.name for c in X.components() for a in c.atoms() if a.kind == A.UFUNC}
    if mode == "lie":
        if pde is None:
            raise SymmetryError("lie mode needs an equation")
        res = pde.reduce(apply(prolong(X, max(pde.order, 1)), pde.delta))
    elif mode == "noether":
        if lagrangian is None:
            raise SymmetryError("noether mode needs a Lagrangian")
        f = gauge_ansatz(coords, fname)
        unknowns |= {a.name for v in f.values() for a in v.atoms() if a.kind == A.UFUNC}
        res = noether_residual(X, lagrangian, f)
    else:
        raise SymmetryError(f"unknown mode {mode!r}")
    rows = coefficients(res, _is_sep)
    rows = {m: v for m, v in rows.items() if not v.is_zero()}
    ds = DeterminingSystem(rows, res, mode, tuple(sorted(unknowns)), tuple(coords))
    ds.conditions = _triangular(ds)
    return ds


def divergence(X: VectorField) -> Expr:
    return esum(total_derivative(X.xi[c], c) for c in X.coords)


def noether_residual(X: VectorField, L: Expr, gauge: dict | None = None) -> Expr:
    """pr X(L) + L*Div(xi) - Div(f)."""
    parts = [apply(prolong(X, max(L.order(), 1)), L), L * divergence(X)]
    if gauge:
        for c, fc in gauge.items():
            parts.append(-total_derivative(fc, c))
    return esum(parts)
