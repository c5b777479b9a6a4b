"""Jet-space calculus: total derivatives, on-shell reduction, Euler operator."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field as dc_field

from .kernel import atoms as A
from .kernel.expr import (
    ONE_EXPR,
    ZERO_EXPR,
    Expr,
    KernelError,
    coefficient_of,
    diff,
    substitute,
    total_derivative,
)

__all__ = [
    "JetError",
    "Pde",
    "SideRelation",
    "total_derivative",
    "total_derivative_multi",
    "on_shell_reduce",
    "euler_operator",
    "choose_leading",
]

_MAX_DEPTH = 200


class JetError(KernelError):
    pass


def total_derivative_multi(e: Expr, coords) -> Expr:
    for c in coords:
        e = total_derivative(e, c)
    return e


def _multiset_minus(big, small):
    """``big - small`` as multisets, or None when ``small`` is not contained."""
    cb = Counter(big)
    cb.subtract(Counter(small))
    if any(v < 0 for v in cb.values()):
        return None
    return tuple(sorted(cb.elements()))


@dataclass(frozen=True)
class SideRelation:
    """Constraint on an uninterpreted function, solved for ``leading``."""

    expr: Expr
    leading: A.Atom
    rhs: Expr


def _solve_for(expr: Expr, lead: A.Atom, what: str):
    c, rest, linear = coefficient_of(expr, lead)
    if c.is_zero():
        raise JetError(f"{A.atom_text(lead)} does not occur in the {what}")
    if not linear:
        raise JetError(f"the {what} is not linear in {A.atom_text(lead)}")
    if c.jet_atoms():
        raise JetError(f"the coefficient of {A.atom_text(lead)} depends on jet variables")
    rhs = -rest / c
    return c, rhs


def _rank(atom: A.Atom, coords) -> tuple:
    idx = tuple(sorted((coords.index(d) for d in atom.derivs), reverse=True))
    return (len(atom.derivs), idx)


def choose_leading(delta: Expr, coords, field_name: str = "u") -> A.Atom:
    """Mixed derivative with constant coefficient if any, else the highest
    ranked derivative occurring linearly with a jet-free coefficient."""
    cands = []
    for a in sorted(delta.jet_atoms()):
        if a.name != field_name or not a.derivs:
            continue
        c, _rest, linear = coefficient_of(delta, a)
        if not linear or c.is_zero() or c.jet_atoms():
            continue
        cands.append((a, c))
    if not cands:
        raise JetError("no derivative occurs linearly with a jet-free coefficient")
    top = max(len(a.derivs) for a, _ in cands)
    mixed = [a for a, c in cands
             if len(a.derivs) == top and len(set(a.derivs)) > 1 and c.is_constant()]
    if mixed:
        return max(mixed, key=lambda a: _rank(a, list(coords)))
    return max((a for a, _ in cands), key=lambda a: _rank(a, list(coords)))


def _side_leading(expr: Expr) -> A.Atom:
    cands = []
    for a in sorted(expr.atoms()):
        if a.kind != A.UFUNC or not a.derivs:
            continue
        c, _rest, linear = coefficient_of(expr, a)
        if linear and not c.is_zero() and not any(x.kind == A.UFUNC for x in c.atoms()):
            cands.append(a)
    if not cands:
        raise JetError("side relation has no solvable function derivative")
    return max(cands, key=lambda a: (len(a.derivs), a.derivs))


@dataclass(eq=False)
class Pde:
    """An equation ``delta = 0`` solved for a leading derivative."""

    delta: Expr
    leading: A.Atom
    solved_rhs: Expr
    coords: tuple
    field: str = "u"
    coefficient: Expr = ONE_EXPR
    sides: tuple = ()
    name: str = ""
    _memo: dict = dc_field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, delta: Expr, coords, field: str = "u", leading: A.Atom | None = None,
              sides=(), side_leadings=(), name: str = "") -> "Pde":
        coords = tuple(coords)
        if leading is None:
            leading = choose_leading(delta, coords, field)
        c, rhs = _solve_for(delta, leading, "equation")
        for a in rhs.jet_atoms():
            if a.name == leading.name and _multiset_minus(a.derivs, leading.derivs) is not None:
                raise JetError("solved right-hand side contains a derivative of the leading atom")
        rels = []
        side_leadings = list(side_leadings)
        for i, s in enumerate(sides):
            lead = side_leadings[i] if i < len(side_leadings) and side_leadings[i] is not None \
                else _side_leading(s)
            _c, srhs = _solve_for(s, lead, "side relation")
            rels.append(SideRelation(s, lead, srhs))
        return cls(delta, leading, rhs, coords, field, c, tuple(rels), name)

    @property
    def order(self) -> int:
        return self.delta.order()

    def check(self) -> bool:
        """``delta == c*(leading - solved_rhs)``."""
        return (self.coefficient * (Expr.atom(self.leading) - self.solved_rhs)).equals(self.delta)

    def with_delta(self, delta: Expr, **kw) -> "Pde":
        return Pde.build(delta, self.coords, self.field, kw.get("leading"), name=kw.get("name", self.name))

    # -- on-shell reduction ---------------------------------------------
    def _reducer(self, a: A.Atom):
        """(base atom, remaining derivative multiset, base value) or None."""
        if a.kind == A.JET and a.name == self.leading.name:
            k = _multiset_minus(a.derivs, self.leading.derivs)
            if k is not None:
                return self.leading, k, self.solved_rhs
        if a.kind == A.UFUNC:
            for s in self.sides:
                lead = s.leading
                if a.name == lead.name and a.args == lead.args:
                    k = _multiset_minus(a.derivs, lead.derivs)
                    if k is not None:
                        return lead, k, s.rhs
        return None

    def reducible(self, a: A.Atom) -> bool:
        return self._reducer(a) is not None

    def reduced_atom(self, a: A.Atom, depth: int = 0) -> Expr | None:
        memo = self._memo
        if a in memo:
            return memo[a]
        if depth > _MAX_DEPTH:
            raise JetError("on-shell reduction does not terminate (ranking cycle)")
        r = self._reducer(a)
        if r is None:
            return None
        base, k, value = r
        if k:
            # peel one derivative: a = D_c(b) with b one step closer to base
            c = k[-1]
            b = A.with_derivs(base, k[:-1])
            bv = self.reduced_atom(b, depth + 1)
            inner = bv if bv is not None else Expr.atom(b)
            value = total_derivative(inner, c)
        out = self._reduce(value, depth + 1)
        memo[a] = out
        return out

    def _reduce(self, e: Expr, depth: int = 0) -> Expr:
        bind = {}
        for a in e.atoms():
            if self.reducible(a):
                bind[a] = self.reduced_atom(a, depth)
        if not bind:
            return e
        return substitute(e, bind)

    def reduce(self, e: Expr) -> Expr:
        return self._reduce(e)


def on_shell_reduce(e: Expr, pde: Pde) -> Expr:
    """Eliminate the leading derivative and its consequences (and side
    relation leaders) from ``e``."""
    return pde.reduce(e)


def _field_jets(e: Expr, field_name: str) -> set:
    out = {A.field(field_name)}
    for a in e.atoms():
        if a.kind == A.JET and a.name == field_name:
            out.add(a)
    return out


def euler_operator(e: Expr, field_name: str = "u", max_order: int | None = None) -> Expr:
    """Variational derivative E_u[e] = sum_J (-D)_J de/du_J."""
    order = e.order()
    if max_order is not None and max_order < order:
        raise JetError(f"max_order {max_order} is below the order {order} of the expression")
    terms = []
    for a in sorted(_field_jets(e, field_name)):
        part = diff(e, a)
        if part.is_zero():
            continue
        for c in a.derivs:
            part = -total_derivative(part, c)
        terms.append(part)
    out = ZERO_EXPR
    for t in terms:
        out = out + t
    return out
