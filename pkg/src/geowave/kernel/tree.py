"""Raw expression trees and their normalization into :class:`Expr`.

The parser produces trees; :func:`normalize` resolves names against a
:class:`Scope` and builds the canonical form.  Trees are also evaluated
directly by the numeric oracle, which gives an evaluation route that does not
pass through the kernel's simplifier.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from ..scalars import ONE, QdScalar, get_radical, sqrt_rational
from . import atoms as A
from .expr import Expr, KernelError, diff


@dataclass(frozen=True)
class Num:
    value: QdScalar
    pos: int = 0


@dataclass(frozen=True)
class Name:
    name: str
    pos: int = 0


@dataclass(frozen=True)
class JetRef:
    field: str
    derivs: tuple
    pos: int = 0


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    pos: int = 0


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    pos: int = 0


@dataclass(frozen=True)
class Neg:
    operand: object
    pos: int = 0


@dataclass
class Scope:
    """Declared names an expression may reference."""

    coords: list = dc_field(default_factory=list)
    angular: set = dc_field(default_factory=set)
    params: list = dc_field(default_factory=list)
    fields: list = dc_field(default_factory=lambda: ["u"])
    functions: dict = dc_field(default_factory=dict)  # name -> tuple of arg names

    def atom_for(self, name: str) -> A.Atom | None:
        if name in self.coords:
            return A.coord(name)
        if name in self.params:
            return A.param(name)
        if name in self.fields:
            return A.field(name)
        return None

    def function_atom(self, name: str) -> A.Atom:
        argn = self.functions[name]
        return A.ufunc(name, tuple(self.atom_for(a) for a in argn))

    def copy(self) -> "Scope":
        return Scope(list(self.coords), set(self.angular), list(self.params),
                     list(self.fields), dict(self.functions))


class NormalizeError(KernelError):
    def __init__(self, msg: str, pos: int = 0):
        super().__init__(f"{msg} (column {pos + 1})")
        self.msg = msg
        self.pos = pos


BUILTINS = ("sin", "cos", "sqrt", "Diff")
HALF = ONE / 2


def normalize(tree, scope: Scope) -> Expr:
    """Build the canonical form of a raw tree."""
    if isinstance(tree, Expr):
        return tree
    if isinstance(tree, Num):
        return Expr.const(tree.value)
    if isinstance(tree, Name):
        a = scope.atom_for(tree.name)
        if a is None:
            if tree.name in scope.functions:
                raise NormalizeError(f"function {tree.name!r} used without arguments", tree.pos)
            raise NormalizeError(f"undeclared identifier {tree.name!r}", tree.pos)
        return Expr.atom(a)
    if isinstance(tree, JetRef):
        if tree.field not in scope.fields:
            raise NormalizeError(f"{tree.field!r} is not a declared field", tree.pos)
        for d in tree.derivs:
            if d not in scope.coords:
                raise NormalizeError(f"malformed jet suffix: {d!r} is not a coordinate", tree.pos)
        return Expr.atom(A.jet(tree.field, tree.derivs))
    if isinstance(tree, Neg):
        return -normalize(tree.operand, scope)
    if isinstance(tree, BinOp):
        if tree.op == "^":
            return _power(tree, scope)
        left = normalize(tree.left, scope)
        right = normalize(tree.right, scope)
        if tree.op == "+":
            return left + right
        if tree.op == "-":
            return left - right
        if tree.op == "*":
            return left * right
        if tree.op == "/":
            if right.is_zero():
                raise NormalizeError("division by zero", tree.pos)
            return left / right
        raise NormalizeError(f"unknown operator {tree.op!r}", tree.pos)
    if isinstance(tree, Call):
        return _call(tree, scope)
    raise KernelError(f"cannot normalize {tree!r}")


def _power(tree: BinOp, scope: Scope) -> Expr:
    base = normalize(tree.left, scope)
    expo = normalize(tree.right, scope)
    if expo.is_constant():
        try:
            return base ** expo.constant_value()
        except KernelError as exc:
            raise NormalizeError(str(exc), tree.pos) from None
    # symbolic exponent c0 + k*p with one parameter p and integer k
    if expo.den:
        raise NormalizeError("exponent must be constant or linear in one parameter", tree.pos)
    const = QdScalar(0)
    sym = None
    k = None
    for m, c in expo.num.items():
        if not m:
            const = c
        elif len(m) == 1 and m[0][0].kind == A.PARAM and m[0][1].is_one() and sym is None:
            sym, k = m[0][0], c
        else:
            raise NormalizeError("exponent must be constant or linear in one parameter", tree.pos)
    if not k.is_integer():
        raise NormalizeError("symbolic exponent coefficient must be an integer", tree.pos)
    if base.den or len(base.num) != 1:
        raise NormalizeError("symbolic powers need a single atom base", tree.pos)
    (m, c), = base.num.items()
    if not c.is_one() or len(m) != 1 or not m[0][1].is_one():
        raise NormalizeError("symbolic powers need a single atom base", tree.pos)
    atom = m[0][0]
    if atom.kind not in (A.COORD, A.JET) or (atom.kind == A.JET and atom.derivs):
        raise NormalizeError("symbolic powers need a coordinate or field base", tree.pos)
    sp = Expr.atom(A.spow(atom, sym), k)
    if const:
        sp = sp * (base ** const)
    return sp


def _call(tree: Call, scope: Scope) -> Expr:
    name = tree.name
    if name in ("sin", "cos"):
        if len(tree.args) != 1 or not isinstance(tree.args[0], Name):
            raise NormalizeError(f"{name} needs a single angular coordinate argument", tree.pos)
        th = tree.args[0].name
        if th not in scope.angular:
            raise NormalizeError(f"{name} of non-angular argument {th!r} is unsupported", tree.pos)
        return Expr.atom(A.sin_atom(th) if name == "sin" else A.cos_atom(th))
    if name == "sqrt":
        if len(tree.args) != 1:
            raise NormalizeError("sqrt takes one argument", tree.pos)
        arg = tree.args[0]
        if isinstance(arg, Num) and arg.value.is_integer():
            n = int(arg.value)
            d = get_radical()
            r = sqrt_rational(n)
            if r is None:
                raise NormalizeError(
                    f"sqrt({n}) is outside Q(sqrt({d})); one radical per session", tree.pos)
            return Expr.const(r)
        inner = normalize(arg, scope)
        try:
            return inner ** HALF
        except KernelError as exc:
            raise NormalizeError(str(exc), tree.pos) from None
    if name == "Diff":
        if len(tree.args) < 2:
            raise NormalizeError("Diff needs a target and at least one variable", tree.pos)
        target = tree.args[0]
        vars_ = []
        for v in tree.args[1:]:
            if not isinstance(v, Name):
                raise NormalizeError("Diff variables must be names", tree.pos)
            vars_.append(v.name)
        if isinstance(target, Name) and target.name in scope.fields:
            for v in vars_:
                if v not in scope.coords:
                    raise NormalizeError(f"{v!r} is not a coordinate", tree.pos)
            return Expr.atom(A.jet(target.name, vars_))
        inner = normalize(target, scope)
        for v in vars_:
            a = scope.atom_for(v)
            if a is None:
                raise NormalizeError(f"undeclared identifier {v!r}", tree.pos)
            inner = diff(inner, a)
        return inner
    if name in scope.functions:
        argn = scope.functions[name]
        got = []
        for a in tree.args:
            if not isinstance(a, Name):
                raise NormalizeError(f"arguments of {name} must be variable names", tree.pos)
            got.append(a.name)
        if tuple(got) != tuple(argn):
            raise NormalizeError(
                f"{name} declared with arguments ({', '.join(argn)}), called with ({', '.join(got)})",
                tree.pos)
        return Expr.atom(scope.function_atom(name))
    raise NormalizeError(f"undeclared function {name!r}", tree.pos)
