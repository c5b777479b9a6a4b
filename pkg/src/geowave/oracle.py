"""High-precision numeric zero testing.

Every atom of an expression is replaced by a random number and the result is
evaluated with mpmath at the requested precision.  A nonzero symbolic
residual is only reported as a genuine failure once a sample point confirms
it numerically; a symbolic zero must evaluate to zero everywhere.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .kernel import atoms as A
from .kernel import tree as T
from .kernel.expr import Expr
from .scalars import QdScalar, get_radical

__all__ = [
    "OracleError",
    "SamplePoint",
    "Verdict",
    "sample_point",
    "num_eval",
    "tree_eval",
    "probably_zero",
    "confirm_nonzero",
]

DEFAULT_TRIALS = 5
DEFAULT_DIGITS = 50
_MAX_RESAMPLE = 50
_DEN = 1000


class OracleError(ValueError):
    """Unassigned atom or evaluation on an excluded locus."""


@dataclass
class SamplePoint:
    """Numbers for atoms; angles drive sin/cos of angular coordinates."""

    values: dict  # Atom -> Fraction
    angles: dict  # theta name -> Fraction
    seed: int | None = None
    trial: int = 0

    def describe(self) -> dict:
        out = {A.atom_text(a): _frac_text(v) for a, v in sorted(self.values.items())}
        return out


def _frac_text(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


@dataclass
class Verdict:
    """Outcome of a check: pass/fail, symbolic residual, optional witness."""

    holds: bool
    residual: Expr | None = None
    method: str = "symbolic"
    witness: list = field(default_factory=list)  # [{"point": {...}, "value": "..."}]
    name: str = ""
    detail: dict = field(default_factory=dict)
    confirmed: bool | None = None

    def __bool__(self) -> bool:
        return self.holds


def _rand_frac(rng: random.Random, lo, hi) -> Fraction:
    return Fraction(rng.randint(int(lo * _DEN), int(hi * _DEN)), _DEN)


def _eval_atoms(atoms) -> list:
    """Atoms that need a sampled value (sin/cos/symbolic powers are derived)."""
    out = set()
    for a in atoms:
        if a.kind in (A.SIN, A.COS):
            out.add(A.coord(a.name))
        elif a.kind == A.SPOW:
            out.update(_eval_atoms(a.args))
        elif a.kind == A.UFUNC:
            out.add(a)
            out.update(_eval_atoms(a.args))
        else:
            out.add(a)
    return sorted(out)


def sample_point(atoms, rng: random.Random, angular=(), seed=None, trial=0) -> SamplePoint:
    values = {}
    angles = {}
    for a in _eval_atoms(atoms):
        if a.kind in (A.COORD, A.PARAM):
            values[a] = _rand_frac(rng, Fraction(1, 2), Fraction(5, 2))
        else:
            values[a] = _rand_frac(rng, -2, 2)
    for a in atoms:
        if a.kind in (A.SIN, A.COS):
            angles[a.name] = values[A.coord(a.name)]
    for th in angular:
        c = A.coord(th)
        if c in values:
            angles[th] = values[c]
    return SamplePoint(values, angles, seed, trial)


def _qd_num(x: QdScalar):
    return mpmath.mpf(x.a.numerator) / x.a.denominator + (
        mpmath.mpf(x.b.numerator) / x.b.denominator) * mpmath.sqrt(get_radical())


def _atom_value(a, p: SamplePoint):
    if a.kind == A.SIN:
        return mpmath.sin(_frac_num(p.angles[a.name]))
    if a.kind == A.COS:
        return mpmath.cos(_frac_num(p.angles[a.name]))
    if a.kind == A.SPOW:
        base, par = a.args
        return mpmath.power(_atom_value(base, p), _atom_value(par, p))
    try:
        return _frac_num(p.values[a])
    except KeyError:
        raise OracleError(f"unassigned atom {A.atom_text(a)}") from None


def _frac_num(v: Fraction):
    return mpmath.mpf(v.numerator) / v.denominator


def _poly_eval(poly: dict, p: SamplePoint, cache: dict):
    total = mpmath.mpf(0)
    for m, c in poly.items():
        term = _qd_num(c)
        for a, e in m:
            v = cache.get(a)
            if v is None:
                v = cache[a] = _atom_value(a, p)
            if e.is_integer():
                term *= v ** int(e)
            else:
                term *= mpmath.power(v, _qd_num(e))
        total += term
    return total


def num_eval(e: Expr, p: SamplePoint, digits: int = DEFAULT_DIGITS):
    """Evaluate ``e`` at ``p`` with ``digits`` decimal digits."""
    with mpmath.workdps(digits + 10):
        cache: dict = {}
        num = _poly_eval(e.num, p, cache)
        den = mpmath.mpf(1)
        tiny = mpmath.mpf(10) ** (-(digits // 2))
        for fp, k in e.den:
            v = _poly_eval(dict(fp), p, cache)
            if abs(v) < tiny:
                raise OracleError("sample on an excluded locus (vanishing denominator)")
            den *= v ** k
        out = num / den
        return +out


def tree_eval(tree, scope: T.Scope, p: SamplePoint, digits: int = DEFAULT_DIGITS):
    """Evaluate a raw parse tree directly, bypassing normalization."""
    with mpmath.workdps(digits + 10):
        return +_tree(tree, scope, p)


def _tree(node, scope, p):
    if isinstance(node, T.Num):
        return _qd_num(node.value)
    if isinstance(node, T.Name):
        a = scope.atom_for(node.name)
        if a is None:
            raise OracleError(f"undeclared {node.name!r}")
        return _atom_value(a, p)
    if isinstance(node, T.JetRef):
        return _atom_value(A.jet(node.field, node.derivs), p)
    if isinstance(node, T.Neg):
        return -_tree(node.operand, scope, p)
    if isinstance(node, T.BinOp):
        x = _tree(node.left, scope, p)
        y = _tree(node.right, scope, p)
        if node.op == "+":
            return x + y
        if node.op == "-":
            return x - y
        if node.op == "*":
            return x * y
        if node.op == "/":
            return x / y
        return mpmath.power(x, y)
    if isinstance(node, T.Call):
        if node.name == "sin":
            return mpmath.sin(_frac_num(p.angles[node.args[0].name]))
        if node.name == "cos":
            return mpmath.cos(_frac_num(p.angles[node.args[0].name]))
        if node.name == "sqrt":
            return mpmath.sqrt(_tree(node.args[0], scope, p))
        if node.name in scope.functions:
            return _atom_value(scope.function_atom(node.name), p)
        raise OracleError(f"cannot evaluate call {node.name!r} directly")
    raise OracleError(f"cannot evaluate {node!r}")


def _points(e: Expr, trials: int, seed: int, digits: int, angular=()):
    """Yield (point, value) pairs, resampling off excluded loci."""
    rng = random.Random(seed)
    atoms = e.atoms()
    for trial in range(trials):
        for _ in range(_MAX_RESAMPLE):
            p = sample_point(atoms, rng, angular, seed, trial)
            try:
                v = num_eval(e, p, digits)
            except (OracleError, ZeroDivisionError):
                continue
            yield p, v
            break
        else:
            raise OracleError("could not find a sample point off the excluded loci")


def _value_text(v) -> str:
    return mpmath.nstr(v, 12)


def probably_zero(e: Expr, trials: int = DEFAULT_TRIALS, digits: int = DEFAULT_DIGITS,
                  seed: int = 0) -> Verdict:
    """True iff |e| < 10^(20-digits) at every trial point."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    thresh = mpmath.mpf(10) ** (20 - digits)
    witness = []
    holds = True
    for p, v in _points(e, trials, seed, digits):
        ok = abs(v) < thresh
        witness.append({"point": p.describe(), "value": _value_text(v), "zero": bool(ok)})
        holds = holds and ok
    return Verdict(holds, e, "numeric", witness)


def confirm_nonzero(e: Expr, trials: int = DEFAULT_TRIALS, digits: int = DEFAULT_DIGITS,
                    seed: int = 0) -> Verdict:
    """Numeric confirmation that a symbolically nonzero residual is nonzero."""
    v = probably_zero(e, trials, digits, seed)
    return Verdict(not v.holds, e, "numeric", v.witness)
