"""Canonical symbolic expressions.

An :class:`Expr` is ``num / den`` where ``num`` is a generalized polynomial
(no negative ``sin`` powers) and ``den`` is a sorted tuple of
``(factor, multiplicity)`` pairs.  Each factor is a frozen polynomial in
normal form: either the single monomial ``sin(theta)`` or a polynomial with
at least two terms whose leading term (sin excluded) is exactly ``1``.
Monomial denominators are folded into ``num`` as negative exponents.

After every operation denominator factors that divide the numerator are
cancelled, so equal expressions built along different routes share one
representation in practice; zero recognition (``num == {}``) is exact.
"""

from __future__ import annotations

from functools import reduce as _reduce

from ..scalars import ONE, ZERO, QdScalar, root_rational, format_qd
from . import poly as P
from .atoms import (
    COORD,
    COS,
    JET,
    PARAM,
    SIN,
    SPOW,
    UFUNC,
    Atom,
    atom_text,
    cos_atom,
    jet,
    sin_atom,
    with_derivs,
)

# derivative relations for uninterpreted functions, e.g. h_u -> k(u)
_ALIASES: dict[tuple, "Expr"] = {}


class KernelError(ValueError):
    """Unsupported construct in the expression kernel."""


def register_alias(fname: str, derivs, target: "Expr") -> None:
    _ALIASES[(fname, tuple(sorted(derivs)))] = target


def clear_aliases() -> None:
    _ALIASES.clear()


def _sin_factor(theta: str) -> tuple:
    return ((((sin_atom(theta), ONE),), ONE),)


def _is_sin_factor(fp: tuple) -> str | None:
    if len(fp) == 1:
        m, c = fp[0]
        if len(m) == 1 and m[0][0].kind == SIN and c.is_one():
            return m[0][0].name
    return None


class Expr:
    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: dict, den: tuple = ()):
        # trusted constructor; use make() for normalization
        self.num = num
        self.den = den
        self._hash = None

    # -- constructors -----------------------------------------------------
    @staticmethod
    def const(c) -> "Expr":
        return Expr(P.const(c))

    @staticmethod
    def atom(a: Atom, e=ONE) -> "Expr":
        if not isinstance(e, QdScalar):
            e = QdScalar(e)
        if a.kind == SIN and (e.a < 0 or not e.is_integer()):
            if not e.is_integer():
                raise KernelError(f"non-integer power of {atom_text(a)}")
            return make({P.ONE_MONO: ONE}, {_sin_factor(a.name): int(-e.a)})
        return Expr(P.atom_poly(a, e))

    @staticmethod
    def from_poly(p: dict) -> "Expr":
        return make(p, {})

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def is_constant(self) -> bool:
        return not self.den and P.is_constant(self.num)

    def constant_value(self) -> QdScalar:
        if not self.is_constant():
            raise KernelError(f"{self} is not a constant")
        return self.num.get(P.ONE_MONO, ZERO)

    def atoms(self) -> set:
        s = P.atoms_of(self.num)
        for fp, _ in self.den:
            s |= P.atoms_of(dict(fp))
        return s

    def jet_atoms(self) -> set:
        return {a for a in self.atoms() if a.kind == JET}

    def order(self) -> int:
        js = self.jet_atoms()
        return max((len(a.derivs) for a in js), default=-1)

    def depends_on_field(self) -> bool:
        return any(a.depends_on_field() for a in self.atoms())

    def free_of(self, pred) -> bool:
        return not any(pred(a) for a in self.atoms())

    # -- equality ---------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, QdScalar)):
            other = Expr.const(other)
        if not isinstance(other, Expr):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((P.freeze(self.num), self.den))
        return self._hash

    def equals(self, other) -> bool:
        """Mathematical equality (exact zero test of the difference)."""
        return (self - other).is_zero()

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return esum([self, other])

    __radd__ = __add__

    def __neg__(self):
        return Expr(P.neg(self.num), self.den)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return esum([self, -other])

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return esum([other, -self])

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not self.num or not other.num:
            return ZERO_EXPR
        if not other.den and len(other.num) == 1:
            (m, c), = other.num.items()
            return make(P.mul_term(self.num, m, c), dict(self.den), cancel=bool(self.den))
        if not self.den and len(self.num) == 1:
            (m, c), = self.num.items()
            return make(P.mul_term(other.num, m, c), dict(other.den), cancel=bool(other.den))
        den = dict(self.den)
        for fp, k in other.den:
            den[fp] = den.get(fp, 0) + k
        return make(P.mul(self.num, other.num), den)

    __rmul__ = __mul__

    def inverse(self) -> "Expr":
        if not self.num:
            raise ZeroDivisionError("division by zero expression")
        num = P.const(1)
        for fp, k in self.den:
            num = P.mul(num, P.power(dict(fp), k))
        unit_m, unit_c, sins, factor = _factor_unit(self.num)
        den: dict = {}
        if factor is not None:
            den[P.freeze(factor)] = 1
        for theta, k in sins.items():
            den[_sin_factor(theta)] = den.get(_sin_factor(theta), 0) + k
        num = P.mul_term(num, P.mono_inv(unit_m), unit_c.inverse())
        return make(num, den)

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not other.den and len(other.num) == 1:
            (m, c), = other.num.items()
            if not any(a.kind == SIN for a, _ in m):
                return make(P.mul_term(self.num, P.mono_inv(m), c.inverse()),
                            dict(self.den), cancel=False)
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, e):
        if isinstance(e, Expr):
            e = e.constant_value()
        if not isinstance(e, QdScalar):
            e = QdScalar(e)
        if e.is_integer():
            k = int(e)
            if k == 0:
                return ONE_EXPR
            if k < 0:
                return self.inverse() ** (-k)
            if not self.den and len(self.num) == 1:
                (m, c), = self.num.items()
                return make({P.mono_pow(m, e): c ** k}, {}, cancel=False)
            num = P.power(self.num, k)
            den = {fp: m * k for fp, m in self.den}
            return make(num, den)
        return _generalized_power(self, e)

    # -- calculus / substitution -----------------------------------------
    def derive(self, atom_deriv) -> "Expr":
        """Apply the derivation ``atom_deriv`` (atom -> poly or None)."""
        dn = P.derive(self.num, atom_deriv)
        if not self.den:
            return make(dn, {}, cancel=False)
        den = dict(self.den)
        parts = [make(dn, den)]
        for fp, k in self.den:
            dfp = P.derive(dict(fp), atom_deriv)
            if not dfp:
                continue
            den2 = dict(den)
            den2[fp] = den2[fp] + 1
            parts.append(make(P.scale(P.mul(self.num, dfp), QdScalar(-k)), den2, cancel=False))
        return esum(parts)

    def subs(self, bindings: dict) -> "Expr":
        return substitute(self, bindings)

    # -- output -----------------------------------------------------------
    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"Expr({to_text(self)})"


def _coerce(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, QdScalar)):
        return Expr.const(x)
    try:
        from fractions import Fraction

        if isinstance(x, Fraction):
            return Expr.const(QdScalar(x))
    except ImportError:  # pragma: no cover
        pass
    return NotImplemented


ZERO_EXPR = Expr({})
ONE_EXPR = Expr({P.ONE_MONO: ONE})


# -- normalization -------------------------------------------------------

def _factor_unit(p: dict):
    """Split p = unit_c * unit_m * prod sin^k * factor.

    ``factor`` is None when p is a single term; otherwise it is the normal
    form (leading non-sin monomial 1, leading coefficient 1).
    """
    # common sin powers (each term has exponent 0 or 1)
    sins: dict = {}
    thetas = {a.name for m in p for a, _ in m if a.kind == SIN}
    for th in thetas:
        if all(any(a.kind == SIN and a.name == th for a, _ in m) for m in p):
            sins[th] = 1
    if sins:
        q = {}
        for m, c in p.items():
            q[tuple((a, e) for a, e in m if not (a.kind == SIN and a.name in sins))] = c
        p = q
    if len(p) == 1:
        (m, c), = p.items()
        return m, c, sins, None
    key = P.order_key_factory([p])
    _lm, lc = P.leading(p, key)
    unit_m = _min_monomial(p)
    inv_m = P.mono_inv(unit_m)
    inv_c = lc.inverse()
    factor = {P.mono_mul(m, inv_m): c * inv_c for m, c in p.items()}
    return unit_m, lc, sins, factor


def _min_monomial(p: dict) -> tuple:
    terms = [dict(m) for m in p]
    cands = {a for d in terms for a in d if a.kind != SIN}
    out = []
    for a in sorted(cands):
        lo = None
        for d in terms:
            x = d.get(a, ZERO)
            if lo is None or x < lo:
                lo = x
        if lo:
            out.append((a, lo))
    return tuple(out)


def make(num: dict, den: dict, cancel: bool = True) -> Expr:
    """Normalize a numerator polynomial over a factored denominator."""
    if not num:
        return ZERO_EXPR
    # negative sin powers in the numerator move to the denominator
    neg_sin = {}
    for m in num:
        for a, e in m:
            if a.kind == SIN and e.a < 0:
                neg_sin[a.name] = max(neg_sin.get(a.name, 0), int(-e.a))
    if neg_sin:
        shift = tuple(sorted(((sin_atom(t), QdScalar(k)) for t, k in neg_sin.items())))
        num = P.reduce_trig({P.mono_mul(m, shift): c for m, c in num.items()})
        den = dict(den)
        for t, k in neg_sin.items():
            fp = _sin_factor(t)
            den[fp] = den.get(fp, 0) + k
        cancel = True
    else:
        num = P.reduce_trig(num)
    if not den:
        return Expr(num, ())
    # re-normalize incoming factors (they may be raw from the caller)
    clean: dict = {}
    for fp, k in den.items():
        if k <= 0:
            continue
        if _is_sin_factor(fp) is not None:
            clean[fp] = clean.get(fp, 0) + k
            continue
        fpd = dict(fp)
        unit_m, unit_c, sins, factor = _factor_unit(fpd)
        if factor is not None and P.freeze(factor) == fp and not sins and _pythagorean(fp) is None:
            clean[fp] = clean.get(fp, 0) + k
            continue
        # fold the unit into the numerator
        num = P.mul_term(num, P.mono_pow(P.mono_inv(unit_m), QdScalar(k)), unit_c.inverse() ** k)
        for th in sins:
            sfp = _sin_factor(th)
            clean[sfp] = clean.get(sfp, 0) + k
        if factor is not None:
            ff = P.freeze(factor)
            th = _pythagorean(ff)
            if th is not None:
                # 1/(cos^2 - 1) = -1/sin^2
                sfp = _sin_factor(th)
                clean[sfp] = clean.get(sfp, 0) + 2 * k
                if k % 2:
                    num = P.neg(num)
            else:
                clean[ff] = clean.get(ff, 0) + k
        cancel = True
    den = clean
    if cancel:
        num, den = _cancel(num, den)
    if not num:
        return ZERO_EXPR
    return Expr(num, tuple(sorted(den.items())))


def _pythagorean(fp: tuple) -> str | None:
    if len(fp) != 2:
        return None
    for m, _c in fp:
        for a, _e in m:
            if a.kind == COS:
                if fp == P.freeze(P.cos_sq_minus_one(a.name)):
                    return a.name
                return None
    return None


def _cancel(num: dict, den: dict):
    out = {}
    for fp, k in den.items():
        theta = _is_sin_factor(fp)
        while k > 0:
            if theta is not None:
                q = _divide_by_sin(num, theta)
            else:
                q = P.divide_exact(num, dict(fp))
                if q is not None:
                    q = P.reduce_trig(q)
            if q is None:
                break
            num = q
            k -= 1
        if k:
            out[fp] = k
    return num, out


def _divide_by_sin(num: dict, theta: str):
    A, B = P.split_by_sin(num, theta)
    if not A:
        return B
    C = P.divide_exact(A, P.cos_sq_minus_one(theta))
    if C is None:
        return None
    # num = (cos^2-1) C + B sin = sin (B - C sin)
    s = sin_atom(theta)
    out = dict(B)
    P.add_into(out, P.mul_term(C, ((s, ONE),), -ONE))
    return P.reduce_trig(out)


def esum(exprs) -> Expr:
    """Sum of expressions over their least common denominator."""
    exprs = [e for e in exprs if e.num]
    if not exprs:
        return ZERO_EXPR
    if len(exprs) == 1:
        return exprs[0]
    dens = {e.den for e in exprs}
    if len(dens) == 1:
        num: dict = {}
        for e in exprs:
            P.add_into(num, e.num)
        den = dict(exprs[0].den)
        return make(num, den, cancel=bool(den))
    lcm: dict = {}
    for e in exprs:
        for fp, k in e.den:
            if lcm.get(fp, 0) < k:
                lcm[fp] = k
    pow_cache: dict = {}
    num = {}
    for e in exprs:
        mine = dict(e.den)
        t = e.num
        for fp, k in lcm.items():
            extra = k - mine.get(fp, 0)
            if extra:
                key = (fp, extra)
                if key not in pow_cache:
                    pow_cache[key] = P.power(dict(fp), extra)
                t = P.mul(t, pow_cache[key])
        P.add_into(num, t)
    return make(num, lcm)


def _generalized_power(x: Expr, e: QdScalar) -> Expr:
    if x.den or len(x.num) != 1:
        raise KernelError(f"non-integer power {format_qd(e)} of a non-monomial: {x}")
    (m, c), = x.num.items()
    if c.is_one():
        cc = ONE
    elif c.is_rational() and e.is_rational() and c.a > 0:
        q = e.a
        root = root_rational(c.a, int(q.denominator))
        if root is None:
            raise KernelError(f"cannot take exact power {format_qd(e)} of {format_qd(c)}")
        cc = QdScalar(root) ** int(q.numerator)
    else:
        raise KernelError(f"cannot take power {format_qd(e)} of coefficient {format_qd(c)}")
    nm = P.mono_pow(m, e)
    for a, x_e in nm:
        if a.kind in (SIN, COS, SPOW) and not x_e.is_integer():
            raise KernelError(f"non-integer power of {atom_text(a)}")
    return make({nm: cc}, {}, cancel=False)


# -- derivations ---------------------------------------------------------

def _ufunc_deriv_atom(a: Atom, argname: str) -> dict:
    target = with_derivs(a, (argname,))
    alias = _ALIASES.get((a.name, target.derivs))
    if alias is not None:
        return alias.num  # aliases are polynomial
    return {((target, ONE),): ONE}


def partial_atom_deriv(v: Atom):
    """Derivation d/dv treating all other atoms as independent."""

    def d(a: Atom):
        if a == v:
            return {P.ONE_MONO: ONE}
        k = a.kind
        if k == UFUNC:
            out: dict = {}
            for arg in a.args:
                if arg == v:
                    P.add_into(out, _ufunc_deriv_atom(a, arg.name))
            return out or None
        if k == SIN and v.kind == COORD and v.name == a.name:
            return {((cos_atom(a.name), ONE),): ONE}
        if k == COS and v.kind == COORD and v.name == a.name:
            return {((sin_atom(a.name), ONE),): -ONE}
        if k == SPOW:
            base, p = a.args
            if v == p:
                raise KernelError(f"cannot differentiate {atom_text(a)} by its exponent")
            if v == base:
                return {tuple(sorted(((p, ONE), (a, ONE), (base, -ONE)))): ONE}
        return None

    return d


def total_atom_deriv(c: str):
    """Total derivative D_c on jet space."""
    cv = Atom(COORD, c)

    def d(a: Atom):
        k = a.kind
        if k == COORD:
            return {P.ONE_MONO: ONE} if a.name == c else None
        if k == JET:
            return {((with_derivs(a, (c,)), ONE),): ONE}
        if k == UFUNC:
            out: dict = {}
            for arg in a.args:
                if arg == cv:
                    P.add_into(out, _ufunc_deriv_atom(a, arg.name))
                elif arg.kind == JET:
                    dd = _ufunc_deriv_atom(a, arg.name)
                    P.add_into(out, P.mul_term(dd, ((with_derivs(arg, (c,)), ONE),), ONE))
            return out or None
        if k == SIN:
            return {((cos_atom(a.name), ONE),): ONE} if a.name == c else None
        if k == COS:
            return {((sin_atom(a.name), ONE),): -ONE} if a.name == c else None
        if k == SPOW:
            base, p = a.args
            db = d(base)
            if not db:
                return None
            core = {tuple(sorted(((p, ONE), (a, ONE), (base, -ONE)))): ONE}
            return P.mul(core, db)
        return None

    return d


def diff(e: Expr, v: Atom) -> Expr:
    """Partial derivative treating distinct atoms as independent."""
    return e.derive(partial_atom_deriv(v))


def total_derivative(e: Expr, c: str) -> Expr:
    return e.derive(total_atom_deriv(c))


# -- substitution --------------------------------------------------------

def substitute(e: Expr, bindings: dict) -> Expr:
    """Simultaneous substitution of atoms by expressions, then normalize."""
    if not bindings:
        return e
    bindings = {a: _coerce(v) for a, v in bindings.items()}
    _check_acyclic(bindings)
    cache: dict = {}

    def sub_poly(p: dict) -> Expr:
        plain: dict = {}
        parts = []
        for m, c in p.items():
            keep = []
            facs = []
            for a, x in m:
                b = bindings.get(a)
                if b is None:
                    keep.append((a, x))
                else:
                    ck = (a, x)
                    if ck not in cache:
                        cache[ck] = b ** x
                    facs.append(cache[ck])
            km = tuple(keep)
            if not facs:
                P.add_into(plain, {km: c})
                continue
            acc = _reduce(lambda s, t: s * t, facs)
            if not acc.den:
                P.add_into(plain, P.mul_term(acc.num, km, c))
            else:
                parts.append(acc * Expr(P.reduce_trig({km: c})))
        parts.append(make(P.reduce_trig(plain), {}, cancel=False))
        return esum(parts)

    out = sub_poly(e.num)
    for fp, k in e.den:
        out = out / (sub_poly(dict(fp)) ** k)
    return out


def _check_acyclic(bindings: dict) -> None:
    keys = set(bindings)
    graph = {a: {b for b in v.atoms() if b in keys} for a, v in bindings.items()}
    # a self-reference or longer cycle makes "simultaneous" substitution ambiguous
    state: dict = {}

    def visit(a):
        state[a] = 1
        for b in graph[a]:
            if state.get(b) == 1:
                raise KernelError(f"cyclic binding set through {atom_text(b)}")
            if b not in state:
                visit(b)
        state[a] = 2

    for a in graph:
        if a not in state:
            visit(a)


def substitute_function(e: Expr, fname: str, body: Expr, args) -> Expr:
    """Replace every occurrence of the uninterpreted function ``fname`` (and
    its derivatives) by ``body`` written in terms of the argument atoms."""
    bindings = {}
    for a in e.atoms():
        if a.kind == UFUNC and a.name == fname:
            val = body
            for dv in a.derivs:
                target = next(x for x in args if x.name == dv)
                val = diff(val, target)
            bindings[a] = val
    return substitute(e, bindings)


# -- structure queries ---------------------------------------------------

def coefficients(e: Expr, pred) -> dict:
    """Collect ``e`` by the monomial in atoms selected by ``pred``.

    Returns ``{monomial: Expr}``; the denominator must be free of them.
    """
    for fp, _ in e.den:
        for m, _c in fp:
            if any(pred(a) for a, _ in m):
                raise KernelError("selected atoms appear in a denominator")
    groups: dict = {}
    for m, c in e.num.items():
        sel, rest = P.mono_split(m, pred)
        groups.setdefault(sel, {})[rest] = c
    den = dict(e.den)
    return {k: make(v, den) for k, v in groups.items()}


def coefficient_of(e: Expr, a: Atom) -> tuple[Expr, Expr, bool]:
    """Return (c, rest, linear) with e = c*a + rest, rest free of a."""
    groups = coefficients(e, lambda x: x == a)
    linear = all(k in ((), ((a, ONE),)) for k in groups)
    c = groups.get(((a, ONE),), ZERO_EXPR)
    rest = groups.get((), ZERO_EXPR)
    return c, rest, linear


def mono_expr(m) -> Expr:
    return make({m: ONE}, {}, cancel=False)


def content_monomial(e: Expr, pred=None) -> tuple:
    """Largest monomial in atoms selected by ``pred`` dividing every
    numerator term (exponent-wise minimum, missing atoms count as 0).
    ``sin`` is never extracted."""
    if pred is None:
        pred = lambda a: True  # noqa: E731
    terms = [dict(m) for m in e.num]
    cands = {a for d in terms for a in d if pred(a) and a.kind != SIN}
    mins = {}
    for a in cands:
        lo = None
        for d in terms:
            x = d.get(a, ZERO)
            if lo is None or x < lo:
                lo = x
        mins[a] = lo
    return tuple(sorted(((a, x) for a, x in mins.items() if x), key=lambda t: t[0]))


# -- text ---------------------------------------------------------------

def _exp_text(e: QdScalar) -> str:
    if e.is_integer() and e.a >= 0:
        return str(int(e))
    return f"({format_qd(e)})"


def _mono_text(m) -> str:
    parts = []
    for a, x in m:
        if a.kind == SPOW:
            base, p = a.args
            if x.is_one():
                parts.append(f"{atom_text(base)}^{p.name}")
            else:
                parts.append(f"{atom_text(base)}^({format_qd(x)}*{p.name})")
            continue
        t = atom_text(a)
        if x.is_one():
            parts.append(t)
        else:
            parts.append(f"{t}^{_exp_text(x)}")
    return "*".join(parts)


def _term_text(m, c: QdScalar, first: bool) -> str:
    mt = _mono_text(m)
    if c.is_rational():
        neg = c.a < 0
        mag = -c if neg else c
        if not mt:
            body = format_qd(mag)
        elif mag.is_one():
            body = mt
        else:
            body = f"{format_qd(mag)}*{mt}"
        if first:
            return ("-" if neg else "") + body
        return (" - " if neg else " + ") + body
    cs = f"({format_qd(c)})"
    body = cs if not mt else f"{cs}*{mt}"
    return body if first else " + " + body


def poly_text(p: dict) -> str:
    if not p:
        return "0"
    key = P.order_key_factory([p])
    items = sorted(p.items(), key=lambda it: key(it[0]), reverse=True)
    return "".join(_term_text(m, c, i == 0) for i, (m, c) in enumerate(items))


def to_text(e: Expr) -> str:
    """Canonical serialization; parseable by :mod:`geowave.parser`."""
    n = poly_text(e.num)
    if not e.den:
        return n
    facs = []
    for fp, k in e.den:
        ft = poly_text(dict(fp))
        if len(fp) > 1:
            ft = f"({ft})"
        facs.append(ft if k == 1 else f"{ft}^{k}")
    num = n if len(e.num) == 1 else f"({n})"
    if len(facs) == 1 and (len(e.den[0][0]) > 1 or e.den[0][1] == 1):
        return f"{num}/{facs[0]}"
    return f"{num}/({'*'.join(facs)})"


def jet_atom(field: str, derivs) -> Atom:
    return jet(field, derivs)


__all__ = [
    "Expr",
    "KernelError",
    "ZERO_EXPR",
    "ONE_EXPR",
    "make",
    "esum",
    "diff",
    "total_derivative",
    "substitute",
    "substitute_function",
    "coefficients",
    "coefficient_of",
    "content_monomial",
    "register_alias",
    "clear_aliases",
    "to_text",
    "poly_text",
    "PARAM",
    "COORD",
]
