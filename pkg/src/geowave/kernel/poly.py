"""Generalized polynomials: finite sums of Q(sqrt(d)) coefficients times
monomials with Q(sqrt(d)) exponents.

A monomial is a tuple of ``(Atom, exponent)`` pairs sorted by atom; a
polynomial is a plain ``dict`` mapping monomial -> nonzero coefficient.
Polynomials are treated as immutable once built.

Trig reduction keeps every ``sin`` to exponent 0 or 1 by rewriting
``sin^2 -> 1 - cos^2``.  Negative ``sin`` exponents never appear in a
polynomial; :mod:`geowave.kernel.expr` moves them into the denominator.
"""

from __future__ import annotations

from ..scalars import ONE, ZERO, QdScalar
from .atoms import COS, SIN, Atom, cos_atom

Monomial = tuple
Poly = dict

ONE_MONO: Monomial = ()
_TWO = QdScalar(2)


def mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for a, e in m2:
        s = d.get(a)
        if s is None:
            d[a] = e
        else:
            s = s + e
            if s:
                d[a] = s
            else:
                del d[a]
    return tuple(sorted(d.items(), key=_atom_key))


def _atom_key(item):
    return item[0]


def mono_pow(m: Monomial, e: QdScalar) -> Monomial:
    if not e:
        return ONE_MONO
    return tuple((a, x * e) for a, x in m)


def mono_inv(m: Monomial) -> Monomial:
    return tuple((a, -x) for a, x in m)


def mono_div(m1: Monomial, m2: Monomial) -> Monomial:
    return mono_mul(m1, mono_inv(m2))


def mono_exp(m: Monomial, atom: Atom) -> QdScalar:
    for a, e in m:
        if a == atom:
            return e
    return ZERO


def mono_without(m: Monomial, pred) -> Monomial:
    return tuple((a, e) for a, e in m if not pred(a))


def mono_split(m: Monomial, pred) -> tuple[Monomial, Monomial]:
    yes = tuple((a, e) for a, e in m if pred(a))
    no = tuple((a, e) for a, e in m if not pred(a))
    return yes, no


def order_key_factory(polys):
    """Key realising the group (lex) order on the monomials of ``polys``.

    The order compares exponents atom by atom in the global atom order;
    it is compatible with multiplication, so leading terms multiply.
    """
    atoms = set()
    for p in polys:
        for m in p:
            for a, _ in m:
                atoms.add(a)
    atoms = sorted(atoms)

    def key(m):
        d = dict(m)
        return tuple(d.get(a, ZERO) for a in atoms)

    return key


def leading(p: Poly, key=None):
    if key is None:
        key = order_key_factory([p])
    m = max(p, key=key)
    return m, p[m]


# -- construction --------------------------------------------------------

def const(c) -> Poly:
    c = c if isinstance(c, QdScalar) else QdScalar(c)
    return {ONE_MONO: c} if c else {}


def atom_poly(a: Atom, e: QdScalar = ONE) -> Poly:
    return reduce_trig({((a, e),): ONE})


# -- arithmetic ----------------------------------------------------------

def add(p: Poly, q: Poly) -> Poly:
    if not p:
        return q
    if not q:
        return p
    out = dict(p)
    for m, c in q.items():
        s = out.get(m)
        if s is None:
            out[m] = c
        else:
            s = s + c
            if s:
                out[m] = s
            else:
                del out[m]
    return out


def add_into(out: Poly, q: Poly, scale: QdScalar | None = None) -> None:
    for m, c in q.items():
        if scale is not None:
            c = c * scale
        s = out.get(m)
        if s is None:
            out[m] = c
        else:
            s = s + c
            if s:
                out[m] = s
            else:
                del out[m]


def neg(p: Poly) -> Poly:
    return {m: -c for m, c in p.items()}


def sub(p: Poly, q: Poly) -> Poly:
    return add(p, neg(q))


def scale(p: Poly, c: QdScalar) -> Poly:
    if not c:
        return {}
    if c.is_one():
        return p
    return {m: x * c for m, x in p.items()}


def mul_term(p: Poly, m: Monomial, c: QdScalar) -> Poly:
    out = {mono_mul(k, m): x * c for k, x in p.items()}
    return reduce_trig(out) if _has_sin(m) else out


def mul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return {}
    if len(p) > len(q):
        p, q = q, p
    out: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = mono_mul(m1, m2)
            c = c1 * c2
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
    return reduce_trig(out)


def power(p: Poly, k: int) -> Poly:
    if k < 0:
        raise ValueError("negative polynomial power")
    result = const(1)
    base = p
    while k:
        if k & 1:
            result = mul(result, base)
        k >>= 1
        if k:
            base = mul(base, base)
    return result


# -- trig reduction ------------------------------------------------------

def _has_sin(m: Monomial) -> bool:
    for a, _ in m:
        if a.kind == SIN:
            return True
    return False


def _needs_trig(m: Monomial) -> bool:
    for a, e in m:
        if a.kind == SIN and (e.b or e.a >= 2 or e.a < 0 or e.a.denominator != 1):
            return True
    return False


def reduce_trig(p: Poly) -> Poly:
    """Rewrite sin^k (k >= 2) as sin^(k mod 2) * (1 - cos^2)^(k div 2)."""
    bad = [m for m in p if _needs_trig(m)]
    if not bad:
        return p
    out = {m: c for m, c in p.items() if m not in set(bad)}
    for m in bad:
        c = p[m]
        for a, e in m:
            if a.kind == SIN and not e.is_integer():
                raise ValueError(f"non-integer power of {a} is unsupported")
            if a.kind == SIN and e.a < 0:
                raise ValueError("negative sin power inside a polynomial")
        term = {ONE_MONO: c}
        rest = []
        for a, e in m:
            if a.kind == SIN and e.a >= 2:
                k = int(e.a)
                half, odd = divmod(k, 2)
                ca = cos_atom(a.name)
                one_minus = {ONE_MONO: ONE, ((ca, _TWO),): -ONE}
                term = _plain_mul(term, _plain_power(one_minus, half))
                if odd:
                    rest.append((a, ONE))
            else:
                rest.append((a, e))
        rest_m = tuple(sorted(rest, key=_atom_key))
        for tm, tc in term.items():
            add_into(out, {mono_mul(tm, rest_m): tc})
    return out


def _plain_mul(p, q):
    out: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            add_into(out, {mono_mul(m1, m2): c1 * c2})
    return out


def _plain_power(p, k):
    out = {ONE_MONO: ONE}
    for _ in range(k):
        out = _plain_mul(out, p)
    return out


# -- division ------------------------------------------------------------

def divide_exact(n: Poly, d: Poly, max_steps: int | None = None) -> Poly | None:
    """Return q with n == d*q (as plain generalized polynomials), else None.

    Long division by leading terms in the group order.  Sound always; a
    quotient is found whenever one exists within the step budget.
    """
    if not d:
        raise ZeroDivisionError("polynomial division by zero")
    if not n:
        return {}
    if len(d) == 1:
        (dm, dc), = d.items()
        inv = dc.inverse()
        im = mono_inv(dm)
        return {mono_mul(m, im): c * inv for m, c in n.items()}
    key = order_key_factory([n, d])
    ld_m, ld_c = leading(d, key)
    tr_m = min(d, key=key)
    n_tr = key(min(n, key=key))
    inv_c = ld_c.inverse()
    inv_ld = mono_inv(ld_m)
    r = dict(n)
    q: Poly = {}
    if max_steps is None:
        max_steps = 200 + 20 * len(n)
    steps = 0
    while r:
        steps += 1
        if steps > max_steps:
            return None
        rm, rc = leading(r, key)
        qm = mono_mul(rm, inv_ld)
        # every quotient monomial times the trailing monomial of d must stay
        # above the trailing monomial of n
        if key(mono_mul(qm, tr_m)) < n_tr:
            return None
        qc = rc * inv_c
        q[qm] = q.get(qm, ZERO) + qc
        for m, c in d.items():
            mm = mono_mul(m, qm)
            s = r.get(mm, ZERO) - c * qc
            if s:
                r[mm] = s
            else:
                r.pop(mm, None)
    return {m: c for m, c in q.items() if c}


# -- calculus ------------------------------------------------------------

def derive(p: Poly, atom_deriv) -> Poly:
    """Apply a derivation given by ``atom_deriv(atom) -> Poly | None``."""
    out: Poly = {}
    cache = {}
    for m, c in p.items():
        for i, (a, e) in enumerate(m):
            if a in cache:
                da = cache[a]
            else:
                da = cache[a] = atom_deriv(a)
            if not da:
                continue
            e1 = e - ONE
            if e1:
                rest = m[:i] + ((a, e1),) + m[i + 1:]
            else:
                rest = m[:i] + m[i + 1:]
            coeff = c * e
            for dm, dc in da.items():
                nm = mono_mul(rest, dm)
                v = coeff * dc
                s = out.get(nm)
                if s is None:
                    out[nm] = v
                else:
                    s = s + v
                    if s:
                        out[nm] = s
                    else:
                        del out[nm]
    return reduce_trig(out)


def atoms_of(p: Poly) -> set:
    s = set()
    for m in p:
        for a, _ in m:
            s.add(a)
    return s


def freeze(p: Poly) -> tuple:
    return tuple(sorted(p.items(), key=_mono_item_key))


def _mono_item_key(item):
    return item[0]


def thaw(fp: tuple) -> Poly:
    return dict(fp)


def is_constant(p: Poly) -> bool:
    return not p or (len(p) == 1 and ONE_MONO in p)


def split_by_sin(p: Poly, theta: str):
    """Return (A, B) with p = A + B*sin(theta), A and B sin-free in theta."""
    A: Poly = {}
    B: Poly = {}
    for m, c in p.items():
        e = ZERO
        rest = []
        for a, x in m:
            if a.kind == SIN and a.name == theta:
                e = x
            else:
                rest.append((a, x))
        if e:
            B[tuple(rest)] = c
        else:
            A[m] = c
    return A, B


def cos_sq_minus_one(theta: str) -> Poly:
    return {((cos_atom(theta), _TWO),): ONE, ONE_MONO: -ONE}


__all__ = [
    "Monomial",
    "Poly",
    "ONE_MONO",
    "COS",
    "SIN",
]
