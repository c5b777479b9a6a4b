"""Metric algebra, the d'Alembertian and the matching Lagrangian."""

from __future__ import annotations

from functools import lru_cache

from .jet import Pde, euler_operator, total_derivative
from .kernel import atoms as A
from .kernel.expr import (
    ONE_EXPR,
    ZERO_EXPR,
    Expr,
    KernelError,
    coefficients,
    content_monomial,
    make,
    mono_expr,
)
from .kernel import poly as P
from .oracle import Verdict
from .scalars import ONE, QdScalar, sqrt_rational

__all__ = [
    "GeometryError",
    "Metric",
    "metric_inverse",
    "box_operator",
    "box_expression",
    "lagrangian",
    "equal_up_to_unit",
    "clear_denominators",
]


class GeometryError(KernelError):
    pass


def _det(m: list) -> Expr:
    """Laplace expansion along the first row with memoized minors."""
    n = len(m)

    @lru_cache(maxsize=None)
    def minor(row: int, cols: tuple) -> Expr:
        if row == n:
            return ONE_EXPR
        total = ZERO_EXPR
        for k, c in enumerate(cols):
            a = m[row][c]
            if a.is_zero():
                continue
            sub = minor(row + 1, cols[:k] + cols[k + 1:])
            if sub.is_zero():
                continue
            term = a * sub
            total = total - term if k % 2 else total + term
        return total

    return minor(0, tuple(range(n)))


def _submatrix(m, i, j):
    return [[m[r][c] for c in range(len(m)) if c != j] for r in range(len(m)) if r != i]


class Metric:
    """Symmetric metric over named coordinates with cached inverse data."""

    def __init__(self, coords, g, sqrtdet: Expr | None = None):
        self.coords = list(coords)
        n = len(self.coords)
        if len(g) != n or any(len(row) != n for row in g):
            raise GeometryError("metric size does not match the coordinates")
        self.g = [[_as_expr(x) for x in row] for row in g]
        for i in range(n):
            for j in range(i + 1, n):
                if not self.g[i][j].equals(self.g[j][i]):
                    raise GeometryError("metric not symmetric")
        self.det = _det(self.g)
        if self.det.is_zero():
            raise GeometryError("singular metric: determinant is 0")
        self.sqrt_abs_det, self.det_sign = self._sqrt_abs_det(sqrtdet)
        self.inverse = self._inverse()

    @classmethod
    def from_model(cls, model) -> "Metric":
        if model.metric is None:
            raise GeometryError("model has no [metric] section")
        return cls(model.coordinates, model.metric, model.sqrtdet)

    @property
    def n(self) -> int:
        return len(self.coords)

    def _inverse(self):
        n = self.n
        # det = sign*sqrt^2; inverting the root keeps its factors separate
        root_inv = ONE_EXPR / self.sqrt_abs_det
        inv_det = root_inv * root_inv
        if self.det_sign < 0:
            inv_det = -inv_det
        out = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                cof = _det(_submatrix(self.g, j, i))
                v = cof * inv_det
                if (i + j) % 2:
                    v = -v
                out[i][j] = v
                out[j][i] = v
        return out

    def _sqrt_abs_det(self, hint: Expr | None):
        d = self.det
        if hint is not None:
            sq = hint * hint
            if sq.equals(d):
                return hint, 1
            if sq.equals(-d):
                return hint, -1
            raise GeometryError(f"sqrtdet hint does not square to +-det: {d}")
        if d.is_constant():
            c = d.constant_value()
            sign = 1 if c > 0 else -1
            a = c if sign > 0 else -c
            if not a.is_rational():
                raise GeometryError("irrational constant determinant; supply sqrtdet")
            r = sqrt_rational(a.a)
            if r is None:
                raise GeometryError(f"sqrt of {a} is outside the coefficient field; supply sqrtdet")
            return Expr.const(r), sign
        if not d.den and len(d.num) == 1:
            (m, c), = d.num.items()
            sign = 1 if c > 0 else -1
            try:
                return Expr({m: c * sign}) ** (ONE / 2), sign
            except KernelError:
                pass
        raise GeometryError(f"cannot take the square root of |det| = {d}; supply sqrtdet")

    def identity_check(self) -> bool:
        n = self.n
        for i in range(n):
            for j in range(n):
                s = ZERO_EXPR
                for k in range(n):
                    s = s + self.g[i][k] * self.inverse[k][j]
                if not s.equals(ONE_EXPR if i == j else ZERO_EXPR):
                    return False
        return True


def _as_expr(x) -> Expr:
    return x if isinstance(x, Expr) else Expr.const(x)


def metric_inverse(g: Metric):
    """(inverse matrix, determinant)."""
    return g.inverse, g.det


def _grads(coords, field_name):
    return [Expr.atom(A.jet(field_name, (c,))) for c in coords]


def box_expression(g: Metric, field_name: str = "u") -> Expr:
    """The divergence form sum_a D_a(sqrt|g| g^ab u_b), i.e. sqrt|g| * box u."""
    grads = _grads(g.coords, field_name)
    total = ZERO_EXPR
    for a, ca in enumerate(g.coords):
        flux = ZERO_EXPR
        for b in range(g.n):
            gab = g.inverse[a][b]
            if not gab.is_zero():
                flux = flux + gab * grads[b]
        total = total + total_derivative(g.sqrt_abs_det * flux, ca)
    return total


def clear_denominators(e: Expr) -> Expr:
    """Drop the denominator and the monomial content of ``e`` (non-jet atoms)."""
    num = make(e.num, {}, cancel=False)
    mono = content_monomial(num, lambda a: not a.depends_on_field())
    if mono:
        num = num * mono_expr(P.mono_inv(mono))
    return num


def box_operator(g: Metric, source: Expr | None = None, field_name: str = "u",
                 leading=None, name: str = "box") -> Pde:
    """Pde for box u - source = 0.

    A constant sqrt|g| is simply divided out; otherwise the equation is kept in
    divergence form sqrt|g| * (box u - source).
    """
    source = source if source is not None else ZERO_EXPR
    div = box_expression(g, field_name)
    if g.sqrt_abs_det.is_constant():
        delta = div / g.sqrt_abs_det - source
    else:
        delta = div - g.sqrt_abs_det * source
    return Pde.build(delta, g.coords, field_name, leading, name=name)


def lagrangian(g: Metric, h: Expr | None = None, field_name: str = "u",
               normalize_on=None) -> tuple[Expr, Expr, Expr]:
    """Return (L, c, w) with L = c*sqrt|g|*g^ab u_a u_b - w*h.

    ``c`` makes the coefficient of the monomial ``normalize_on`` (a pair of
    coordinate names) equal to 1 when given, else c = 1/2.  ``w`` is chosen so
    that E_u[L] = -2c*sqrt|g|*(box u - h') exactly.
    """
    grads = _grads(g.coords, field_name)
    quad = ZERO_EXPR
    for a in range(g.n):
        for b in range(g.n):
            gab = g.inverse[a][b]
            if not gab.is_zero():
                quad = quad + gab * grads[a] * grads[b]
    quad = g.sqrt_abs_det * quad
    if normalize_on is not None:
        ua = A.jet(field_name, (normalize_on[0],))
        ub = A.jet(field_name, (normalize_on[1],))
        key = tuple(sorted(((ua, ONE), (ub, ONE)))) if ua != ub else ((ua, QdScalar(2)),)
        coeffs = coefficients(quad, lambda x: x.kind == A.JET)
        k = coeffs.get(key)
        if k is None or k.is_zero():
            raise GeometryError("normalization monomial absent from the quadratic form")
        c = ONE_EXPR / k
    else:
        c = Expr.const(ONE / 2)
    L = c * quad
    w = Expr.const(2) * c * g.sqrt_abs_det
    if h is not None:
        L = L - w * h
    return L, c, w


def equal_up_to_unit(a: Expr, b: Expr) -> Verdict:
    """a = lam*b for some nonzero lam free of jet atoms; lam in detail."""
    if a.is_zero() or b.is_zero():
        ok = a.is_zero() and b.is_zero()
        return Verdict(ok, None, "symbolic", detail={"unit": None})
    sel = lambda x: x.depends_on_field()  # noqa: E731
    ca = coefficients(make(a.num, {}, cancel=False), sel)
    cb = coefficients(make(b.num, {}, cancel=False), sel)
    if set(ca) != set(cb):
        return Verdict(False, None, "symbolic",
                       detail={"reason": "different jet monomials",
                               "only_left": sorted(_mtext(m) for m in set(ca) - set(cb)),
                               "only_right": sorted(_mtext(m) for m in set(cb) - set(ca))})
    key = sorted(ca, key=_mtext)[0]
    lam = ca[key] / cb[key]
    bad = []
    for m in ca:
        if not (ca[m] - lam * cb[m]).is_zero():
            bad.append(_mtext(m))
    lam_full = lam * _den_expr(b) / _den_expr(a)
    if bad:
        return Verdict(False, None, "symbolic",
                       detail={"reason": "coefficient ratio not constant across jet monomials",
                               "mismatched": sorted(bad), "unit": lam_full})
    if lam_full.depends_on_field():
        return Verdict(False, None, "symbolic", detail={"reason": "ratio depends on the field"})
    return Verdict(True, None, "symbolic", detail={"unit": lam_full})


def _den_expr(e: Expr) -> Expr:
    out = ONE_EXPR
    for fp, k in e.den:
        out = out * make(dict(fp), {}, cancel=False) ** k
    return out


def _mtext(m) -> str:
    return str(mono_expr(m)) if m else "1"


def variational_check(L: Expr, pde: Pde, field_name: str = "u") -> Verdict:
    """E_u[L] against pde.delta up to a unit."""
    E = euler_operator(L, field_name)
    v = equal_up_to_unit(E, pde.delta)
    v.residual = E
    return v
