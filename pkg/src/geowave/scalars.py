"""Exact arithmetic in the quadratic field Q(sqrt(d)).

Values are ``a + b*sqrt(d)`` with ``a`` and ``b`` arbitrary-precision
rationals.  A single radicand ``d`` is active per session (default 7); it is
set once by the model loader through :func:`set_radical`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

from gmpy2 import mpq, mpz, is_square

__all__ = [
    "QdScalar",
    "ZERO",
    "ONE",
    "get_radical",
    "set_radical",
    "qd",
    "qd_sign",
    "RadicalMismatch",
]

_D = 7


class RadicalMismatch(ValueError):
    """Raised when a second radicand is mixed into a session."""


def _squarefree(n: int) -> bool:
    if n < 2:
        return False
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


def get_radical() -> int:
    return _D


def set_radical(d: int) -> None:
    """Select the radicand for the session.  ``d`` must be square-free."""
    global _D
    d = int(d)
    if not _squarefree(d):
        raise ValueError(f"radicand must be a square-free integer > 1, got {d}")
    _D = d


Rational = Union[int, Fraction, "mpq"]


class QdScalar:
    """An element ``a + b*sqrt(d)`` of Q(sqrt(d)).  Immutable."""

    __slots__ = ("a", "b", "_hash")

    def __init__(self, a: Rational = 0, b: Rational = 0):
        if isinstance(a, Fraction):
            a = mpq(a.numerator, a.denominator)
        if isinstance(b, Fraction):
            b = mpq(b.numerator, b.denominator)
        object.__setattr__(self, "a", mpq(a))
        object.__setattr__(self, "b", mpq(b))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, key, value):
        raise AttributeError("QdScalar is immutable")

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.a and not self.b

    def is_rational(self) -> bool:
        return not self.b

    def is_integer(self) -> bool:
        return not self.b and self.a.denominator == 1

    def is_one(self) -> bool:
        return self.a == 1 and not self.b

    def __bool__(self) -> bool:
        return bool(self.a) or bool(self.b)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return QdScalar(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return QdScalar(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return QdScalar(-self.a, -self.b)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not self.b and not other.b:
            return QdScalar(self.a * other.a)
        return QdScalar(
            self.a * other.a + self.b * other.b * _D,
            self.a * other.b + self.b * other.a,
        )

    __rmul__ = __mul__

    def conjugate(self) -> "QdScalar":
        return QdScalar(self.a, -self.b)

    def norm(self):
        """Field norm ``a^2 - d b^2`` (a rational)."""
        return self.a * self.a - _D * self.b * self.b

    def inverse(self) -> "QdScalar":
        if self.is_zero():
            raise ZeroDivisionError("division by zero in Q(sqrt(d))")
        if not self.b:
            return QdScalar(1 / self.a)
        n = self.norm()
        return QdScalar(self.a / n, -self.b / n)

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("QdScalar powers must be integers")
        if k < 0:
            return self.inverse() ** (-k)
        result = ONE
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- comparison -------------------------------------------------------
    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return False
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.a, self.b)) if self.b else hash(self.a)
            object.__setattr__(self, "_hash", h)
        return h

    def sign(self) -> int:
        return qd_sign(self)

    def __lt__(self, other):
        return qd_sign(self - _coerce(other)) < 0

    def __le__(self, other):
        return qd_sign(self - _coerce(other)) <= 0

    def __gt__(self, other):
        return qd_sign(self - _coerce(other)) > 0

    def __ge__(self, other):
        return qd_sign(self - _coerce(other)) >= 0

    def key(self):
        """Structural (not numeric) sort key, used for deterministic ordering."""
        return (self.a, self.b)

    # -- conversion -------------------------------------------------------
    def to_fraction(self) -> Fraction:
        if self.b:
            raise ValueError(f"{self} is irrational")
        return Fraction(int(self.a.numerator), int(self.a.denominator))

    def __int__(self):
        if not self.is_integer():
            raise ValueError(f"{self} is not an integer")
        return int(self.a)

    def __float__(self):
        return float(self.a) + float(self.b) * (_D ** 0.5)

    def __repr__(self):
        return f"QdScalar({self})"

    def __str__(self):
        return format_qd(self)


def _rat_str(q) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_qd(x: QdScalar) -> str:
    """Text form: ``a``, ``b*sqrt(d)``, ``a+b*sqrt(d)``."""
    a, b = x.a, x.b
    if not b:
        return _rat_str(a)
    if b == 1:
        rad = f"sqrt({_D})"
    elif b == -1:
        rad = f"-sqrt({_D})"
    else:
        rad = f"{_rat_str(b)}*sqrt({_D})"
    if not a:
        return rad
    if rad.startswith("-"):
        return f"{_rat_str(a)}{rad}"
    return f"{_rat_str(a)}+{rad}"


def _coerce(x) -> QdScalar:
    if isinstance(x, QdScalar):
        return x
    if isinstance(x, (int, Fraction)) or type(x).__name__ in ("mpq", "mpz"):
        return QdScalar(x)
    return NotImplemented


def qd(a: Rational = 0, b: Rational = 0) -> QdScalar:
    return QdScalar(a, b)


def qd_sign(x: QdScalar) -> int:
    """Exact sign of ``a + b*sqrt(d)``: -1, 0 or 1."""
    a, b = x.a, x.b
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sb == 0:
        return sa
    if sa == 0:
        return sb
    if sa == sb:
        return sa
    # opposite signs: compare a^2 with d b^2
    lhs = a * a
    rhs = _D * b * b
    if lhs > rhs:
        return sa
    if lhs < rhs:
        return sb
    return 0  # unreachable for square-free d


def sqrt_rational(q) -> QdScalar | None:
    """Exact square root of a non-negative rational inside Q(sqrt(d)), if any."""
    q = mpq(q)
    if q < 0:
        return None
    num, den = mpz(q.numerator), mpz(q.denominator)
    if is_square(num) and is_square(den):
        from gmpy2 import isqrt

        return QdScalar(mpq(isqrt(num), isqrt(den)))
    # q = c^2 * d ?
    r = q / _D
    num, den = mpz(r.numerator), mpz(r.denominator)
    if is_square(num) and is_square(den):
        from gmpy2 import isqrt

        return QdScalar(0, mpq(isqrt(num), isqrt(den)))
    return None


def root_rational(q, k: int):
    """Exact positive k-th root of a positive rational, or None."""
    from gmpy2 import iroot

    q = mpq(q)
    if q <= 0:
        return None
    n, exact_n = iroot(mpz(q.numerator), k)
    dd, exact_d = iroot(mpz(q.denominator), k)
    if exact_n and exact_d:
        return mpq(n, dd)
    return None


ZERO = QdScalar(0)
ONE = QdScalar(1)
