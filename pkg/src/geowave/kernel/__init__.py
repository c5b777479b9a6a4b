"""Canonical symbolic expression kernel."""

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
    coord,
    cos_atom,
    field,
    jet,
    param,
    sin_atom,
    spow,
    ufunc,
)
from .expr import (
    ONE_EXPR,
    ZERO_EXPR,
    Expr,
    KernelError,
    clear_aliases,
    coefficient_of,
    coefficients,
    content_monomial,
    diff,
    esum,
    make,
    register_alias,
    substitute,
    substitute_function,
    to_text,
    total_derivative,
)

__all__ = [
    "COORD", "COS", "JET", "PARAM", "SIN", "SPOW", "UFUNC",
    "Atom", "atom_text", "coord", "cos_atom", "field", "jet", "param",
    "sin_atom", "spow", "ufunc",
    "ONE_EXPR", "ZERO_EXPR", "Expr", "KernelError", "clear_aliases",
    "coefficient_of", "coefficients", "content_monomial", "diff", "esum",
    "make", "register_alias", "substitute", "substitute_function", "to_text",
    "total_derivative",
]
