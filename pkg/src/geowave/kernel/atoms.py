"""Atoms: the indivisible symbols an expression is built from."""

from __future__ import annotations

from typing import NamedTuple

COORD = 0
PARAM = 1
COS = 2
SIN = 3
UFUNC = 4
SPOW = 5
JET = 6

KIND_NAMES = {
    COORD: "coordinate",
    PARAM: "parameter",
    COS: "trig",
    SIN: "trig",
    UFUNC: "ufunc",
    SPOW: "symbolic-power",
    JET: "jet",
}


class Atom(NamedTuple):
    """A symbol.  Tuple ordering gives the fixed total order of atoms.

    ``args`` holds argument atoms for uninterpreted functions (coordinates or
    the order-zero field atom) and ``(base, param)`` for symbolic powers.
    ``derivs`` is the sorted multiset of differentiation variables (names).
    """

    kind: int
    name: str
    args: tuple = ()
    derivs: tuple = ()

    @property
    def order(self) -> int:
        return len(self.derivs)

    def is_jet(self) -> bool:
        return self.kind == JET

    def is_derivative(self) -> bool:
        """A jet atom of order >= 1."""
        return self.kind == JET and bool(self.derivs)

    def depends_on_field(self) -> bool:
        if self.kind == JET:
            return True
        if self.kind == UFUNC:
            return any(a.kind == JET for a in self.args)
        if self.kind == SPOW:
            return self.args[0].kind == JET
        return False

    def __repr__(self):
        return f"Atom<{atom_text(self)}>"


def coord(name: str) -> Atom:
    return Atom(COORD, name)


def param(name: str) -> Atom:
    return Atom(PARAM, name)


def field(name: str) -> Atom:
    return Atom(JET, name)


def jet(name: str, derivs=()) -> Atom:
    return Atom(JET, name, (), tuple(sorted(derivs)))


def ufunc(name: str, args, derivs=()) -> Atom:
    return Atom(UFUNC, name, tuple(args), tuple(sorted(derivs)))


def sin_atom(theta: str) -> Atom:
    return Atom(SIN, theta)


def cos_atom(theta: str) -> Atom:
    return Atom(COS, theta)


def spow(base: Atom, p: Atom) -> Atom:
    return Atom(SPOW, f"{base.name}^{p.name}", (base, p))


def with_derivs(a: Atom, extra) -> Atom:
    return a._replace(derivs=tuple(sorted(a.derivs + tuple(extra))))


# Names whose greedy decomposition is used when printing jet suffixes, in
# the order derivative variables are printed.
_JET_SUFFIX_NAMES: set[str] = set()
_PRINT_ORDER: dict[str, int] = {}


def register_suffix_names(names) -> None:
    """Make ``names`` known for printing; they take precedence in order."""
    names = list(names)
    _JET_SUFFIX_NAMES.update(names)
    rest = [n for n in _PRINT_ORDER if n not in names]
    _PRINT_ORDER.clear()
    for n in names + rest:
        _PRINT_ORDER[n] = len(_PRINT_ORDER)


def _print_sorted(derivs) -> list:
    return sorted(derivs, key=lambda d: (_PRINT_ORDER.get(d, len(_PRINT_ORDER)), d))


def split_suffix(suffix: str, names) -> list[str] | None:
    """Split ``xt`` / ``thetaphi`` into coordinate names by greedy longest match."""
    names = sorted(names, key=len, reverse=True)
    out = []
    i = 0
    while i < len(suffix):
        for n in names:
            if suffix.startswith(n, i):
                out.append(n)
                i += len(n)
                break
        else:
            return None
    return out


def _jet_suffix(derivs) -> str | None:
    derivs = _print_sorted(derivs)
    s = "".join(derivs)
    names = _JET_SUFFIX_NAMES | set(derivs)
    back = split_suffix(s, names)
    if back is not None and sorted(back) == sorted(derivs):
        return s
    return None


def atom_text(a: Atom) -> str:
    if a.kind in (COORD, PARAM):
        return a.name
    if a.kind == SIN:
        return f"sin({a.name})"
    if a.kind == COS:
        return f"cos({a.name})"
    if a.kind == JET:
        if not a.derivs:
            return a.name
        suffix = _jet_suffix(a.derivs)
        if suffix is not None:
            return f"{a.name}_{suffix}"
        return f"Diff({a.name},{','.join(_print_sorted(a.derivs))})"
    if a.kind == UFUNC:
        call = f"{a.name}({','.join(atom_text(x) for x in a.args)})"
        if not a.derivs:
            return call
        return f"Diff({call},{','.join(_print_sorted(a.derivs))})"
    if a.kind == SPOW:
        base, p = a.args
        return f"{atom_text(base)}^{p.name}"
    raise ValueError(a)
