from __future__ import annotations

import functools

import pytest

from geowave import corpus as C
from geowave.kernel import atoms as A
from geowave.kernel.expr import clear_aliases
from geowave.kernel.tree import Scope
from geowave.parser import parse_expr
from geowave.scalars import set_radical

COORDS4 = ("x", "y", "z", "t")
FUNCS4 = {"k": ("u",), "h": ("u",), "f1": COORDS4, "f2": ("t",)}


def make_scope(coords=COORDS4, params=("n", "M", "k0"), functions=None, angular=()) -> Scope:
    A.register_suffix_names(list(coords))
    return Scope(list(coords), set(angular), list(params), ["u"], dict(FUNCS4 if functions is None else functions))


def parser_for(scope: Scope):
    return lambda text: parse_expr(text, scope)


@pytest.fixture(autouse=True)
def _session_state():
    set_radical(7)
    clear_aliases()
    yield
    set_radical(7)
    clear_aliases()


@pytest.fixture
def P():
    """Parser over (x, y, z, t) with k(u), h(u), f1(x,y,z,t), f2(t)."""
    return parser_for(make_scope())


@functools.lru_cache(maxsize=None)
def _model(name: str):
    return C.resolve_model(name)


def _active(name: str):
    m = _model(name)
    m.activate()
    return m


@pytest.fixture
def asd():
    return _active("asd")


@pytest.fixture
def kerr():
    return _active("kerr")


@pytest.fixture
def mink():
    return _active("mink")
