from __future__ import annotations

import pytest

from geowave import corpus as C
from geowave.jet import Pde
from geowave.kernel.expr import Expr
from geowave.symmetry import (
    VectorField,
    apply,
    check_symmetry,
    commutator,
    determining_system,
    prolong,
)

from conftest import COORDS4


def _vf(P, **comps):
    phi = P(comps.pop("phi", "0"))
    return VectorField(COORDS4, {c: P(v) for c, v in comps.items()}, phi)


def test_prolong_translation_is_trivial(P):
    Xpr = prolong(_vf(P, x="1"), 2)
    assert apply(Xpr, P("u_xx*u_t")).is_zero()


def test_prolong_scaling(P):
    Xpr = prolong(_vf(P, x="x"), 2)
    assert apply(Xpr, P("u_xx")).equals(P("-2*u_xx"))
    assert apply(Xpr, P("u_xt")).equals(P("-u_xt"))


def test_prolong_field_scaling(P):
    Xpr = prolong(_vf(P, phi="u"), 2)
    assert apply(Xpr, P("u_x*u_y")).equals(P("2*u_x*u_y"))


def test_characteristic(P):
    X = _vf(P, t="t", phi="u")
    assert X.characteristic().equals(P("u - t*u_t"))


def test_wave_scaling_is_symmetry(P):
    pde = Pde.build(P("u_xt + u_yz"), COORDS4)
    assert check_symmetry(_vf(P, x="x", t="-t"), pde).holds


def test_non_symmetry_witnessed(P):
    pde = Pde.build(P("u_xt + u_yz"), COORDS4)
    v = check_symmetry(_vf(P, x="x"), pde)
    assert not v.holds and v.witness


def test_case_i_generators_are_symmetries(asd):
    pde = C.equation(asd, "wave1_i")
    for name in ("i_X1", "i_X3"):
        assert check_symmetry(C.generator(asd, name), pde).holds


def test_commutator_of_translations_vanishes(P):
    assert commutator(_vf(P, x="1"), _vf(P, y="1")).is_zero()


def test_commutator_scaling_translation(P):
    Z = commutator(_vf(P, x="1"), _vf(P, x="x"))
    assert Z.equals(_vf(P, x="1"))


def test_commutator_antisymmetric(P):
    X, Y = _vf(P, x="t", phi="u"), _vf(P, t="x*t")
    assert (commutator(X, Y) + commutator(Y, X)).is_zero()


def test_lie_detsys_two_dimensional():
    from conftest import make_scope, parser_for

    Q = parser_for(make_scope(coords=("x", "t")))
    ds = determining_system(Pde.build(Q("u_xt"), ("x", "t")), "lie")
    assert ds.reconstruct().equals(ds.residual)
    assert ds.rows and all(not v.is_zero() for _, v in ds.sorted_rows())


def test_noether_detsys_rows(asd):
    L = C.lagrangian(asd, "L")
    ds = determining_system(mode="noether", lagrangian=L, coords=tuple(asd.coordinates))
    assert ds.reconstruct().equals(ds.residual)
    assert ds.row("u_x^2 u_y", simplified=True) is not None
    text = "\n".join(ds.table())
    assert "u_x^2 u_y : η_u" in text
    assert "u_x^3 : ξ_u" in text
    assert "u_x^2 u_t : τ_u" in text


def test_detsys_bad_mode(P):
    with pytest.raises(Exception):
        determining_system(Pde.build(P("u_xt"), COORDS4), "magic")


def test_zero_field_is_zero():
    assert VectorField(COORDS4, {}, Expr.const(0)).is_zero()
