from __future__ import annotations

import pytest

from geowave.geometry import GeometryError, Metric, box_operator, equal_up_to_unit, lagrangian, variational_check
from geowave.jet import euler_operator
from geowave.kernel.expr import Expr

from conftest import COORDS4, make_scope, parser_for


def test_minkowski_inverse():
    g = Metric(("t", "x", "y", "z"), [[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]])
    assert g.det.equals(Expr.const(-1))
    assert all(g.inverse[i][j].equals(Expr.const(g.g[i][j].constant_value())) for i in range(4) for j in range(4))


def test_off_diagonal_inverse():
    g = Metric(("a", "b"), [[0, 1], [1, 0]])
    assert g.det.equals(Expr.const(-1)) and g.inverse[0][1].equals(Expr.const(1))


def test_asd_inverse_identity(asd):
    assert Metric.from_model(asd).identity_check()


def test_singular_metric():
    with pytest.raises(GeometryError, match="singular"):
        Metric(("a", "b"), [[1, 1], [1, 1]])


def test_flat_box():
    P = parser_for(make_scope(coords=("t", "x", "y", "z")))
    g = Metric(("t", "x", "y", "z"), [[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]])
    pde = box_operator(g, P("k(u)"))
    assert pde.delta.equals(P("u_tt - u_xx - u_yy - u_zz - k(u)"))


def test_asd_box_differential_part(P, asd):
    pde = box_operator(Metric.from_model(asd))
    v = equal_up_to_unit(pde.delta, P("(x*t - 3*y*z)/t^2*u_xx - 2*y/t*u_xy + u_xt + u_yz"))
    assert v.holds and v.detail["unit"].equals(Expr.const(4))


def test_asd_lagrangian_quadratic_form(P, asd):
    L, c, w = lagrangian(Metric.from_model(asd), normalize_on=("x", "t"))
    assert equal_up_to_unit(L, P("(t*x - 3*y*z)/t^2*u_x^2 - 2*y/t*u_y*u_x + u_t*u_x + u_z*u_y")).holds


def test_flat_lagrangian():
    P = parser_for(make_scope(coords=("t", "x", "y", "z")))
    g = Metric(("t", "x", "y", "z"), [[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]])
    L, _, _ = lagrangian(g)
    assert equal_up_to_unit(L, P("u_t^2 - u_x^2 - u_y^2 - u_z^2")).holds


def test_kerr_lagrangian_matches_printed(kerr):
    from geowave import corpus as C

    L, _, _ = lagrangian(Metric.from_model(kerr))
    assert equal_up_to_unit(L, C.lagrangian(kerr, "L0")).holds


def test_kerr_box_is_euler_of_lagrangian(kerr):
    g = Metric.from_model(kerr)
    L, _, _ = lagrangian(g)
    assert equal_up_to_unit(euler_operator(L), box_operator(g).delta).holds


def test_unit_examples(P):
    d = P("(x*t - 3*y*z)/t^2*u_xx - 2*y/t*u_xy + u_xt + u_yz - k(u)")
    v = equal_up_to_unit(2 * d, d)
    assert v.holds and v.detail["unit"].equals(Expr.const(2))
    assert not equal_up_to_unit(P("u_x"), P("u_y")).holds


def test_variational_check(P):
    from geowave.jet import Pde

    pde = Pde.build(P("u_xt"), COORDS4)
    assert variational_check(P("u_x*u_t"), pde).holds
