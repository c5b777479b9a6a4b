from __future__ import annotations

import pytest

from geowave.jet import JetError, Pde, euler_operator, on_shell_reduce, total_derivative_multi
from geowave.kernel import atoms as A
from geowave.kernel.expr import total_derivative

from conftest import COORDS4

WAVE1_0 = "(x*t - 3*y*z)/t^2*u_xx - 2*y/t*u_xy + u_xt + u_yz"


@pytest.fixture
def wave1(P):
    return Pde.build(P(WAVE1_0), COORDS4, leading=A.jet("u", ("x", "t")))


def test_on_shell_reduce_leading(P, wave1):
    out = on_shell_reduce(P("u_xt"), wave1)
    assert out.equals(P("-(x*t - 3*y*z)/t^2*u_xx + 2*y/t*u_xy - u_yz"))


def test_untouched_atom(P, wave1):
    assert on_shell_reduce(P("u_yy"), wave1).equals(P("u_yy"))


def test_differential_consequence_vanishes(P, wave1):
    assert wave1.reduce(total_derivative(wave1.delta, "x")).is_zero()
    assert wave1.reduce(total_derivative_multi(wave1.delta, ("y", "t"))).is_zero()


def test_pde_check_and_order(wave1):
    assert wave1.check() and wave1.order == 2


def test_automatic_leading(P):
    pde = Pde.build(P("u_tt - u_xx"), ("t", "x"))
    assert pde.leading.derivs and pde.reduce(P("u_tt")).equals(P("u_xx")) or pde.reduce(P("u_xx")).equals(P("u_tt"))


def test_leading_must_be_solvable(P):
    with pytest.raises(JetError):
        Pde.build(P("u_xt^2 + u"), COORDS4, leading=A.jet("u", ("x", "t")))


def test_euler_two_first_order_terms(P):
    assert euler_operator(P("u_x*u_t")).equals(P("-2*u_xt"))


def test_euler_asd_lagrangian(P):
    L = P("(t*x - 3*y*z)/t^2*u_x^2 - 2*y/t*u_y*u_x + u_t*u_x + u_z*u_y")
    assert euler_operator(L).equals(-2 * P(WAVE1_0))


def test_euler_annihilates_divergence(P):
    assert euler_operator(total_derivative(P("u^2*u_y"), "x")).is_zero()


def test_euler_of_potential(P):
    assert euler_operator(P("h(u)")).equals(P("Diff(h(u),u)"))
