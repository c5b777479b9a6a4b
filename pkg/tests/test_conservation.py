from __future__ import annotations

from geowave import corpus as C
from geowave.conservation import (
    ConservedVector,
    compare_density,
    divergence_on_shell,
    multiplier_check,
    noether_condition,
    noether_flux,
    pair_check,
)
from geowave.geometry import Metric
from geowave.jet import Pde
from geowave.kernel import atoms as A
from geowave.kernel.expr import Expr
from geowave.symmetry import VectorField

from conftest import COORDS4, make_scope, parser_for


def test_phi8_time_component_exact(P, asd):
    X = C.generator(asd, "N8")
    flux = noether_flux(X, C.lagrangian(asd, "L0"), C.gauge(asd, "N8"))
    assert flux.components["t"].equals(P("-t*u_x^2"))


def test_phi8_is_conserved(asd):
    X = C.generator(asd, "N8")
    flux = noether_flux(X, C.lagrangian(asd, "L0"), C.gauge(asd, "N8"))
    assert divergence_on_shell(flux, C.equation(asd, "wave1_i")).holds


def test_noether_condition_euler_mode(asd):
    X = C.generator(asd, "N1")
    v = noether_condition(X, C.lagrangian(asd, "L0"))
    assert v.holds and v.detail["test"] == "euler"


def test_noether_condition_failure_witnessed(P, asd):
    X = VectorField(COORDS4, {"x": P("x^2")}, Expr.const(0))
    v = noether_condition(X, C.lagrangian(asd, "L0"))
    assert not v.holds and v.witness


def test_energy_flux_flat():
    Q = parser_for(make_scope(coords=("t", "x")))
    pde = Pde.build(Q("u_tt - u_xx"), ("t", "x"))
    phi = ConservedVector({"t": Q("u_t^2 + u_x^2"), "x": Q("-2*u_t*u_x")}, ("t", "x"))
    assert divergence_on_shell(phi, pde).holds
    assert pair_check(Q("2*u_t"), phi, pde).holds


def test_partial_flux_not_judged():
    Q = parser_for(make_scope(coords=("t", "x")))
    pde = Pde.build(Q("u_tt - u_xx"), ("t", "x"))
    v = divergence_on_shell(ConservedVector({"t": Q("u_t")}, ("t", "x")), pde)
    assert not v.holds and v.detail["status"] == "partial"


def test_flat_multiplier_translation():
    Q = parser_for(make_scope(coords=("t", "x")))
    pde = Pde.build(Q("u_tt - u_xx"), ("t", "x"))
    assert multiplier_check(Q("u_x"), pde).holds
    assert multiplier_check(Q("1"), pde).holds
    assert not multiplier_check(Q("u"), pde).holds


def test_multiplier_q1_reduced(asd):
    pde = C.equation(asd, "reduced3")
    assert multiplier_check(C.multiplier(asd, "Q1"), pde).holds
    assert multiplier_check(C.multiplier(asd, "Q3"), pde).holds


def test_multiplier_q5_fails_witnessed(asd):
    v = multiplier_check(C.multiplier(asd, "Q5"), C.equation(asd, "reduced3"))
    assert not v.holds and v.confirmed


def test_pair_check_with_metric_flux(kerr):
    g = Metric.from_model(kerr)
    comps = {}
    for i, c in enumerate(g.coords):
        s = Expr.const(0)
        for j, d in enumerate(g.coords):
            s = s + g.inverse[i][j] * Expr.atom(A.jet("u", (d,)))
        comps[c] = g.sqrt_abs_det * s
    phi = ConservedVector(comps, tuple(g.coords))
    assert pair_check(Expr.const(1), phi, C.equation(kerr, "box0")).holds


def test_compare_density_on_shell():
    Q = parser_for(make_scope(coords=("t", "x")))
    pde = Pde.build(Q("u_tt - u_xx"), ("t", "x"))
    v = compare_density(Q("u_t^2"), Q("2*u_t^2 + u_tt - u_xx"), pde)
    assert v.holds and v.detail["unit"].equals(Expr.const(2))
