"""Hypothesis property suites; each runs on at least 200 random instances."""

from __future__ import annotations


import mpmath
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from geowave.jet import Pde, euler_operator, on_shell_reduce, total_derivative_multi
from geowave.kernel import atoms as A
from geowave.kernel.expr import Expr, diff, total_derivative
from geowave.oracle import confirm_nonzero, probably_zero
from geowave.parser import serialize
from geowave.reduction import invariants
from geowave.scalars import qd, qd_sign
from geowave.symmetry import VectorField, apply, commutator, prolong

from conftest import COORDS4, make_scope, parser_for

N = 200
SETTINGS = settings(max_examples=N, deadline=None, derandomize=True,
                    suppress_health_check=[HealthCheck.function_scoped_fixture, HealthCheck.too_slow])

P = parser_for(make_scope())

FACTORS = ["x", "y", "z", "t", "u", "u_x", "u_y", "u_t", "u_z", "u_xt", "u_yy",
           "k(u)", "t^sqrt(7)", "1/t", "y^(1/2)"]
POINT_FACTORS = ["x", "y", "z", "t", "u"]

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)
qds = st.builds(qd, rationals, rationals)
coord = st.sampled_from(COORDS4)


def _poly(factors, max_terms=3, max_deg=3):
    term = st.tuples(st.integers(-4, 4).filter(bool),
                     st.lists(st.sampled_from(factors), max_size=max_deg))
    return st.lists(term, min_size=1, max_size=max_terms).map(
        lambda ts: P(" + ".join(f"({c})" + "".join(f"*{f}" for f in fs) for c, fs in ts)))


exprs = _poly(FACTORS)
point_comps = _poly(POINT_FACTORS, max_terms=2, max_deg=2)


@st.composite
def point_fields(draw):
    xi = {c: draw(point_comps) if draw(st.booleans()) else Expr.const(0) for c in COORDS4}
    return VectorField(COORDS4, xi, draw(point_comps))


# -- scalars ---------------------------------------------------------------

@SETTINGS
@given(qds, qds, qds)
def test_field_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    if a != qd(0):
        assert a * a.inverse() == qd(1)


@SETTINGS
@given(qds)
def test_sign_matches_numeric(a):
    with mpmath.workdps(60):
        v = mpmath.mpf(a.a.numerator) / a.a.denominator + \
            mpmath.mpf(a.b.numerator) / a.b.denominator * mpmath.sqrt(7)
    assert qd_sign(a) == (0 if v == 0 else (1 if v > 0 else -1))


# -- kernel ----------------------------------------------------------------

@SETTINGS
@given(exprs)
def test_round_trip(e):
    assert P(serialize(e)).equals(e)


@SETTINGS
@given(exprs)
def test_normalize_idempotent(e):
    assert P(str(e)).equals(e) and str(P(str(e))) == str(e)


@SETTINGS
@given(exprs, exprs, st.sampled_from([A.coord("x"), A.coord("t"), A.field("u"), A.jet("u", ("x",))]))
def test_product_rule(a, b, v):
    assert diff(a * b, v).equals(diff(a, v) * b + a * diff(b, v))


@SETTINGS
@given(exprs, exprs, st.sampled_from([A.coord("y"), A.jet("u", ("t",))]))
def test_diff_linear(a, b, v):
    assert diff(3 * a - b, v).equals(3 * diff(a, v) - diff(b, v))


@SETTINGS
@given(exprs)
def test_symbolic_zero_is_numeric_zero(e):
    assert probably_zero(e - e).holds
    assert probably_zero(total_derivative(e, "x") - total_derivative(e, "x")).holds


# -- jet -------------------------------------------------------------------

@SETTINGS
@given(exprs, coord, coord)
def test_total_derivatives_commute(e, v, w):
    assert total_derivative(total_derivative(e, v), w).equals(total_derivative(total_derivative(e, w), v))
    assert total_derivative_multi(e, (v, w)).equals(total_derivative_multi(e, (w, v)))


@SETTINGS
@given(exprs, coord)
def test_euler_annihilates_divergence(e, v):
    assert euler_operator(total_derivative(e, v)).is_zero()


WAVE1 = Pde.build(P("(x*t - 3*y*z)/t^2*u_xx - 2*y/t*u_xy + u_xt + u_yz"), COORDS4,
                  leading=A.jet("u", ("x", "t")))


@SETTINGS
@given(exprs, coord)
def test_on_shell_reduce_is_projection(e, v):
    f = total_derivative(e, v)
    once = on_shell_reduce(f, WAVE1)
    assert on_shell_reduce(once, WAVE1).equals(once)


# -- symmetry --------------------------------------------------------------

@SETTINGS
@given(point_fields(), point_fields(), exprs)
def test_prolongation_is_morphism(X, Y, e):
    Z = prolong(commutator(X, Y), 2)
    pX, pY = prolong(X, 2), prolong(Y, 2)
    assert apply(Z, e).equals(apply(pX, apply(pY, e)) - apply(pY, apply(pX, e)))


@SETTINGS
@given(point_fields(), point_fields())
def test_commutator_antisymmetric(X, Y):
    assert (commutator(X, Y) + commutator(Y, X)).is_zero()


@SETTINGS
@given(point_fields(), point_fields(), point_fields())
def test_jacobi(X, Y, Z):
    s = commutator(X, commutator(Y, Z)) + commutator(Y, commutator(Z, X)) + commutator(Z, commutator(X, Y))
    assert s.is_zero()


# -- reduction -------------------------------------------------------------

monomial_fields = st.builds(
    lambda cs, sh: VectorField(
        COORDS4,
        {c: (Expr.const(k) * Expr.atom(A.coord(c)) if not sh else Expr.const(k)) for c, k in cs.items()},
        Expr.const(0)),
    st.dictionaries(coord, st.integers(-3, 3).filter(bool), min_size=1, max_size=4),
    st.booleans(),
)


@SETTINGS
@given(monomial_fields)
def test_invariants_annihilated(X):
    pX = prolong(X, 1)
    for J in invariants(X):
        assert apply(pX, J).is_zero()


# -- oracle ----------------------------------------------------------------

@SETTINGS
@given(exprs, st.integers(0, 10**6))
def test_oracle_deterministic(e, seed):
    r = total_derivative(e, "x") + Expr.atom(A.jet("u", ("z", "z")))
    a = confirm_nonzero(r, trials=2, digits=30, seed=seed)
    b = confirm_nonzero(r, trials=2, digits=30, seed=seed)
    assert a.holds and a.witness == b.witness


def test_instance_count_floor():
    assert SETTINGS.max_examples >= 200
