from __future__ import annotations

import pytest

from geowave.kernel import atoms as A
from geowave.kernel.expr import coefficient_of
from geowave.parser import ModelError, ParseError, load_model, parse_bindings, parse_model, serialize
from geowave.scalars import qd

MINI = """
[coords]
list = "t, x"

[field]
name = "u"

[metric]
g[0][0] = "1"
g[1][1] = "-1"
"""


def test_wave1_coefficient(P, asd):
    delta = asd.section("equation", "wave1")
    c, _, _ = coefficient_of(asd.expr(delta.get("delta")), A.jet("u", ("x", "x")))
    assert c.equals(P("(x*t - 3*y*z)/t^2"))


def test_irrational_exponent_atom(P):
    e = P("t^(2-sqrt(7))")
    (m, c), = e.num.items()
    (atom, power), = m
    assert atom == A.coord("t") and power == qd(2, -1)


def test_malformed_jet_reports_column(P):
    with pytest.raises(ParseError) as exc:
        P("u_")
    assert exc.value.column == 2


def test_unknown_name(P):
    with pytest.raises(ParseError):
        P("w + 1")


def test_serialize_round_trip(P):
    e = P("(x*t - 3*y*z)/t^2*u_xx - 2*y/t*u_xy + u_xt + u_yz - k(u)")
    assert P(serialize(e)).equals(e)


def test_asd_model(asd):
    assert asd.coordinates == ["x", "y", "z", "t"] and asd.radical == 7


def test_kerr_model(kerr):
    assert kerr.scope.params == ["M", "k"] and kerr.scope.angular == {"theta"}


def test_asymmetric_metric_rejected():
    from geowave.geometry import GeometryError, Metric

    bad = MINI + 'g[0][1] = "1"\ng[1][0] = "2"\n'
    with pytest.raises((ModelError, GeometryError), match="metric not symmetric"):
        Metric.from_model(parse_model(bad))


def test_unknown_section_and_key():
    with pytest.raises(ModelError, match="unknown section"):
        parse_model(MINI + "[widget w]\n")
    with pytest.raises(ModelError, match="unknown key"):
        parse_model(MINI + '[equation e]\ndelta = "u_tt"\ncolour = "red"\n')


def test_equation_needs_delta_or_box():
    with pytest.raises(ModelError):
        parse_model(MINI + '[equation e]\nleading = "u_tt"\n')


def test_reading_values_checked():
    with pytest.raises(ModelError, match="reading"):
        parse_model(MINI + '[equation e]\ndelta = "u_tt"\nreading = "maybe"\n')


def test_bindings(asd):
    b = parse_bindings(asd, "f1 = x")
    assert str(b["f1"]) == "x"
    assert parse_bindings(asd, "symbolic") == {}


def test_load_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_model(tmp_path / "absent.gw")
