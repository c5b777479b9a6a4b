from __future__ import annotations

import pytest

from geowave import checks as K
from geowave.parser import ModelError

OPTS = K.Options(seed=42)


def _names(records):
    return {r.name.split("[")[0] for r in records}


@pytest.mark.parametrize("case,count", [("i", 15), ("iv", 8)])
def test_lie_cases_hold(asd, case, count):
    recs = K.run_symmetries(asd, case, OPTS)
    assert len(_names(recs)) == count and all(r.holds for r in recs)


@pytest.mark.parametrize("case,count,bad", [("ii", 8, "ii_X2"), ("iii", 14, "iii_X14")])
def test_lie_cases_with_printed_erratum(asd, case, count, bad):
    recs = K.run_symmetries(asd, case, OPTS)
    assert len(_names(recs)) == count
    failing = [r for r in recs if not r.holds]
    assert [r.name for r in failing] == [bad]
    assert failing[0].witness and failing[0].confirmed


@pytest.mark.parametrize("name", ["ii_X2_fixed", "iii_X14_fixed"])
def test_corrected_generators_hold(asd, name):
    recs = K.run_symmetries(asd, None, K.Options(seed=42, corrected=True))
    assert [r.holds for r in recs if r.name == name] == [True]


def test_corrected_hidden_by_default(asd):
    assert "ii_X2_fixed" not in _names(K.run_symmetries(asd, None, OPTS))


def test_noether_all_hold(asd):
    recs = [r for r in K.run_noether(asd, "i", OPTS) if ":" not in r.name]
    assert len(recs) == 15 and all(r.holds for r in recs)


def test_noether_density_of_n8(asd):
    recs = {r.name: r for r in K.run_noether(asd, "i", OPTS)}
    assert recs["N8:density"].holds


def test_multiplier_records(asd):
    got = {r.name: r.holds for r in K.run_multipliers(asd, None, OPTS)}
    assert got == {"Q1": True, "Q2": False, "Q3": True, "Q4": False, "Q5": False}


def test_lagrangian_units(asd):
    recs = {r.name: r for r in K.run_lagrangians(asd, None, K.Options(corrected=True))}
    assert recs["L0"].holds and recs["L0"].detail["unit"] == "-1/2"
    assert recs["Lplus"].holds and not recs["L"].holds


def test_box_against_wave1_i(asd):
    pde, rec = K.run_box(asd, "0", "wave1_i", OPTS)
    assert rec.holds and rec.detail["unit"] == "1/4"


def test_erratum_record_shape(asd):
    rec = next(r for r in K.run_multipliers(asd, None, OPTS) if r.name == "Q5")
    e = K.erratum_record(rec)
    assert e["kind"] == "erratum" and len(e["witness_points"]) == len(e["witness_values"]) > 0


def test_commutators_antisymmetric(asd):
    names, table, rec = K.run_commutators(asd, "iv", OPTS)
    assert rec.holds and len(names) == 8
    assert all(table[i][i] == "0" for i in range(len(names)))


def test_section_without_equation_rejected():
    from geowave.parser import parse_model

    m = parse_model('[coords]\nlist = "t, x"\n[field]\nname = "u"\n[multiplier q]\nq = "1"\n')
    with pytest.raises(ModelError, match="names no equation"):
        K.run_multipliers(m, None, OPTS)
