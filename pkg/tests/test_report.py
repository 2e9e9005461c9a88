import math

import pytest

from dpl.report import SCALING_HEADER, CharacteristicReport, CheckReport, emit, read_csv, read_json, rows_to_csv


def sample():
    return CheckReport(check="wp2", variant="dyadic", dim=2, depth=3, empirical_constant=0.1 + 0.2,
                       worst_region="([0,1)x[0,1), j=1)", params={"z": 1, "a": [1.5, 2]}, cap=1.0)


def test_json_is_byte_stable_and_sorted():
    a, b = emit(sample(), "json"), emit(sample(), "json")
    assert a == b
    d = read_json(a)
    assert list(d) == sorted(d)
    assert list(d["params"]) == ["a", "z"]
    assert b'"empirical_constant": 0.30000000000000004' in a


def test_json_roundtrip():
    rep = sample()
    back = CheckReport.from_dict(read_json(emit(rep, "json")))
    assert back.to_dict() == rep.to_dict()


def test_verdict_rules():
    rep = sample()
    assert rep.passed
    rep.cap = 0.0
    assert not rep.passed
    rep.cap = None
    rep.empirical_constant = math.inf
    assert not rep.passed
    assert not CheckReport(check="x", violations=["boom"]).passed


def test_csv_header_schema():
    rows = [{"alpha": 0.0, "a2d": 1.0, "a2r": 1.0, "norm": 2.0, "ratio": 2.0, "slope": 0.5}]
    header, parsed = read_csv(rows_to_csv(rows, SCALING_HEADER))
    assert header == ["alpha", "a2d", "a2r", "norm", "ratio", "slope"]
    assert float(parsed[0]["norm"]) == 2.0


def test_characteristic_report_and_bad_format():
    rep = CharacteristicReport(1.25, "[0,1)", 2.0)
    assert read_json(emit(rep))["value"] == 1.25
    with pytest.raises(ValueError):
        emit(rep, "xml")
