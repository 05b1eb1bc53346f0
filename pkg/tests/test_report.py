import json
import math

from twistorforms.report import SCHEMA_VERSION, Check, SuiteReport, check_max, sci, to_csv, to_json


def test_sci_has_six_significant_digits():
    assert sci(1.0) == "1.00000e+00"
    assert sci(3.14159265e-9) == "3.14159e-09"
    assert sci(float("nan")) == "NaN"
    assert sci(float("inf")) == "Infinity"


def test_check_status():
    assert Check("a", "", 1e-9, 1e-8).passed
    assert not Check("a", "", 1e-7, 1e-8).passed
    assert not Check("a", "", float("nan"), 1.0).passed
    assert Check("a", "", float("nan"), 1.0, skipped=True).passed
    assert check_max("b", "", [1e-3, 5e-3, 2e-3], 1e-2).max_residual == 5e-3
    assert Check("a", "x", 2e-6, 1e-5).line().startswith("PASS a: 2.00000e-06")


def test_json_rendering_is_stable():
    rep = SuiteReport("demo", [Check("r", "anchor", 1.234567891e-7, 1e-5)], {"m": 2, "h": 5e-3}, wall_time=0.123)
    text = to_json(rep.to_dict())
    data = json.loads(text)
    assert data["schema"] == SCHEMA_VERSION
    assert '"max_residual": 1.23457e-07' in text
    assert '"h": 5.00000e-03' in text
    assert data["checks"][0]["pass"] is True
    assert math.isclose(data["wall_time"], 0.123)
    assert text == to_json(rep.to_dict())


def test_csv_rows():
    rep = SuiteReport("demo", [Check("r", "anchor", 1e-7, 1e-5), Check("s", "", 0.0, 0.0, skipped=True)])
    lines = to_csv([rep]).strip().splitlines()
    assert lines[0] == "suite,name,anchor,residual,tol,pass"
    assert lines[1] == "demo,r,anchor,1.00000e-07,1.00000e-05,true"
    assert lines[2].endswith(",skip")
