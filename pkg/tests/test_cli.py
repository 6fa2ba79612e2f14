import json

import pytest
from conftest import GALLERY

from liftcalc.cli import main
from liftcalc.report import SuiteReport
from liftcalc.suites import ANCHORS, run_suite

BROKEN = GALLERY / "broken" / "so3_broken.model"


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", ["tangent2.model", "so3.model", "cotangent_x0.model"])
def test_validate_passes(capsys, name):
    code, out, _ = run(capsys, "validate", str(GALLERY / name))
    assert code == 0 and "FAIL" not in out


def test_validate_broken_fails(capsys):
    code, out, _ = run(capsys, "validate", str(BROKEN))
    assert code == 1 and "[FAIL]" in out and "Jacobi" in out


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "suite", "lifts", str(GALLERY / "so3.model"), "--points", "0")[0] == 2
    assert run(capsys, "suite", "nope", str(GALLERY))[0] == 2
    assert run(capsys, "validate")[0] == 2
    code, _, err = run(capsys, "validate", str(tmp_path / "missing.model"))
    assert code == 2 and "cannot read" in err


def test_bad_model_reports_position(capsys, tmp_path):
    p = tmp_path / "bad.model"
    p.write_text((GALLERY / "so3.model").read_text().replace('"x0^2"', '"x0^ + 2"', 1))
    code, _, err = run(capsys, "validate", str(p))
    assert code == 2 and "bad.model" in err and "position" in err


def test_json_schema_and_roundtrip(capsys):
    code, out, _ = run(capsys, "suite", "lifts", str(GALLERY / "tangent1.model"), "--points", "5", "--format", "json")
    d = json.loads(out)
    assert code == 0 and set(d) == {"suite", "seed", "checks"}
    assert d["checks"] and all(set(c) == {"label", "anchor", "residual", "tol", "pass", "points", "ms"} for c in d["checks"])
    assert all(c["pass"] == (c["residual"] < c["tol"]) for c in d["checks"])
    assert SuiteReport.from_json(out).to_json() == out.rstrip("\n")


def test_same_seed_is_byte_identical(capsys):
    args = ("suite", "pair", str(GALLERY / "tangent2.model"), "--points", "5", "--seed", "9", "--format", "json", "--no-timing")
    first = run(capsys, *args)[1]
    assert first == run(capsys, *args)[1]
    assert first != run(capsys, *args[:-3], "10", "--format", "json", "--no-timing")[1]


def test_suite_all_covers_every_anchor():
    report = run_suite("all", GALLERY, points=5, seed=1)
    assert report.anchors() == set(ANCHORS)


def test_flow_linear_field(capsys):
    code, out, _ = run(capsys, "flow", str(GALLERY / "tangent2.model"), "xi", "--t", "1", "--steps", "64")
    assert code == 0 and "flow map is linear" in out


def test_flow_vertical_lift_is_affine(capsys):
    code, out, _ = run(capsys, "flow", str(GALLERY / "tangent2.model"), "up", "--t", "1", "--steps", "8")
    assert code == 0 and "affine, not linear" in out


def test_flow_time_zero(capsys):
    code, out, _ = run(capsys, "flow", str(GALLERY / "tangent2.model"), "xi", "--t", "0", "--steps", "4")
    assert code == 0 and "defect 0.000e+00" in out


def test_flow_unknown_field(capsys):
    code, _, err = run(capsys, "flow", str(GALLERY / "tangent2.model"), "nope", "--t", "1", "--steps", "4")
    assert code == 2 and "known" in err
