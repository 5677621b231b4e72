import csv
import io
import json
import math

import numpy as np
import pytest

from isoprofile.cli import (
    EXIT_FAILED,
    EXIT_OK,
    EXIT_USAGE,
    RunConfig,
    UsageError,
    main,
    read_profile_csv,
    resolve_seed,
    run,
)
from isoprofile.space_forms import SpaceForm, model_profile_at


def invoke(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array([[float(x) for x in r] for r in rows[1:]])


def test_model_coarse_grid_ends_at_total_volume(capsys):
    code, out, _ = invoke(["model", "--dim", "2", "--curvature", "1", "--half", "--grid", "8"], capsys)
    assert code == EXIT_OK
    header, table = parse_csv(out)
    assert header == ["V", "I", "Y", "h"]
    assert table.shape == (8, 4)
    assert table[-1, 0] == pytest.approx(2 * math.pi, abs=1e-9)
    assert table[-1, 1] == 0.0
    assert np.all(np.diff(table[:, 0]) > 0)


def test_model_csv_matches_exact_profile(capsys):
    code, out, _ = invoke(["model", "--dim", "3", "--curvature", "-1", "--grid", "40"], capsys)
    assert code == EXIT_OK
    _, table = parse_csv(out)
    V, I = table[:, 0], table[:, 1]
    np.testing.assert_allclose(I[1:], model_profile_at(SpaceForm(3, -1.0), V[1:]), rtol=1e-12)
    # unbounded volume leaves the normalized column empty
    assert np.all(np.isnan(table[:, 3]))


def test_csv_round_trip_is_bit_identical(tmp_path, capsys):
    code, out, _ = invoke(["model", "--curvature", "1", "--grid", "64"], capsys)
    assert code == EXIT_OK
    path = tmp_path / "profile.csv"
    path.write_text(out)
    curve = read_profile_csv(str(path), 2)
    _, table = parse_csv(out)
    assert np.array_equal(curve.V, table[:, 0]) and np.array_equal(curve.I, table[:, 1])
    assert curve.bounded and curve.total_volume == table[-1, 0]
    # writing the parsed values back reproduces the same text
    again = "\n".join(",".join("%.17g" % x for x in row) for row in table)
    assert again == "\n".join(out.strip().splitlines()[1:])


def test_bounds_json_for_sphere(capsys):
    code, out, _ = invoke(["bounds", "--dim", "2", "--curvature", "1", "--format", "json"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert set(doc) == {"config", "results", "reports"}
    assert doc["results"]["diameter_upper"] == pytest.approx(math.pi, abs=1e-6)
    assert doc["results"]["eigenvalue_lower"] == 2.0


def test_compare_body_passes(capsys):
    code, out, _ = invoke(["compare", "--body", "unit_square", "--tol", "1e-10"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["results"]["passed"] is True
    assert all(r["passed"] for r in doc["reports"])


def test_compare_input_detects_violation(tmp_path, capsys):
    # a profile above the flat half-plane bound fails the upper comparison
    V = np.linspace(0, 4, 50)
    path = tmp_path / "bad.csv"
    path.write_text("V,I\n" + "\n".join(f"{v:.17g},{2 * math.sqrt(2 * math.pi * v):.17g}" for v in V))
    code, out, _ = invoke(["compare", "--input", str(path)], capsys)
    assert code == EXIT_FAILED
    assert json.loads(out)["reports"][0]["passed"] is False


def test_compare_input_model_on_sphere(tmp_path, capsys):
    code, out, _ = invoke(["model", "--curvature", "1", "--grid", "128"], capsys)
    path = tmp_path / "sphere.csv"
    path.write_text(out)
    code, out, _ = invoke(["compare", "--input", str(path), "--curvature", "1"], capsys)
    assert code == EXIT_OK
    names = [r["name"] for r in json.loads(out)["reports"]]
    assert len(names) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["model", "--grid", "1"],
        ["compare", "--grid", "8", "--body", "unit_square"],
        ["body", "--body", "unit_square", "--samples", "10"],
        ["model", "--tol", "0"],
        ["model", "--dim", "1"],
        ["body"],
        ["body", "--body", "disk", "--dim", "3"],
        ["compare"],
        ["compare", "--body", "unit_square", "--input", "x.csv"],
        ["bounds", "--curvature", "0"],
        ["compare", "--input", "/nonexistent/profile.csv"],
        ["body", "--body", "wedge", "--param", "7"],
    ],
)
def test_invalid_input_exits_2(argv, capsys):
    code, out, err = invoke(argv, capsys)
    assert code == EXIT_USAGE
    assert out == ""
    assert "error" in err


def test_seed_resolution():
    assert resolve_seed(None, {}) == 42
    assert resolve_seed(None, {"ISOPROFILE_SEED": "7"}) == 7
    assert resolve_seed(3, {"ISOPROFILE_SEED": "7"}) == 3
    with pytest.raises(UsageError):
        resolve_seed(None, {"ISOPROFILE_SEED": "seven"})


def test_bad_seed_env_exits_2(monkeypatch, capsys):
    monkeypatch.setenv("ISOPROFILE_SEED", "nope")
    code, _, err = invoke(["model"], capsys)
    assert code == EXIT_USAGE and "ISOPROFILE_SEED" in err


def test_seed_env_reaches_config(monkeypatch, capsys):
    monkeypatch.setenv("ISOPROFILE_SEED", "11")
    code, out, _ = invoke(["model", "--format", "json", "--grid", "4", "--curvature", "1"], capsys)
    assert code == EXIT_OK and json.loads(out)["config"]["seed"] == 11
    code, out, _ = invoke(["model", "--format", "json", "--grid", "4", "--curvature", "1", "--seed", "5"], capsys)
    assert json.loads(out)["config"]["seed"] == 5


def test_body_json_has_no_nan(capsys):
    code, out, _ = invoke(["body", "--body", "half_plane", "--format", "json", "--grid", "32"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert all(x is None for x in doc["results"]["h"])


def test_verify_reports_are_deterministic():
    docs = []
    for _ in range(2):
        buf = io.StringIO()
        run(RunConfig("verify", samples=20_000, seed=5), buf)
        docs.append(json.loads(buf.getvalue()))
    assert docs[0]["reports"] == docs[1]["reports"]
    strip = lambda rows: [{k: v for k, v in r.items() if k != "runtime"} for r in rows]  # noqa: E731
    assert strip(docs[0]["results"]) == strip(docs[1]["results"])


def test_verify_default_run_passes(capsys):
    code, out, err = invoke(["verify", "--format", "csv"], capsys)
    assert code == EXIT_OK
    assert err.count("[PASS]") == 12
    assert len(out.strip().splitlines()) == 13
