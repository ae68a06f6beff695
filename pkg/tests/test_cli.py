import csv
import io
import json
import subprocess
import sys

import pytest

from conformal_solitons.cli import main
from conformal_solitons.errors import ValidationError
from conformal_solitons.runner import LEMMA_IDENTITIES, SUITES, run_scenario, validate_config

SPHERE = {"geometry": "sphere", "n": 2, "field": {"gamma": [0, 0, 1]}, "seed": 42, "samples": 12}


def write(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def run_cli(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_sphere(tmp_path, capsys):
    code, out, err = run_cli(["verify", write(tmp_path, SPHERE)], capsys)
    report = json.loads(out)
    assert code == 0 and report["all_pass"]
    assert list(report["suites"]) == list(SUITES)
    assert all(s["pass"] for s in report["suites"].values())
    assert report["suites"]["classify"]["verdict"] == "Spherical"
    assert report["run"]["seed"] == 42 and report["run"]["samples"] == 12
    assert report["suites"]["lemmas"]["checks"]["l32"]["identity"] == LEMMA_IDENTITIES["l32"]
    assert "wall time" in err


def test_saddle_control_not_applicable(tmp_path, capsys):
    cfg = {"geometry": "saddle_graph", "n": 2, "seed": 1, "samples": 8, "suites": ["concircular", "classify", "codazzi"],
           "field": {"a": [0.2, 0.1, 1.0], "beta": 0.5}}
    code, out, _ = run_cli(["verify", write(tmp_path, cfg)], capsys)
    suites = json.loads(out)["suites"]
    assert suites["concircular"]["pass"] is None and suites["concircular"]["k"] is not None
    assert suites["classify"]["pass"] is None and suites["classify"]["verdict"] is None
    assert suites["codazzi"]["pass"] is True
    assert code == 0


def test_saddle_demo_fails_soliton_suites(capsys):
    code, out, _ = run_cli(["demo", "saddle_graph", "--samples", "6"], capsys)
    suites = json.loads(out)["suites"]
    assert code == 1
    assert suites["soliton"]["pass"] is False
    assert suites["lemmas"]["checks"]["l32"]["pass"] is False
    assert suites["lemmas"]["checks"]["l34"]["pass"] is True


def test_invalid_matrix_path(tmp_path, capsys):
    cfg = dict(SPHERE, field={"B": [[1, 0, 0], [0, 0, 0], [0, 0, 0]]})
    with pytest.raises(ValidationError) as info:
        validate_config(cfg)
    assert info.value.path == "field.B[0][0]"
    code, out, err = run_cli(["verify", write(tmp_path, cfg)], capsys)
    assert code == 2 and out == "" and "field.B[0][0]" in err


@pytest.mark.parametrize("patch, path", [
    ({"colour": "red"}, "colour"),
    ({"field": {"gamma": [0, 0, 1], "delta": 1}}, "field.delta"),
    ({"suites": ["lemmas", "ricci"]}, "suites[1]"),
    ({"samples": 2}, "samples"),
    ({"seed": -1}, "seed"),
    ({"seed": 2**64}, "seed"),
    ({"geometry": "torus"}, "geometry"),
    ({"field": {"gamma": [0, 1]}}, "field.gamma"),
    ({"tolerance_overrides": {"lemmas": "small"}}, "tolerance_overrides.lemmas"),
    ({"tolerance_overrides": {"speed": 1.0}}, "tolerance_overrides.speed"),
])
def test_validation_paths(patch, path):
    with pytest.raises(ValidationError) as info:
        validate_config({**SPHERE, **patch})
    assert info.value.path == path


def test_quadric_rejects_flat_parameters():
    with pytest.raises(ValidationError) as info:
        validate_config({"geometry": "latitude_sphere", "n": 2, "field": {"beta": 1.0}})
    assert info.value.path == "field.beta"


def test_malformed_json(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{\"geometry\": ", encoding="utf-8")
    code, _, err = run_cli(["verify", str(path)], capsys)
    assert code == 2 and "invalid JSON" in err


def test_missing_file(tmp_path, capsys):
    code, _, _ = run_cli(["verify", str(tmp_path / "nope.json")], capsys)
    assert code == 2


def test_byte_identical_reports(tmp_path, capsys):
    cfg = write(tmp_path, dict(SPHERE, geometry="hyperbolic", field={"gamma": [1, 0.2, 0]}))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run_cli(["verify", cfg, "--out", str(a)], capsys)[0] == 0
    assert run_cli(["verify", cfg, "--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_seed_changes_points(tmp_path, capsys):
    cfg = write(tmp_path, SPHERE)
    _, one, _ = run_cli(["verify", cfg], capsys)
    _, two, _ = run_cli(["verify", cfg, "--seed", "43"], capsys)
    assert json.loads(one)["statistics"] != json.loads(two)["statistics"]
    assert json.loads(two)["run"]["seed"] == 43


def test_tol_override_fails_suite(tmp_path, capsys):
    cfg = write(tmp_path, dict(SPHERE, suites=["soliton", "codazzi"]))
    code, out, _ = run_cli(["verify", cfg, "--tol", "soliton=0"], capsys)
    report = json.loads(out)
    assert report["suites"]["soliton"]["tolerance"] == 0.0
    assert code == (0 if report["suites"]["soliton"]["max_residual"] == 0 else 1)
    code, _, err = run_cli(["verify", cfg, "--tol", "soliton"], capsys)
    assert code == 2


def test_csv_summary(tmp_path, capsys):
    cfg = write(tmp_path, dict(SPHERE, suites=["lemmas", "gauss"]))
    code, out, _ = run_cli(["verify", cfg, "--format", "csv-summary"], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["suite", "max_residual", "tolerance", "pass"]
    labels = [r[0] for r in rows[1:]]
    assert labels == ["lemmas", "lemmas.l31", "lemmas.l32", "lemmas.l33", "lemmas.l34", "gauss"]
    assert all(r[3] == "true" for r in rows[1:])


def test_catalog_command(tmp_path, capsys):
    code, out, _ = run_cli(["catalog"], capsys)
    listing = json.loads(out)
    assert code == 0 and len(listing) == 7
    target = tmp_path / "catalog.json"
    assert run_cli(["catalog", "--n", "3", "--out", str(target)], capsys)[0] == 0
    assert all(e["n"] == 3 for e in json.loads(target.read_text()))


@pytest.mark.parametrize("entry", ["flat_plane", "pseudo_hyperbolic_zero", "latitude_sphere"])
def test_demo_passes(entry, capsys):
    code, out, _ = run_cli(["demo", entry, "--samples", "8"], capsys)
    assert code == 0 and json.loads(out)["all_pass"]


def test_report_is_strict_json(capsys):
    report = run_scenario(validate_config({"geometry": "saddle_graph", "n": 2, "samples": 4}))
    text = json.dumps(report, allow_nan=False)
    assert "NaN" not in text


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "conformal_solitons", "catalog"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)[1]["name"] == "sphere"
