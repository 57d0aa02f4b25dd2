import csv
import json
import shutil
import subprocess

import numpy as np
import pytest

from folhodge.catalog import make_carriere
from folhodge.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, TOL_ENV, RunConfig, main, parse_term, run
from folhodge.model import dumps, to_dict
from folhodge.operators import assemble


def call(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def test_betti_json(capsys):
    code, out, _ = call(capsys, "betti", "--catalog", "carriere", "--lambda-trace", "3", "-N", "64", "--format", "json")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["betti"] == [1, 1, 0] and data["twisted"] == [0, 0, 0] and data["taut"] is False
    assert data["schema_version"] == 1 and data["command"] == "betti"


def test_verify_exit_zero(capsys):
    code, out, _ = call(capsys, "verify", "--catalog", "carriere", "-N", "32")
    assert code == EXIT_OK
    assert "worst residual" in out and "FAIL" not in out


def test_verify_tolerance_override(capsys, monkeypatch):
    monkeypatch.setenv(TOL_ENV, "1e-30")
    code, out, _ = call(capsys, "verify", "--catalog", "carriere", "-N", "16")
    assert code == EXIT_NUMERICAL and "FAIL" in out
    monkeypatch.setenv(TOL_ENV, "abc")
    assert call(capsys, "verify", "--catalog", "carriere", "-N", "16")[0] == EXIT_USAGE
    monkeypatch.setenv(TOL_ENV, "-1")
    assert call(capsys, "verify", "--catalog", "carriere", "-N", "16")[0] == EXIT_USAGE


def test_spectrum_text(capsys):
    code, out, _ = call(capsys, "spectrum", "--catalog", "carriere", "--op", "twisted-laplacian", "--degree", "0", "--count", "3")
    assert code == EXIT_OK
    values = [float(line.split()[1]) for line in out.splitlines()[1:4]]
    assert abs(values[0] - 0.23156) < 1e-5
    assert abs(values[1] - 39.709) < 1e-3 and abs(values[2] - 39.709) < 1e-3


def test_spectrum_csv_parses_back(capsys, tmp_path):
    path = tmp_path / "spectrum.csv"
    code, _, _ = call(capsys, "spectrum", "--catalog", "carriere", "--count", "5", "--format", "csv", "-o", str(path))
    assert code == EXIT_OK
    rows = list(csv.DictReader(path.open()))
    assert list(rows[0]) == ["operator", "degree", "index", "eigenvalue", "residual"]
    _, out, _ = call(capsys, "spectrum", "--catalog", "carriere", "--count", "5", "--format", "json")
    values = json.loads(out)["eigenvalues"]
    for row, v in zip(rows, values):
        assert float(row["eigenvalue"]) == v
        assert f"{float(row['eigenvalue']):.15g}" == f"{v:.15g}"


@pytest.mark.parametrize(
    "argv",
    [
        ["betti", "--catalog", "carriere", "-N", "32", "--format", "json"],
        ["spectrum", "--catalog", "carriere", "-N", "32", "--count", "4", "--format", "json"],
        ["spectrum", "--catalog", "flat-torus", "-N", "8", "--degree", "1", "--count", "6", "--format", "csv"],
        ["duality", "--catalog", "carriere", "-N", "32", "--format", "json"],
        ["conformal", "--catalog", "carriere", "-N", "32", "--h-term", "sin:0.3:1", "--count", "4", "--format", "json"],
    ],
)
def test_output_is_deterministic(capsys, argv):
    first = call(capsys, *argv)
    second = call(capsys, *argv)
    assert first[0] == EXIT_OK and first[1] == second[1]


def test_duality_and_conformal(capsys):
    code, out, _ = call(capsys, "duality", "--catalog", "carriere", "--format", "json")
    data = json.loads(out)
    assert code == EXIT_OK and data["eigenvalue_gap"] < 1e-8 and data["star_residual"] < 1e-8
    code, out, _ = call(capsys, "conformal", "--catalog", "carriere", "--h-term", "sin:0.3:1")
    assert code == EXIT_OK and "alignment" in out
    assert call(capsys, "conformal", "--catalog", "carriere")[0] == EXIT_USAGE


def test_suspend(capsys):
    code, out, _ = call(capsys, "suspend", "--catalog", "suspension-7.2", "--format", "json")
    data = json.loads(out)
    assert code == EXIT_OK and data["betti"] == [1, 4, 1, 0] and data["euler"] == -2
    assert "b~2 - b~1 = -2" in data["constraints"]
    code, out, _ = call(capsys, "suspend", "--preset", "7.3")
    assert code == EXIT_OK and "constraint b~2 - 2b~1 = -4" in out
    code, out, _ = call(capsys, "suspend", "--base-betti", "1,2,1", "--taut")
    assert code == EXIT_OK and "betti [1, 2, 1]" in out
    assert call(capsys, "suspend")[0] == EXIT_USAGE
    assert call(capsys, "suspend", "--base-betti", "1,0")[0] == EXIT_USAGE


def test_usage_errors(capsys):
    assert call(capsys, "betti", "--catalog", "nosuch")[0] == EXIT_USAGE
    assert call(capsys, "betti", "--catalog", "suspension-7.2")[0] == EXIT_USAGE
    assert call(capsys, "betti")[0] == EXIT_USAGE
    assert call(capsys, "betti", "--catalog", "carriere", "--lambda", "2", "--lambda-trace", "3")[0] == EXIT_USAGE
    assert call(capsys, "betti", "--catalog", "carriere", "--format", "csv")[0] == EXIT_USAGE
    assert call(capsys, "spectrum", "--catalog", "carriere", "--count", "0")[0] == EXIT_USAGE
    assert call(capsys, "spectrum", "--catalog", "carriere", "-N", "8", "--count", "100")[0] == EXIT_USAGE
    assert call(capsys, "betti", "--model", "/nonexistent/model.json")[0] == EXIT_USAGE
    assert call(capsys, "frobnicate")[0] == EXIT_USAGE
    assert call(capsys, "conformal", "--catalog", "carriere", "--h-term", "tan:1:1")[0] == EXIT_USAGE


def test_parse_term():
    assert parse_term("sin:0.3:1") == ("sin", 0.3, (1,))
    assert parse_term("cos:0.1:0,1") == ("cos", 0.1, (0, 1))


def test_run_config_check(capsys):
    assert run(RunConfig("betti", catalog="carriere", model_path="x.json")) == EXIT_USAGE
    assert run(RunConfig("betti", catalog="carriere", identity_tol=0)) == EXIT_USAGE


def test_model_file_round_trip(capsys, tmp_path):
    path = tmp_path / "carriere.json"
    assert call(capsys, "export-model", "--catalog", "carriere", "-o", str(path))[0] == EXIT_OK
    assert path.read_text() == dumps(make_carriere())
    code, out, _ = call(capsys, "betti", "--model", str(path), "--format", "json")
    assert code == EXIT_OK and json.loads(out)["betti"] == [1, 1, 0]


def test_non_spd_metric_file(capsys, tmp_path):
    data = to_dict(make_carriere(n=16))
    data["metric"] = [[1.0, 2.0], [2.0, 1.0]]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    code, _, err = call(capsys, "betti", "--model", str(path))
    assert code == EXIT_VALIDATION and "metric" in err
    code, out, _ = call(capsys, "verify", "--model", str(path))
    assert code == EXIT_VALIDATION and "metric" in out


def test_kappa_not_closed_file(capsys, tmp_path):
    data = to_dict(make_carriere(n=16))
    data["kappa"] = {"2": {"1": [0.0, -0.5], "-1": [0.0, 0.5]}}
    path = tmp_path / "open.json"
    path.write_text(json.dumps(data))
    code, _, err = call(capsys, "betti", "--model", str(path))
    assert code == EXIT_VALIDATION
    assert "relative |dκ| =" in err


def test_schema_violation_file(capsys, tmp_path):
    data = to_dict(make_carriere(n=16))
    data["orientation"] = 5
    path = tmp_path / "schema.json"
    path.write_text(json.dumps(data))
    code, _, err = call(capsys, "betti", "--model", str(path))
    assert code == EXIT_VALIDATION and "orientation" in err


def test_dump_and_sidecar(capsys, tmp_path):
    path = tmp_path / "d0.bin"
    code, _, _ = call(capsys, "dump", "--catalog", "carriere", "-N", "16", "--op", "d", "--degree", "0", "-o", str(path))
    assert code == EXIT_OK
    side = json.loads((tmp_path / "d0.bin.json").read_text())
    model = make_carriere(n=16)
    assert side["name"] == "d" and side["k"] == 0 and side["dims"] == [32, 16]
    assert side["model_hash"] == model.fingerprint
    raw = np.fromfile(path, dtype="<f8").reshape(-1, 2)
    mat = (raw[:, 0] + 1j * raw[:, 1]).reshape(side["dims"], order="F")
    assert np.array_equal(mat, assemble(model, "d", 0).dense())
    assert call(capsys, "dump", "--catalog", "carriere", "--op", "nosuch", "-o", str(path))[0] == EXIT_USAGE
    assert call(capsys, "dump", "--catalog", "carriere")[0] == EXIT_USAGE


def test_console_script_installed():
    exe = shutil.which("folhodge")
    if exe is None:
        pytest.skip("console script not on PATH")
    proc = subprocess.run([exe, "suspend", "--preset", "7.2"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "euler -2" in proc.stdout
