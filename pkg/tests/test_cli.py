import csv
import io
import json
import subprocess
import sys

import pytest

from crlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_models_table(capsys):
    code, out, _ = run(capsys, "models")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 4
    assert {l.split()[0] for l in lines[1:]} == {"heisenberg", "sphere", "group3d"}
    code, out, _ = run(capsys, "models", "--json")
    assert code == 0 and len(json.loads(out)) == 3


def test_usage_errors(capsys):
    assert run(capsys, "models", "--bogus")[0] == 2
    assert run(capsys, "verify", "--model", "sphere", "--suite", "nope", "--points", "1")[0] == 2
    assert run(capsys, "verify")[0] == 2
    assert run(capsys, "spectrum", "--model", "heisenberg")[0] == 2
    assert run(capsys, "spectrum", "--model", "sphere", "--degree", "99")[0] == 2
    assert run(capsys, "verify", "--model", "group3d", "--c1", "x")[0] == 2


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"model": "heisenberg", "n": 1, "suite": "ricci", "points": 2}))
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, "verify", "--config", str(cfg), "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["model"] == {"kind": "heisenberg", "n": 1} and doc["summary"]["points"] == 2
    cfg.write_text(json.dumps({"model": "sphere", "colour": "blue"}))
    code, _, err = run(capsys, "verify", "--config", str(cfg))
    assert code == 2 and "colour" in err
    cfg.write_text("{not json")
    assert run(capsys, "verify", "--config", str(cfg))[0] == 2


def test_verify_exit_codes(tmp_path, capsys):
    out = tmp_path / "g.json"
    code, text, _ = run(capsys, "verify", "--model", "group3d", "--c1", "2", "--c2", "1",
                        "--suite", "pointwise", "--points", "3", "--out", str(out))
    assert code == 0 and "skipped" in text
    statuses = {c["id"]: c["status"] for c in json.loads(out.read_text())["checks"]}
    assert statuses["e:hessian"] == "skipped" and statuses["currr"] == "pass"
    code, _, _ = run(capsys, "verify", "--model", "sphere", "--n", "1", "--tol", "1e-30",
                     "--suite", "ricci", "--points", "2")
    assert code == 1


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "verify", "--model", "heisenberg", "--suite", "ricci",
                       "--points", "1", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows and all(r["status"] == "pass" for r in rows)


def _csv_rows(text):
    return list(csv.reader(l for l in text.splitlines() if not l.startswith("#")))


def test_spectrum_sublaplacian(capsys):
    code, out, _ = run(capsys, "spectrum", "--model", "sphere", "--n", "1", "--degree", "3",
                       "--operator", "sublaplacian")
    rows = _csv_rows(out)
    assert code == 0
    assert rows[0] == ["operator", "N", "value", "multiplicity", "bidegrees"]
    # the constant comes first, then the first eigenvalue
    assert float(rows[1][2]) == 0 and float(rows[2][2]) == pytest.approx(2.0, abs=1e-9)
    assert rows[2][3] == "4"
    assert "# certificate:" in out and "pass" in out


def test_spectrum_paneitz_and_riemannian(capsys):
    code, out, _ = run(capsys, "spectrum", "--model", "sphere", "--n", "1", "--degree", "3",
                       "--operator", "paneitz", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["min_eigenvalue"] >= -1e-9 and doc["certificate"] is None
    code, out, _ = run(capsys, "spectrum", "--model", "sphere", "--degree", "1",
                       "--operator", "riemannian_laplacian")
    rows = _csv_rows(out)
    assert code == 0 and float(rows[2][2]) == pytest.approx(3.0)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "crlab", "models"], capture_output=True, text=True)
    assert proc.returncode == 0 and "sphere" in proc.stdout
