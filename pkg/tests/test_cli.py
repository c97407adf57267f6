import csv
import io
import json
import subprocess
import sys

import pytest

from kepler_cz.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_catalog_json(capsys):
    code, out, _ = run(capsys, "catalog", "-c", "-2.1", "--covers", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "catalog"
    assert set(doc) == {"command", "config", "rows", "diagnostics"}
    kinds = [r["kind"] for r in doc["rows"]]
    assert kinds.count("family") == 7
    assert any(r["index"] == "31/2" or r["index"] == "63/2" for r in doc["rows"])


def test_catalog_csv(capsys):
    code, out, _ = run(capsys, "catalog", "-c", "-2.1", "--covers", "3", "--format", "csv")
    assert code == 0
    assert "\r\n" in out
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 19
    assert {"kind", "k", "l", "N", "E", "period", "index", "L3_sign"} <= set(rows[0])


def test_deterministic(capsys):
    first = run(capsys, "catalog", "-c", "-2.1", "--format", "csv")[1]
    second = run(capsys, "catalog", "-c", "-2.1", "--format", "csv")[1]
    assert first == second


@pytest.mark.parametrize(
    "argv,code",
    [
        (["catalog", "-c", "-2.5"], 2),
        (["catalog", "-c", "-1.0"], 2),
        (["catalog", "--bogus"], 1),
        (["ledger", "-c", "-1.4"], 2),
    ],
)
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_non_generic_names_offender(capsys):
    code, _, err = run(capsys, "catalog", "-c", "-2.5", "--kmax", "11")
    assert code == 2
    assert "8" in err


def test_index_commands(capsys):
    code, out, _ = run(capsys, "index", "-c", "-2.1", "--orbit", "retrograde", "--numeric")
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["closed_form"] == "2" and row["numeric"] == "2"
    code, out, _ = run(capsys, "index", "-c", "-2.1", "--family", "8,1")
    assert json.loads(out)["rows"][0]["closed_form"] == "63/2"
    code, out, _ = run(capsys, "index", "-c", "-2.1", "--orbit", "collision+", "--cover", "3")
    assert json.loads(out)["rows"][0]["closed_form"] == "12"


def test_bifurcation_and_moduli(capsys):
    code, out, _ = run(capsys, "bifurcation", "--family", "8,1")
    row = json.loads(out)["rows"][0]
    assert code == 0 and row["c_minus"] == -2.5 and row["c_plus"] == -1.5
    code, out, _ = run(capsys, "moduli", "-E", "-0.5")
    assert code == 0 and len(json.loads(out)["rows"]) >= 4


def test_ledger_and_verify(capsys):
    code, out, _ = run(capsys, "ledger", "-c", "-2.1", "--cap", "10")
    assert code == 0
    assert all(r["status"] == "match" for r in json.loads(out)["rows"])
    assert run(capsys, "verify", "--suite", "poisson", "--seed", "3")[0] == 0
    code, _, err = run(capsys, "verify", "--suite", "morse-bott")
    assert code == 3 and err


def test_output_file(tmp_path, capsys):
    target = tmp_path / "cat.csv"
    assert run(capsys, "catalog", "-c", "-2.1", "--format", "csv", "-o", str(target))[0] == 0
    assert target.read_text().startswith("kind")


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"jacobi": -2.1, "covers": 1}))
    code, out, _ = run(capsys, "catalog", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["config"]["covers"] == 1


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "kepler_cz", "bifurcation", "--family", "2,1", "--format", "csv"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0
    assert res.stdout.splitlines()[0].startswith("family") or "c_minus" in res.stdout
