import csv
import io
import json
import subprocess
import sys

import pytest

from maxent_states.cli import main


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_curves_zero_at_unit_width(capsys):
    code, out, _ = run(["curves", "--points", "20"], capsys)
    assert code == 0
    rows = rows_of(out)
    at_one = [r for r in rows if float(r["delta"]) == 1.0]
    assert len(at_one) == 9
    assert all(float(r["delta_s"]) == 0.0 for r in at_one)
    assert out.startswith("# tool: maxent_states")


def test_curves_explicit_grid_and_kappa(capsys):
    code, out, _ = run(["curves", "--n-a-values", "0.25", "--delta", "1.0", "--kappa", "0,1"], capsys)
    assert code == 0
    assert [float(r["delta_s"]) for r in rows_of(out)] == [0.0, -0.125]


def test_rerun_from_output_is_identical(tmp_path, capsys):
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    assert main(["sample", "--n", "8", "--na", "2,4", "--dist", "gaussian:0.5,1.2",
                 "--samples", "30", "--seed", "9", "--out", str(first)]) == 0
    assert main(["sample", "--config", str(first), "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert "# seed: 9" in first.read_text()


def test_flags_override_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"r": 3, "format": "json"}))
    code, out, _ = run(["narayana", "--config", str(cfg), "--r", "4"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["r"] == 4
    assert sum(rec["narayana"] for rec in doc["records"] if rec["r"] == 4) == 14


def test_scramble_rows(capsys):
    code, out, _ = run(["scramble", "--dist", "cat:2,3", "--samples", "10", "--seed", "1"], capsys)
    assert code == 0
    (row,) = rows_of(out)
    assert int(row["n"]) == 6 and int(row["n_a"]) == 3
    assert float(row["charge_residual"]) < 1e-12
    code, out, _ = run(["scramble", "--dist", "cat:2,3", "--samples", "4", "--mode", "brickwork:3"], capsys)
    assert code == 0


def test_induced_json(capsys):
    code, out, _ = run(["induced", "--n", "4", "--na", "2", "--dist", "micro:0", "--format", "json"], capsys)
    assert code == 0
    recs = json.loads(out)["records"]
    assert [r["p_a"] for r in recs] == pytest.approx([1 / 6, 2 / 3, 1 / 6])


@pytest.mark.parametrize("args, code", [
    (["sample", "--dist", "lorentz"], 2),
    (["sample", "--n", "6", "--na", "6"], 2),
    (["scramble", "--dist", "cat:3,4", "--mode", "chaos"], 2),
    (["curves", "--n-a-values", "1.5"], 2),
    (["sample", "--n", "30"], 3),
    (["scramble", "--dist", "cat:5,5"], 3),
    (["induced", "--n", "4", "--dist", "table:/nonexistent/p.json"], 4),
])
def test_exit_codes(args, code, capsys):
    got, _, err = run(args, capsys)
    assert got == code
    assert err.startswith("error:")


def test_unwritable_output(capsys):
    assert main(["narayana", "--out", "/nonexistent/dir/x.csv"]) == 4


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "maxent_states.cli", "narayana", "--r", "2"],
                         capture_output=True, text=True, check=True).stdout
    assert rows_of(out)[-1] == {"r": "2", "k": "2", "narayana": "1"}
