import csv
import io
import json
from fractions import Fraction

import pytest

from cflab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate_chacon(capsys):
    code, out, _ = run(capsys, "validate", "--system", "chacon")
    assert code == 0 and "verdict.conditions  PASS" in out


def test_wre_hk_reports_interval_and_target(capsys):
    code, out, _ = run(capsys, "wre", "--system", "hk", "--A", "level=2,cells=0", "--B", "level=2,cells=0",
                       "--l", "6", "--depth", "12", "--json", "-")
    assert code == 0
    rep = json.loads(out[out.index("{"):])
    assert rep["results"]["target"]["lo"] == "1/16"
    lo, hi = Fraction(rep["results"]["ratio"]["lo"]), Fraction(rep["results"]["ratio"]["hi"])
    assert lo <= hi
    assert rep["provenance"]["depth"] == 12


def test_rigidity_r2(capsys):
    code, out, _ = run(capsys, "rigidity", "--system", "r2", "--n", "5", "--depth", "8")
    assert code == 0
    assert "m_n" in out and "1024" in out and "verdict.guarantee   PASS" in out


def test_failed_verdict_exit_code(capsys):
    code, out, _ = run(capsys, "nondegeneracy", "--system", "fb")
    assert code == 2 and "FAIL" in out


def test_error_exit_code(capsys):
    code, _, err = run(capsys, "validate", "--system", "nope")
    assert code == 1 and "unknown catalog system" in err


def test_json_rationals_are_strings(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, _, _ = run(capsys, "measure", "--system", "chacon", "--A", "level=2,cells=0..5", "--json", str(path))
    data = json.loads(path.read_text())
    assert code == 0 and data["results"]["measure"] == "5/9"
    assert set(data) == {"command", "inputs", "results", "verdicts", "provenance"}


def test_correlate_csv(capsys):
    code, out, _ = run(capsys, "correlate", "--system", "chacon", "--A", "level=1,cells=0", "--B",
                       "level=1,cells=0", "--shifts", "0..5", "--depth", "5")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["k"] for r in rows] == ["0", "1", "2", "3", "4"]
    assert (rows[4]["lo"], rows[4]["hi"]) == ("40/243", "41/243")


def test_dsl_file_as_system(capsys, tmp_path):
    f = tmp_path / "c.cf"
    f.write_text("horizon = 5\nC[n+1] = {0, h, 2h+1}\n")
    code, out, _ = run(capsys, "trend", "--system", str(f))
    assert code == 0 and "finite" not in out and "undecided" in out


def test_parse_reports_semantic_error(capsys, tmp_path):
    f = tmp_path / "bad.cf"
    f.write_text("horizon = 6\nC[n+1] = {0, h-1}\n")
    code, _, err = run(capsys, "parse", str(f))
    assert code == 1 and "line 2, col 1" in err and "(III)" in err


def test_bratteli_dot_and_oracle(capsys):
    code, out, _ = run(capsys, "bratteli", "--system", "odometer", "--horizon", "2", "--format", "dot")
    assert code == 0 and out.startswith("digraph bratteli")
    code, out, _ = run(capsys, "oracle", "--system", "fb", "--depth", "6")
    assert code == 0 and "checked             610" in out


def test_solve_fb(capsys):
    code, out, _ = run(capsys, "solve", "--system", "fb", "--horizon", "60", "--json", "-")
    rep = json.loads(out[out.index("{"):])
    assert code == 0 and rep["verdicts"] == {"certified": True}


def test_large_holes_z2(capsys):
    code, _, _ = run(capsys, "large-holes", "--system", "z2lh")
    assert code == 0


def test_catalog_listing(capsys):
    code, out, _ = run(capsys, "catalog")
    assert code == 0 and "chacon" in out and "r2s" in out
