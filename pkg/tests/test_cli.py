import csv
import io
import json
import subprocess
import sys

import pytest

from oracle_recon.cli import main
from oracle_recon.graph_core import read_edgelist


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_writes_edgelist(capsys, tmp_path):
    code, out, _ = run(capsys, "gen", "--n", "30", "--p", "0.3", "--seed", "2")
    assert code == 0
    g = read_edgelist(io.StringIO(out))
    assert g.n == 30
    path = tmp_path / "g.txt"
    assert main(["gen", "--n", "30", "--p", "0.3", "--seed", "2", "--out", str(path)]) == 0
    assert path.read_text() == out


def test_seed_env_overrides(capsys, monkeypatch):
    _, a, _ = run(capsys, "gen", "--n", "40", "--p", "0.2", "--seed", "5")
    monkeypatch.setenv("ORACLE_RECON_SEED", "5")
    _, b, _ = run(capsys, "gen", "--n", "40", "--p", "0.2", "--seed", "99")
    assert a == b
    monkeypatch.setenv("ORACLE_RECON_SEED", "oops")
    code, _, err = run(capsys, "gen", "--n", "40", "--p", "0.2")
    assert code == 2 and err.count("\n") == 1 and err.startswith("error: UsageError:")


def test_reconstruct_report(capsys, tmp_path):
    out = tmp_path / "report.json"
    code, _, _ = run(capsys, "reconstruct", "--n", "200", "--c", "4", "--alpha", "0.05",
                     "--seed", "1", "--out", str(out))
    assert code == 0
    rep = json.loads(out.read_text())
    assert set(rep) == {"edges", "exact", "s", "alpha", "pseudo_edge_count", "queries_phase1",
                        "queries_phase2", "queries_distinct_total", "fallback_used", "wall_ms"}
    assert rep["exact"] is True and rep["alpha"] == 0.05


def test_reconstruct_from_edgelist(capsys, tmp_path):
    g = tmp_path / "g.txt"
    assert main(["gen", "--n", "50", "--p", "0.2", "--out", str(g)]) == 0
    code, out, _ = run(capsys, "reconstruct", "--graph", str(g), "--alpha", "0.5")
    assert code == 0
    rep = json.loads(out)
    assert rep["exact"]
    assert len(rep["edges"]) == read_edgelist(open(g)).m


def test_witness_census_csv_and_json(capsys):
    code, out, _ = run(capsys, "witness-census", "--n", "300", "--c", "4", "--pairs", "7")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["pair_id", "u", "v", "dist_uv", "witness_count", "density_ratio"]
    assert len(rows) == 8
    code, out, _ = run(capsys, "witness-census", "--n", "60", "--p", "0.1", "--exact",
                       "--format", "json")
    assert code == 0 and len(json.loads(out)) > 0


def test_exact_census_gate(capsys):
    code, _, err = run(capsys, "witness-census", "--n", "100", "--c", "4", "--exact",
                       "--exact-census-max-n", "50")
    assert code == 1 and "exact census" in err


def test_sphere_partition_and_profile(capsys):
    code, out, _ = run(capsys, "sphere-partition", "--n", "300", "--c", "4", "--pairs", "3")
    assert code == 0
    assert out.splitlines()[0] == "pair_id,k,layer_size,a_size,b_size,b1,b2,b3"
    code, out, _ = run(capsys, "profile-census", "--n", "300", "--c", "4")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert sum(int(r["count"]) for r in rows) == 300


def test_near_pair_partition_is_an_error(capsys):
    code, _, err = run(capsys, "sphere-partition", "--n", "5", "--p", "1", "--u", "0", "--v", "1")
    assert code == 1 and err.startswith("error: NearPairError")


def test_concentration_checks(capsys):
    code, out, err = run(capsys, "concentration-check", "--n", "2000", "--p", "0.02",
                         "--trials", "3")
    assert code == 0 and len(out.splitlines()) == 4 and "budget" in err
    code, out, err = run(capsys, "concentration-check", "--kind", "isolated", "--n", "1000",
                         "--delta", "10", "--trials", "5")
    assert code == 0 and "exceedances 0/5" in err
    code, _, err = run(capsys, "concentration-check", "--kind", "isolated", "--n", "1000")
    assert code == 2


def test_sweep_cli(capsys, tmp_path):
    out = tmp_path / "s.csv"
    svg = tmp_path / "s.svg"
    code, _, err = run(capsys, "sweep", "--n", "64", "128", "256", "--c", "4",
                       "--alpha", "0.05", "--trials", "2", "--threads", "2",
                       "--out", str(out), "--plot", str(svg), "--fit")
    assert code == 0
    assert len(out.read_text().splitlines()) == 7
    assert "scaling exponent" in err
    assert svg.read_text().startswith("<svg")
    code, stdout, _ = run(capsys, "sweep", "--n", "64", "128", "256", "--c", "4",
                          "--alpha", "0.05", "--trials", "2")
    assert stdout == out.read_text()


def test_errors_are_one_line(capsys):
    for argv in (["bogus"], ["sweep", "--n", "64", "--p", "2"], ["gen", "--n", "10"],
                 ["gen", "--n", "10", "--p", "0.5", "--require-connected", "maybe"]):
        code, _, err = run(capsys, *argv)
        assert code != 0
        assert err.count("\n") == 1 and err.startswith("error: ")


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "oracle_recon.cli", "gen", "--n", "5",
                           "--p", "1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "5 10"
