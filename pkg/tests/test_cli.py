import csv
import json

from conftest import PLANT_ETA, PLANT_R, planted_instance
from rggham.cli import main, save_points


def test_limit_curve(tmp_path):
    out = tmp_path / "curve.csv"
    assert main(["limit-curve", "--from", "-6", "--to", "6", "--step", "0.5",
                 "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["x", "probability"]
    assert len(rows) == 26   # header + 25 grid points
    vals = [float(r[1]) for r in rows[1:]]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_limit_curve_bad_step(tmp_path):
    assert main(["limit-curve", "--from", "0", "--to", "1", "--step", "0"]) == 2


def test_simulate_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["simulate", "--n", "12", "--trials", "25", "--seed", "7"]
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_config_file(tmp_path):
    cfgf = tmp_path / "cfg.json"
    cfgf.write_text(json.dumps({"n": 10, "trials": 5, "master_seed": 3}))
    out = tmp_path / "c.csv"
    assert main(["simulate", "--config", str(cfgf), "--out", str(out)]) == 0
    assert out.exists()
    # flags override the file
    out2 = tmp_path / "d.csv"
    assert main(["simulate", "--config", str(cfgf), "--trials", "6",
                 "--out", str(out2)]) == 0
    assert len(out2.read_text().splitlines()) == 7


def test_usage_error():
    assert main(["simulate", "--frobnicate"]) == 2
    assert main(["no-such-command"]) == 2
    assert main([]) == 2
    assert main(["--help"]) == 0


def test_build_cycle_planted(tmp_path):
    pts = planted_instance(1)
    pfile = tmp_path / "points.txt"
    save_points(pts, pfile)
    out = tmp_path / "cycle.txt"
    diag = tmp_path / "diag.json"
    code = main(["build-cycle", "--points-file", str(pfile), "--rho", str(PLANT_R),
                 "--eta", str(PLANT_ETA), "--K", "24", "--r2-budget", "8",
                 "--out", str(out), "--diagnostics", str(diag)])
    assert code == 0
    cycle = [int(x) for x in out.read_text().split()]
    assert sorted(cycle) == list(range(len(pts)))
    d = json.loads(diag.read_text())
    assert d["success"] is True and d["stats"]["small_components"] == 1


def test_build_cycle_dense(tmp_path):
    out = tmp_path / "cycle.txt"
    code = main(["build-cycle", "--n", "6000", "--seed", "5", "--rho", "0.3",
                 "--eta", str(1 / 3), "--K", "35", "--out", str(out)])
    assert code == 0
    cycle = [int(x) for x in out.read_text().split()]
    assert sorted(cycle) == list(range(6000))


def test_build_cycle_failure_exit(tmp_path):
    diag = tmp_path / "diag.json"
    code = main(["build-cycle", "--n", "200", "--seed", "1", "--rho", "0.3",
                 "--eta", str(1 / 3), "--K", "35", "--diagnostics", str(diag)])
    assert code == 1
    d = json.loads(diag.read_text())
    assert d["success"] is False and "failure" in d


def test_audit_cmd(tmp_path):
    out = tmp_path / "audit.csv"
    code = main(["audit", "--n", "6000", "--seed", "5", "--r", "0.3",
                 "--eta", str(1 / 3), "--K", "35", "--out", str(out)])
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["property", "pass", "witness"]
    assert [r[0] for r in rows[1:]] == ["P1", "P2", "P3", "P4", "P5", "P6"]
    assert all(r[1] == "pass" for r in rows[1:])


def test_oracle_check_cmd():
    assert main(["oracle-check", "--instances", "15", "--seed", "2"]) == 0
