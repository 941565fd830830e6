import csv
import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from mzk.cli import main
from mzk.snapshot import read_snapshot

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run_cli(*args, env=None, cwd=None):
    return subprocess.run([sys.executable, "-m", "mzk.cli", *args], capture_output=True, text=True,
                          env={**os.environ, **(env or {})}, cwd=cwd)


def test_exact_wave_end_to_end(tmp_path):
    out = tmp_path / "ew"
    p = run_cli("exact-wave-test", "--config", str(CONFIGS / "exact_wave.yaml"), "--out", str(out))
    assert p.returncode == 0, p.stderr
    rep = json.loads((out / "report.json").read_text())
    assert rep["status"] == "passed"
    assert rep["metrics"]["final_rel_error"] <= 1e-8
    assert rep["config"]["exact_wave"] == {"m": 4, "r": 1.0}
    assert (out / "series" / "exact_wave_error.csv").exists()
    field, t, lam, s = read_snapshot(out / "snapshots" / "final.mzk1")
    assert (t, lam, s) == (1.0, 1.0, 2.0) and field.grid.K == 20


def test_failed_assertion_exit_code(tmp_path):
    p = run_cli("exact-wave-test", "--config", str(CONFIGS / "exact_wave.yaml"), "--out", str(tmp_path),
                "--set", "solver.t_end=0.1", "--set", "assert=['final_rel_error <= 0', 'nothing > 1']")
    assert p.returncode == 1
    err = json.loads(p.stderr)
    assert err["status"] == "assertion_failed"
    assert [f["metric"] for f in err["failures"]] == ["final_rel_error", "nothing"]


def test_config_error_exit_code(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("schema_version: 1\ngrid: {K: 8}\nequation: {s: 1.0}\nwat: 2\n")
    p = run_cli("simulate", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert p.returncode == 2
    failures = json.loads(p.stderr)["failures"]
    assert any("5/3" in f for f in failures) and any("'wat'" in f for f in failures)
    assert not (tmp_path / "o").exists()
    assert main(["simulate", "--config", str(tmp_path / "missing.yaml")]) == 2


def test_output_root_environment(tmp_path):
    p = run_cli("simulate", "--config", str(CONFIGS / "simulate_linear.yaml"),
                env={"MZK_OUTPUT_ROOT": str(tmp_path / "root")}, cwd=tmp_path)
    assert p.returncode == 0, p.stderr
    rep = json.loads((tmp_path / "root" / "simulate" / "report.json").read_text())
    # lam = 0: every H^s norm is conserved
    assert rep["metrics"]["hs_relative_variation"] <= 1e-12
    assert (tmp_path / "root" / "simulate" / "series" / "trajectory.csv").exists()


def test_seed_override_is_echoed(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d, seed in ((a, "5"), (b, "6")):
        assert main(["simulate", "--config", str(CONFIGS / "simulate_linear.yaml"), "--out", str(d),
                     "--seed", seed, "--set", "solver.t_end=0.1"]) == 0
    ra = json.loads((a / "report.json").read_text())
    rb = json.loads((b / "report.json").read_text())
    assert ra["seed"] == 5 and ra["config"]["seed"] == 5 and rb["seed"] == 6
    assert ra["payload"]["hs_norm"] != rb["payload"]["hs_norm"]


def test_illposed_small_suite(tmp_path):
    rc = main(["illposed", "--config", str(CONFIGS / "illposed.yaml"), "--out", str(tmp_path),
               "--set", "illposed.m_list=[2, 3, 4]", "--set", "solver.t_end=0.5",
               "--set", "illposed.check_times=[0.25, 0.5]", "--set", "solver.dt=0.01",
               "--set", "assert=['initial_distance_error <= 1e-12']"])
    assert rc == 0
    rows = list(csv.DictReader(open(tmp_path / "series" / "divergence.csv")))
    first = {r["m_or_N_or_j"]: r for r in rows if float(r["t_or_sample"]) == 0.0}
    for m in (2, 3, 4):
        assert float(first[str(m)]["value"]) == pytest.approx(m ** -0.5, abs=1e-15)
        assert float(first[str(m)]["envelope"]) == 0.0


@pytest.mark.parametrize("sub,cfg,extra", [
    ("energy-identity", "energy_identity.yaml", ["--set", "energy.count=2"]),
    ("ineq-kato-ponce", "kato_ponce.yaml", ["--set", "ensemble.count=3", "--set", "ensemble.K_list=[4, 8]"]),
    ("ineq-product", "product.yaml", ["--set", "ensemble.count=3", "--set", "ensemble.K_list=[4, 8]"]),
    ("ineq-strichartz", "strichartz.yaml", ["--set", "strichartz.count=2", "--set", "strichartz.j_list=[1, 2, 3]",
                                            "--set", "grid.K=8"]),
    ("galerkin-convergence", "galerkin_convergence.yaml", ["--set", "grid.K=8", "--set", "convergence.N_list=[2, 3, 4, 8]",
                                                           "--set", "solver.t_end=0.05", "--set", "solver.dt=0.005",
                                                           "--set", "solver.record_every=2",
                                                           "--set", "convergence.scale=0.3",
                                                           "--set", "assert=['strictly_decreasing == true']"]),
    ("ineq-transference", "transference.yaml", ["--set", "transference.n_samples=8",
                                                "--set", "transference.lattice_radius=4"]),
    ("simulate", "simulate.yaml", ["--set", "solver.t_end=0.05"]),
])
def test_every_subcommand_runs(tmp_path, sub, cfg, extra):
    rc = main([sub, "--config", str(CONFIGS / cfg), "--out", str(tmp_path), *extra])
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["experiment"] == sub
    assert rc == 0, rep["assertions"]
    for v in rep["metrics"].values():
        assert not (isinstance(v, float) and math.isnan(v))
    assert any((tmp_path / "series").iterdir())
