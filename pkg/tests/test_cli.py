"""Command-line interface: subcommands, config handling, determinism."""

import hashlib
import json
import os

import numpy as np
import pytest

from axivort import cli
from axivort.fields import HalfPlaneGrid, read_field, write_field

from conftest import gaussian_ring


def run_cli(*argv):
    return cli.main(list(argv))


class TestKernelsDump:
    def test_csv_to_stdout(self, capsys):
        assert run_cli("kernels", "--dump", "F", "--points", "10") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "s,F,F_prime"
        assert len(lines) == 11
        s, f, fp = (float(x) for x in lines[1].split(","))
        assert f > 0 and fp < 0

    def test_csv_to_file(self, tmp_path):
        out = tmp_path / "h.csv"
        assert run_cli("kernels", "--dump", "H", "--out", str(out)) == 0
        header = out.read_text().splitlines()[0]
        assert header == "tau,H,H_prime"


class TestLinear:
    def test_atom_propagation(self, tmp_path):
        out = tmp_path / "atom.bin"
        code = run_cli(
            "linear", "--atom", "1.0,0.0,1.0", "--t", "1.0", "--out", str(out),
            "--n-r", "48", "--n-z", "96",
        )
        assert code == 0
        f = read_field(str(out))
        assert f.grid.n_r == 48
        assert f.values.max() > 0

    def test_field_propagation(self, tmp_path):
        grid = HalfPlaneGrid(32, 64)
        src = tmp_path / "src.bin"
        dst = tmp_path / "dst.bin"
        write_field(gaussian_ring(grid, l1_mass=0.5), str(src))
        assert run_cli("linear", "--in", str(src), "--t", "0.5", "--out", str(dst)) == 0
        out = read_field(str(dst))
        assert out.time == pytest.approx(0.5)

    def test_in_and_atom_conflict(self, tmp_path):
        code = run_cli(
            "linear", "--in", "x.bin", "--atom", "1,0,1", "--t", "1.0",
            "--out", str(tmp_path / "o.bin"),
        )
        assert code == cli.EXIT_CONFIG


class TestBiotSavart:
    def test_probe_json(self, tmp_path, capsys):
        grid = HalfPlaneGrid(32, 64)
        src = tmp_path / "src.bin"
        write_field(gaussian_ring(grid, l1_mass=1.0), str(src))
        out = tmp_path / "vel.bin"
        code = run_cli(
            "biot-savart", "--in", str(src), "--out", str(out), "--probe", "2.0,0.5"
        )
        assert code == 0
        probe_line = [
            ln for ln in capsys.readouterr().out.splitlines() if ln.startswith("{")
        ][0]
        rec = json.loads(probe_line)
        assert set(rec) == {"r", "z", "u_r", "u_z"}
        assert os.path.exists(out)


class TestEvolveRun:
    def _config(self, tmp_path, fmt="toml"):
        outdir = tmp_path / "run_out"
        if fmt == "toml":
            text = f"""
[grid]
n_r = 32
n_z = 64
r_max = 8.0
z_half = 8.0

[initial]
kind = "gaussian_ring"
center = 2.0
width = 0.7
amplitude = 0.1

[solver]
dt = 0.25

[run]
t_final = 0.5
output_dir = "{outdir}"

[snapshots]
times = [0.25, 0.5]
"""
            path = tmp_path / "run.toml"
            path.write_text(text)
        else:
            cfg = {
                "grid": {"n_r": 32, "n_z": 64, "r_max": 8.0, "z_half": 8.0},
                "initial": {"kind": "gaussian_ring", "amplitude": 0.1},
                "solver": {"dt": 0.25},
                "run": {"t_final": 0.5, "output_dir": str(outdir)},
                "snapshots": {"times": [0.25, 0.5]},
            }
            path = tmp_path / "run.json"
            path.write_text(json.dumps(cfg))
        return path, outdir

    def test_run_produces_manifest_and_artifacts(self, tmp_path):
        cfg, outdir = self._config(tmp_path)
        assert run_cli("evolve", "--config", str(cfg)) == 0
        manifest = json.loads((outdir / "manifest.json").read_text())
        names = {o["path"] for o in manifest["outputs"]}
        assert "diagnostics.csv" in names
        assert "summary.json" in names
        assert sum(1 for n in names if n.startswith("field_t")) == 2

    def test_rerun_identical_hashes(self, tmp_path):
        cfg, outdir = self._config(tmp_path, fmt="json")
        assert run_cli("evolve", "--config", str(cfg)) == 0
        first = json.loads((outdir / "manifest.json").read_text())["outputs"]
        assert run_cli("evolve", "--config", str(cfg)) == 0
        second = json.loads((outdir / "manifest.json").read_text())["outputs"]
        assert first == second

    def test_empty_snapshot_schedule(self, tmp_path):
        outdir = tmp_path / "noshots"
        cfg = {
            "grid": {"n_r": 24, "n_z": 48, "r_max": 8.0, "z_half": 8.0},
            "initial": {"kind": "gaussian_ring", "amplitude": 0.05},
            "solver": {"dt": 0.25},
            "run": {"t_final": 0.25, "output_dir": str(outdir)},
            "snapshots": {"times": []},
        }
        path = tmp_path / "run.json"
        path.write_text(json.dumps(cfg))
        assert run_cli("evolve", "--config", str(path)) == 0
        assert (outdir / "diagnostics.csv").exists()
        assert (outdir / "manifest.json").exists()

    def test_config_errors_exit_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"grid": {"n_r": 8, "n_z": 16}}))
        assert run_cli("evolve", "--config", str(bad)) == cli.EXIT_CONFIG
        bad2 = tmp_path / "bad2.json"
        bad2.write_text(json.dumps({
            "initial": {"kind": "mystery"},
            "run": {"t_final": 0.1, "output_dir": str(tmp_path / "x")},
        }))
        assert run_cli("evolve", "--config", str(bad2)) == cli.EXIT_CONFIG
        assert run_cli("evolve", "--config", str(tmp_path / "missing.toml")) == cli.EXIT_CONFIG

    def test_decreasing_snapshots_rejected(self, tmp_path):
        cfg = {
            "grid": {"n_r": 16, "n_z": 32},
            "initial": {"kind": "gaussian_ring"},
            "run": {"t_final": 1.0, "output_dir": str(tmp_path / "y")},
            "snapshots": {"times": [0.5, 0.25]},
        }
        path = tmp_path / "run.json"
        path.write_text(json.dumps(cfg))
        assert run_cli("evolve", "--config", str(path)) == cli.EXIT_CONFIG


class TestVerifyAndPlot:
    def test_kernels_suite_and_plot(self, tmp_path):
        report = tmp_path / "report.json"
        assert run_cli("verify", "--suite", "kernels", "--out", str(report)) == 0
        data = json.loads(report.read_text())
        assert data["passed"] is True
        plots = tmp_path / "plots"
        assert run_cli("plot", "--in", str(report), "--out-dir", str(plots)) == 0
        series = list(plots.glob("*.csv"))
        assert series
        header = series[0].read_text().splitlines()[0]
        assert "," in header
