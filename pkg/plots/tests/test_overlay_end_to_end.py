"""End-to-end: real solver artifacts through the file contract to figures.

These tests drive the `regimefrontier` CLI as a subprocess — the intended
producer of the CSVs — and are skipped when it is not installed; everything
else in this suite runs on synthetic files.
"""
import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from frontierplots import frontier_overlay_figure, read_frontier_csv, read_solutions_csv
from frontierplots.cli import main_frontier, main_solutions

pytestmark = pytest.mark.skipif(shutil.which("regimefrontier") is None,
                                reason="regimefrontier CLI not installed")


def model_config(f):
    return {
        "generator": [[0.0]],
        "market": {"n_assets": 1, "T": 1.0,
                   "regimes": [[{"t_start": 0.0, "r": 0.1,
                                 "mu": [0.3], "sigma": [[0.5]]}]]},
        "horizon": {"epsilon": 0.05, "density": [{"t_start": 0.0, "f": f}]},
        "initial": {"x0": 1.0, "regime": 0},
        "run": {"step": None,
                "sim": {"n_paths": 1000, "euler_step": 0.005,
                        "base_seed": 1, "antithetic": False}},
        "z_targets": [1.2],
    }


def run_solver(tmp_path, *args):
    proc = subprocess.run(["regimefrontier", *args], capture_output=True,
                          text=True, cwd=tmp_path)
    assert proc.returncode == 0, proc.stderr
    return proc


def test_density_overlay_roundtrip(tmp_path):
    cfg = tmp_path / "model.json"
    cfg.write_text(json.dumps(model_config(0.5)))
    art = tmp_path / "artifacts"
    run_solver(tmp_path, "frontier", "--config", str(cfg), "--out", str(art),
               "--z", "1.15:0.05:1.45", "--density-overlay", "0,0.5,0.8",
               "--step", "1e-3")

    csvs = [str(art / f"frontier_{tag}.csv") for tag in ("f0", "f0p5", "f0p8")]
    all_series = [read_frontier_csv(p) for p in csvs]

    # labels come from the JSON headers; curves are ordered like the source
    # densities, so red/blue/green tracks f = 0 / 0.5 / 0.8
    assert [s.label for s in all_series] == ["f = 0", "f = 0.5", "f = 0.8"]
    fig = frontier_overlay_figure(all_series)
    ax = fig.axes[0]
    assert [line.get_color() for line in ax.lines] == ["red", "blue", "green"]
    assert "standard deviation" in ax.get_xlabel()
    assert ax.get_ylabel() == "target mean z"

    # heavier exit weighting costs risk at every shared target
    assert np.array_equal(all_series[0].z, all_series[1].z)
    assert np.all(all_series[0].std_dev < all_series[1].std_dev)
    assert np.all(all_series[1].std_dev < all_series[2].std_dev)

    # byte-deterministic rendering of the same inputs
    out_a, out_b = tmp_path / "fig_a.svg", tmp_path / "fig_b.svg"
    assert main_frontier(["--in", *csvs, "--out", str(out_a)]) == 0
    assert main_frontier(["--in", *csvs, "--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_solutions_roundtrip(tmp_path):
    cfg = tmp_path / "model.json"
    cfg.write_text(json.dumps(model_config(0.0)))
    art = tmp_path / "artifacts"
    run_solver(tmp_path, "solve", "--config", str(cfg), "--out", str(art),
               "--step", "1e-3")

    table = read_solutions_csv(art / "solutions.csv")
    assert table.regimes == (0,)
    # without exit weighting the quadratic coefficient falls monotonically
    # from 2 e^{0.04} at t=0 to its terminal value 2
    p = table.p[0]
    assert p[0] == pytest.approx(2.0 * math.exp(0.04), rel=1e-9)
    assert p[-1] == 2.0
    assert np.all(np.diff(p) < 0)

    out_a, out_b = tmp_path / "diag_a.svg", tmp_path / "diag_b.svg"
    assert main_solutions(["--in", str(art / "solutions.csv"),
                           "--out", str(out_a)]) == 0
    assert main_solutions(["--in", str(art / "solutions.csv"),
                           "--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
