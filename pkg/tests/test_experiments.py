import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from irreality_lab.closedform import QubitConfig, qubit_irreality
from irreality_lab.experiments import (
    ExperimentConfig,
    format_value,
    parallel_map,
    qubit_irreality_matrix,
    run_experiment,
    to_csv,
)


def square(i):
    return i * i


def test_parallel_map_order():
    assert parallel_map(square, 37, workers=3) == [i * i for i in range(37)]
    assert parallel_map(square, 5, workers=1, start=10) == [100, 121, 144, 169, 196]


def test_format_value():
    assert format_value(1 / 3) == "0.333333333333"
    assert format_value(None) == ""
    assert format_value(True) == "true"
    assert format_value(7) == "7"
    assert format_value(math.nan) == "nan"


def test_to_csv():
    text = to_csv(["a", "b"], [{"a": 1, "b": 0.5}, {"a": 2, "b": None}])
    assert text == "a,b\n1,0.5\n2,\n"


def test_config_validation(monkeypatch):
    with pytest.raises(ValueError):
        ExperimentConfig("fig9")
    cfg = ExperimentConfig("fig4", threads=8)
    assert cfg.samples == 10_000
    monkeypatch.setenv("IRREALITY_LAB_THREADS", "2")
    assert cfg.workers == 2
    assert ExperimentConfig("fig1", tolerances={"sandwich": 1e-6}).tolerances["sandwich"] == 1e-6


def test_qubit_matrix_route():
    rng = np.random.default_rng(0)
    r_vecs = rng.standard_normal((20, 3))
    r_vecs *= (rng.random(20) / np.linalg.norm(r_vecs, axis=1))[:, None]
    x = rng.standard_normal((20, 3))
    x /= np.linalg.norm(x, axis=1)[:, None]
    got = qubit_irreality_matrix(r_vecs, x)
    for rv, xh, val in zip(r_vecs, x, got):
        r = np.linalg.norm(rv)
        assert_allclose(val, qubit_irreality(QubitConfig(r, abs(xh @ rv) / r)), atol=1e-12)


def test_fig1_small(tmp_path):
    res = run_experiment(ExperimentConfig("fig1", samples=3000, seed=1, out_dir=tmp_path))
    checks = {c.name: c for c in res.checks}
    assert checks["lower_bound_holds"].passed
    assert checks["closed_vs_numeric"].passed
    # the 3/4 exponent upper bound fails only for nearly pure states
    assert res.summary["upper_violations"] > 0
    assert res.summary["min_r_in_upper_violation"] > 0.98
    manifest = json.loads((tmp_path / "fig1_manifest.json").read_text())
    for key in ("experiment", "seed", "samples", "tolerances", "started_at", "duration_s", "version"):
        assert key in manifest
    assert (tmp_path / "fig1_plot.json").exists()


def test_mu_fit_small(tmp_path):
    res = run_experiment(ExperimentConfig("mu_fit", samples=3000, out_dir=tmp_path))
    assert res.passed
    assert len(res.records) == 3000
    hist = (tmp_path / "mu_fit_hist.csv").read_text().splitlines()
    assert hist[0] == "bin_lo,bin_hi,count"
    assert sum(int(line.split(",")[2]) for line in hist[1:]) == 3000


def test_fig2_grid(tmp_path):
    res = run_experiment(ExperimentConfig("fig2", out_dir=tmp_path))
    assert res.passed
    header = (tmp_path / "fig2.csv").read_text().splitlines()[0]
    assert header == "alpha,theta,ji_closed,ji_numeric,info,ji_per_info"
    assert len(res.records) == 181 * 11


def test_fig3_small():
    res = run_experiment(ExperimentConfig("fig3", samples=3, theta_points=31))
    assert res.passed
    assert_allclose(res.summary["min_density_limit0"], 2 / 3)


def test_fig4_small():
    res = run_experiment(ExperimentConfig("fig4", samples=120, spot_check_every=40))
    assert res.passed, [c for c in res.checks if not c.passed]
    assert res.summary["spot_checks"] == 3


def test_fig4_lueders_variant_runs():
    res = run_experiment(ExperimentConfig("fig4", samples=20, spot_check_every=100, refined=False))
    assert len(res.records) == 20


def test_verify_small():
    res = run_experiment(ExperimentConfig("verify", samples=20, mub_samples=20, classical_grids=5))
    assert res.passed, [c for c in res.checks if not c.passed]
    names = {c.name for c in res.checks}
    assert {"eq10", "eq11", "product", "bounds", "ur", "faithfulness", "fault_injection_rejected"} <= names


def test_seed_changes_records_not_pass_set():
    a = run_experiment(ExperimentConfig("verify", samples=10, seed=1, mub_samples=10, classical_grids=3))
    b = run_experiment(ExperimentConfig("verify", samples=10, seed=2, mub_samples=10, classical_grids=3))
    assert [c.passed for c in a.checks] == [c.passed for c in b.checks]


def test_worker_count_does_not_change_csv(tmp_path):
    outs = []
    for threads in (1, 2):
        d = tmp_path / str(threads)
        run_experiment(ExperimentConfig("fig1", samples=400, seed=9, threads=threads, out_dir=d))
        outs.append((d / "fig1.csv").read_bytes())
    assert outs[0] == outs[1]
