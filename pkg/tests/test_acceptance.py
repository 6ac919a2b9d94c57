"""One test per acceptance criterion, at the stated sample sizes and tolerances."""

import time
import timeit

import numpy as np
import pytest

from irreality_lab.classical import classical_sequential, classical_unrevealed, random_distribution
from irreality_lab.experiments import ExperimentConfig, run_experiment
from irreality_lab.measures import joint_irreality
from irreality_lab.qstate import RngStream, bell_state, bloch_observable, local_observable

Z = bloch_observable([0, 0, 1])
X = bloch_observable([1, 0, 0])


def timed(cfg):
    t0 = time.perf_counter()
    res = run_experiment(cfg)
    return res, time.perf_counter() - t0


def checks(res):
    return {c.name: c for c in res.checks}


@pytest.fixture(scope="module")
def verify_run():
    return timed(ExperimentConfig("verify", samples=10_000, seed=0))


def test_c01_singlet_joint_irreality(acceptance_line):
    psi = bell_state("-")
    x, y = local_observable(Z, (2, 2), "A"), local_observable(Z, (2, 2), "B")
    ji = joint_irreality(psi, x, y)
    runtime = min(timeit.repeat(lambda: joint_irreality(psi, x, y), number=50, repeat=5)) / 50
    ok = abs(ji - 1.0) <= 1e-9 and runtime < 1e-3
    acceptance_line(1, ok, f"JI = {ji:.12f} bit, {runtime * 1e3:.3f} ms per evaluation")
    assert abs(ji - 1.0) <= 1e-9
    assert runtime < 1e-3


def test_c02_epr_maximal_violation(acceptance_line):
    psi = bell_state("-")
    ji = joint_irreality(psi, local_observable(Z, (2, 2), "B"), local_observable(X, (2, 2), "B"))
    ok = abs(ji - 2.0) <= 1e-9
    acceptance_line(2, ok, f"JI = {ji:.12f} bits")
    assert ok


def test_c03_fig1_sandwich(acceptance_line):
    res, runtime = timed(ExperimentConfig("fig1", samples=200_000, seed=0))
    c = checks(res)
    s = res.summary
    ok = c["lower_bound_holds"].passed and c["upper_bound_holds"].passed and c["closed_vs_numeric"].passed and runtime < 60
    acceptance_line(
        3,
        ok,
        f"{s['samples']} samples: lower violations {s['lower_violations']}, upper violations {s['upper_violations']}"
        f" (max excess {s['max_upper_excess']:.4g} bits, all at r >= {s['min_r_in_upper_violation']}),"
        f" closed vs numeric {s['max_closed_vs_numeric']:.2e}, {runtime:.1f} s",
    )
    assert c["lower_bound_holds"].passed
    assert c["closed_vs_numeric"].passed
    assert runtime < 60
    assert c["upper_bound_holds"].passed, "upper bound I(1 - lam^2)^(3/4) is exceeded by near-pure states"


def test_c04_mu_fit(acceptance_line):
    res, runtime = timed(ExperimentConfig("mu_fit", samples=100_000, seed=0))
    s = res.summary
    ok = s["valid"] == 100_000 and s["mu_min"] > 0.7 and s["mu_max"] <= 1.0 + 1e-9
    acceptance_line(4, ok, f"{s['valid']} valid ({s['excluded_degenerate']} excluded): mu in [{s['mu_min']:.6f}, {s['mu_max']:.12f}]")
    assert ok


def test_c05_fig2_werner_grid(acceptance_line):
    res, _ = timed(ExperimentConfig("fig2", seed=0))
    c = checks(res)
    ok = len(res.records) == 181 * 11 and res.passed
    acceptance_line(
        5,
        ok,
        f"181 x 11 grid: closed vs numeric {c['closed_vs_numeric'].value:.2e}, alpha=0 row {c['alpha0_row_zero'].value:.1e},"
        f" max {c['max_at_most_2_bits'].value:.12f} bits, min alpha step {c['monotone_in_alpha'].value:.3e}",
    )
    assert ok


def test_c06_fig3_density(acceptance_line):
    res, _ = timed(ExperimentConfig("fig3", seed=0))
    c = checks(res)
    alphas = {r["alpha"] for r in res.records}
    ok = c["density_at_least_half"].passed and c["density_one_at_half_pi"].passed and min(a for a in alphas if a > 0) <= 1e-8
    acceptance_line(
        6,
        ok,
        f"{res.summary['curves']} curves down to alpha=1e-8: min density {c['density_at_least_half'].value:.12f},"
        f" max |density(pi/2) - 1| = {c['density_one_at_half_pi'].value:.1e}",
    )
    assert ok


def test_c07_fig4_correlations(acceptance_line):
    res, runtime = timed(ExperimentConfig("fig4", samples=10_000, seed=0))
    c = checks(res)
    s = res.summary
    ok = (
        c["discord_le_ji"].passed
        and c["delta_pct_nonnegative"].passed
        and c["delta_pct_below_5"].passed
        and c["spot_checks_match_closed_form"].passed
        and s["spot_checks"] >= 100
        and runtime < 600
    )
    acceptance_line(
        7,
        ok,
        f"10000 samples: max(D_AB - JI) = {s['max_discord_minus_ji']:.3e}, Delta% in [{s['delta_pct_min']:.3e},"
        f" {s['delta_pct_max']:.4f}], {s['spot_checks']} spot checks within {s['max_spot_check_deviation']:.1e}, {runtime:.0f} s",
    )
    assert ok


VERIFY_CRITERION_8 = ("eq10", "eq11", "product", "bounds", "ur", "ji_nonneg", "faithfulness")


def test_c08_identity_suites(acceptance_line, verify_run):
    res, runtime = verify_run
    c = checks(res)
    ok = all(c[name].passed for name in VERIFY_CRITERION_8)
    detail = ", ".join(f"{n} {c[n].value:.1e}" for n in VERIFY_CRITERION_8)
    acceptance_line(8, ok, f"10000 triples at d=2 and d=4: {detail} ({runtime:.0f} s)")
    assert ok, [c[n] for n in VERIFY_CRITERION_8 if not c[n].passed]
    assert res.passed, [x for x in res.checks if not x.passed]


def test_c09_mub_collapse(acceptance_line, verify_run):
    res, _ = verify_run
    c = checks(res)
    names = [f"mub_collapse_d{d}" for d in (2, 3, 4)] + [f"mub_ji_d{d}" for d in (2, 3, 4)]
    ok = all(c[n].passed for n in names) and all(
        next(r for r in res.records if r["invariant"] == n)["evaluations"] == 1000 for n in names
    )
    acceptance_line(9, ok, "1000 states each for d = 2, 3, 4: " + ", ".join(f"{n} {c[n].value:.1e}" for n in names))
    assert ok


def test_c10_classical_oracle(acceptance_line):
    worst = 0.0
    for i in range(1000):
        w = random_distribution((32, 32), RngStream(0, i).generator())
        for out in (
            classical_unrevealed(w, "q"),
            classical_unrevealed(w, "p"),
            classical_sequential(w, "q-then-p"),
            classical_sequential(w, "p-then-q"),
        ):
            worst = max(worst, float(np.max(np.abs(out - w))))
    ok = worst <= 1e-12
    acceptance_line(10, ok, f"1000 grids of 32 x 32, both orders: max deviation {worst:.1e}")
    assert ok


DETERMINISM_RUNS = {
    "fig1": {"samples": 4000},
    "mu_fit": {"samples": 4000},
    "fig2": {},
    "fig3": {"samples": 10},
    "fig4": {"samples": 200},
    "verify": {"samples": 40, "mub_samples": 40, "classical_grids": 10},
}


def test_c11_determinism(acceptance_line, tmp_path, monkeypatch):
    monkeypatch.delenv("IRREALITY_LAB_THREADS", raising=False)
    same = {}
    for exp, kw in DETERMINISM_RUNS.items():
        blobs = []
        for k, threads in enumerate((1, 1, 4, 4)):
            out = tmp_path / f"{exp}_{k}"
            run_experiment(ExperimentConfig(exp, seed=11, threads=threads, out_dir=out, **kw))
            blobs.append(sorted((p.name, p.read_bytes()) for p in out.glob("*.csv")))
        same[exp] = all(b == blobs[0] for b in blobs)
    ok = all(same.values())
    acceptance_line(11, ok, "byte-identical CSVs across reruns with 1 and 4 workers: " + ", ".join(f"{e} {'yes' if v else 'NO'}" for e, v in same.items()))
    assert ok
