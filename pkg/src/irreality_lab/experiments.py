"""Monte Carlo harness for the qubit and Werner studies.

Every sample draws from its own ``RngStream(seed, index)``, so a record
depends only on the configuration and its index. Work is split into
contiguous index chunks; chunk results are concatenated in index order,
which makes the output identical for any worker count.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from functools import partial
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .channels import (
    dephase,
    dephase_projectors,
    dephase_seq,
    is_joint_reality_state,
    state_distance,
)
from .classical import classical_sequential, classical_unrevealed, random_distribution
from .closedform import (
    QubitConfig,
    WernerConfig,
    mu_exponent,
    qubit_information,
    qubit_irreality,
    qubit_irreality_bounds,
    werner_information,
    werner_ji,
    werner_ji_per_info,
    werner_ji_per_info_limit,
    werner_onesided_discord,
)
from .linalg import HermiticityError, eig_hermitian, eigvalsh_batch, hermitian, partial_trace, schatten2, tensor
from .measures import (
    EIGEN_FLOOR,
    entropic_ur_check,
    information,
    irreality,
    ji_bounds,
    ji_decomposition,
    joint_irreality,
    mutual_information,
    delta_inner,
    onesided_discord_min,
    overlap_c,
    symmetric_discord,
    von_neumann_entropy,
)
from .qstate import (
    DensityMatrix,
    Observable,
    RngStream,
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    embed_vectors,
    local_observable,
    maximally_mixed,
    mub_pair,
    random_density_matrix,
    random_observable,
    random_qubit_config,
    random_unitary,
    werner_observables,
    werner_state,
)

log = logging.getLogger(__name__)

EXPERIMENTS = ("fig1", "fig2", "fig3", "fig4", "mu_fit", "verify")
DEFAULT_SAMPLES = {"fig1": 200_000, "mu_fit": 100_000, "fig2": 0, "fig3": 100, "fig4": 10_000, "verify": 10_000}
PAPER_SAMPLES = {"fig1": 2_000_000, "mu_fit": 1_000_000, "fig2": 0, "fig3": 1_000, "fig4": 100_000, "verify": 10_000}
DEFAULT_TOLERANCES = {
    "fig1": {"sandwich": 1e-9, "closed_vs_numeric": 1e-9},
    "mu_fit": {"mu_min_exclusive": 0.7, "mu_max": 1.0 + 1e-9},
    "fig2": {"closed_vs_numeric": 1e-8, "alpha0_row": 1e-10, "max_bits": 2.0, "monotone_slack": 1e-12},
    "fig3": {"min_density": 0.5 - 1e-6, "theta_half_pi": 1e-8, "numeric_ratio": 1e-6, "limit": 1e-6},
    "fig4": {
        "discord_le_ji": 1e-9,
        "delta_lower_pct": -1e-7,
        "delta_upper_pct": 5.0,
        "ji_floor": 1e-9,
        "spot_check": 1e-6,
        "closed_vs_numeric": 1e-8,
        "equality": 1e-9,
    },
    "verify": {
        "eq10": 1e-10,
        "eq11": 1e-10,
        "product": 1e-10,
        "bounds": 1e-9,
        "ur": 1e-9,
        "ji_nonneg": 1e-10,
        "faithful_ji": 1e-9,
        "faithful_state": 1e-6,
        "mub_state": 1e-10,
        "mub_ji": 1e-9,
        "channel": 1e-12,
        "probability": 1e-10,
        "covariance": 1e-9,
        "classical": 1e-12,
        "linalg": 1e-10,
    },
}
THREADS_ENV = "IRREALITY_LAB_THREADS"


@dataclass
class ExperimentConfig:
    experiment: str
    samples: int | None = None
    seed: int = 0
    threads: int = 1
    out_dir: Path | None = None
    theta_points: int = 181
    alphas: tuple[float, ...] = tuple(round(0.1 * k, 10) for k in range(11))
    small_alphas: tuple[float, ...] = (1e-8, 1e-7, 1e-6)
    spot_check_every: int = 100
    werner_sign: str = "-"
    refined: bool = True
    mub_samples: int = 1_000
    classical_grids: int = 1_000
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.samples is None:
            self.samples = DEFAULT_SAMPLES[self.experiment]
        if self.samples < 0 or self.threads < 1 or self.theta_points < 2 or self.spot_check_every < 1:
            raise ValueError("sample counts, threads and grid sizes must be positive")
        tol = dict(DEFAULT_TOLERANCES[self.experiment])
        tol.update(self.tolerances)
        self.tolerances = tol

    @property
    def workers(self) -> int:
        cap = os.environ.get(THREADS_ENV)
        n = self.threads
        if cap:
            n = min(n, max(1, int(cap)))
        return n

    def thetas(self) -> np.ndarray:
        return np.linspace(0.0, math.pi, self.theta_points)


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""


@dataclass
class ExperimentResult:
    experiment: str
    columns: list[str]
    records: list[dict]
    checks: list[Check]
    summary: dict
    extra_tables: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


# ---------------------------------------------------------------------------
# execution


def _run_chunk(fn: Callable, lo: int, hi: int) -> list:
    return [fn(i) for i in range(lo, hi)]


def parallel_map(fn: Callable[[int], object], n: int, workers: int = 1, start: int = 0) -> list:
    """``[fn(i) for i in range(start, start + n)]``, optionally over worker processes."""
    if workers <= 1 or n < 2 * workers:
        return [fn(i) for i in range(start, start + n)]
    n_chunks = workers * 4
    edges = [start + (n * k) // n_chunks for k in range(n_chunks + 1)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_chunk, fn, edges[k], edges[k + 1]) for k in range(n_chunks)]
        out = []
        for f in futures:
            out.extend(f.result())
    return out


# ---------------------------------------------------------------------------
# fig1: qubit irreality sandwich


def _fig1_sample(seed: int, i: int) -> dict:
    g = RngStream(seed, i).generator()
    r, lam = random_qubit_config(g)
    c = QubitConfig(r, lam)
    lo, hi = qubit_irreality_bounds(c)
    r_vec, x_hat = embed_vectors(r, lam, g)
    return {
        "index": i,
        "r": r,
        "lambda": lam,
        "info": qubit_information(r),
        "irreality": qubit_irreality(c),
        "irreality_numeric": None,
        "lower": lo,
        "upper": hi,
        "_geometry": (r_vec, x_hat),
    }


def _entropy_rows(w: np.ndarray) -> np.ndarray:
    w = np.where(w > EIGEN_FLOOR, w, 1.0)
    return np.maximum(-np.sum(w * np.log2(w), axis=1), 0.0)


def qubit_irreality_matrix(r_vecs: np.ndarray, x_hats: np.ndarray) -> np.ndarray:
    """Matrix-route irreality S(Phi_X rho) - S(rho) for stacks of Bloch vectors and directions."""
    sig = np.stack([PAULI_X, PAULI_Y, PAULI_Z])
    rho = (PAULI_I + np.einsum("ka,aij->kij", r_vecs, sig)) / 2
    n_sig = np.einsum("ka,aij->kij", x_hats, sig)
    plus = (PAULI_I + n_sig) / 2
    minus = (PAULI_I - n_sig) / 2
    phi = plus @ rho @ plus + minus @ rho @ minus
    return _entropy_rows(eigvalsh_batch(phi)) - _entropy_rows(eigvalsh_batch(rho))


FIG1_COLUMNS = ["index", "r", "lambda", "info", "irreality", "irreality_numeric", "lower", "upper"]


def run_fig1(cfg: ExperimentConfig) -> ExperimentResult:
    tol = cfg.tolerances
    recs = parallel_map(partial(_fig1_sample, cfg.seed), cfg.samples, cfg.workers)
    if recs:
        r_vecs = np.array([r["_geometry"][0] for r in recs])
        x_hats = np.array([r["_geometry"][1] for r in recs])
        numeric = qubit_irreality_matrix(r_vecs, x_hats)
        for rec, v in zip(recs, numeric):
            rec["irreality_numeric"] = float(v)
            del rec["_geometry"]
    irr = np.array([r["irreality"] for r in recs])
    num = np.array([r["irreality_numeric"] for r in recs])
    lo = np.array([r["lower"] for r in recs])
    hi = np.array([r["upper"] for r in recs])
    low_bad = int(np.sum(lo > irr + tol["sandwich"]))
    up_bad = int(np.sum(irr > hi + tol["sandwich"]))
    diff = float(np.max(np.abs(irr - num))) if recs else 0.0
    gap = float(np.max(hi - irr)) if recs else 0.0
    excess = float(np.max(irr - hi)) if recs else 0.0
    checks = [
        Check("lower_bound_holds", low_bad == 0, low_bad, 0, "samples with lower > irreality + tol"),
        Check("upper_bound_holds", up_bad == 0, up_bad, 0, f"samples with irreality > upper + tol; worst excess {excess:.3e}"),
        Check("closed_vs_numeric", diff <= tol["closed_vs_numeric"], diff, tol["closed_vs_numeric"]),
    ]
    bad_r = [r["r"] for r in recs if r["irreality"] > r["upper"] + tol["sandwich"]]
    summary = {
        "samples": len(recs),
        "lower_violations": low_bad,
        "upper_violations": up_bad,
        "upper_violation_fraction": up_bad / max(len(recs), 1),
        "max_upper_excess": excess,
        "min_r_in_upper_violation": min(bad_r) if bad_r else None,
        "max_upper_minus_irreality": gap,
        "max_closed_vs_numeric": diff,
    }
    return ExperimentResult("fig1", FIG1_COLUMNS, recs, checks, summary)


# ---------------------------------------------------------------------------
# mu fit


def _mu_sample(seed: int, i: int) -> dict:
    g = RngStream(seed, i).generator()
    r, lam = random_qubit_config(g)
    return {"index": i, "r": r, "lambda": lam, "mu": mu_exponent(QubitConfig(r, lam))}


MU_COLUMNS = ["index", "r", "lambda", "mu"]
MU_BINS = 30


def run_mu_fit(cfg: ExperimentConfig) -> ExperimentResult:
    """Draw configurations until ``samples`` valid exponents exist (degenerate ones are counted)."""
    tol = cfg.tolerances
    target = cfg.samples
    valid: list[dict] = []
    excluded = 0
    start = 0
    while len(valid) < target:
        batch = max(int((target - len(valid)) * 1.01) + 16, 16)
        for rec in parallel_map(partial(_mu_sample, cfg.seed), batch, cfg.workers, start):
            if len(valid) >= target:
                break
            if math.isnan(rec["mu"]):
                excluded += 1
            else:
                valid.append(rec)
        start += batch
    mu = np.array([r["mu"] for r in valid])
    lo, hi = (float(mu.min()), float(mu.max())) if valid else (math.nan, math.nan)
    counts, edges = np.histogram(mu, bins=MU_BINS, range=(0.7, 1.0))
    hist = [{"bin_lo": float(edges[k]), "bin_hi": float(edges[k + 1]), "count": int(counts[k])} for k in range(MU_BINS)]
    outside = int(np.sum((mu < 0.7) | (mu > 1.0)))
    checks = [
        Check("mu_min_above", lo > tol["mu_min_exclusive"], lo, tol["mu_min_exclusive"]),
        Check("mu_max_below", hi <= tol["mu_max"], hi, tol["mu_max"]),
    ]
    summary = {"valid": len(valid), "excluded_degenerate": excluded, "mu_min": lo, "mu_max": hi, "outside_hist_range": outside}
    return ExperimentResult("mu_fit", MU_COLUMNS, valid, checks, summary, {"hist": (["bin_lo", "bin_hi", "count"], hist)})


# ---------------------------------------------------------------------------
# Werner studies


def _werner_triple(alpha: float, theta: float, sign: str, refined: bool):
    x, y = werner_observables(theta, refined)
    return werner_state(alpha, sign), x, y


def _fig2_point(alphas, thetas, sign, refined, i: int) -> dict:
    a = alphas[i // len(thetas)]
    t = thetas[i % len(thetas)]
    rho, x, y = _werner_triple(a, t, sign, refined)
    c = WernerConfig(a, t)
    closed = werner_ji(c)
    return {
        "alpha": a,
        "theta": t,
        "ji_closed": closed,
        "ji_numeric": joint_irreality(rho, x, y),
        "info": werner_information(a),
        "ji_per_info": werner_ji_per_info(c),
    }


FIG2_COLUMNS = ["alpha", "theta", "ji_closed", "ji_numeric", "info", "ji_per_info"]


def run_fig2(cfg: ExperimentConfig) -> ExperimentResult:
    tol = cfg.tolerances
    alphas = sorted(cfg.alphas)
    thetas = cfg.thetas()
    fn = partial(_fig2_point, tuple(alphas), tuple(thetas), cfg.werner_sign, cfg.refined)
    recs = parallel_map(fn, len(alphas) * len(thetas), cfg.workers)
    closed = np.array([r["ji_closed"] for r in recs]).reshape(len(alphas), len(thetas))
    numeric = np.array([r["ji_numeric"] for r in recs]).reshape(len(alphas), len(thetas))
    diff = float(np.max(np.abs(closed - numeric)))
    zero_rows = [k for k, a in enumerate(alphas) if a == 0.0]
    zero_dev = float(max((np.max(np.abs(np.concatenate([closed[k], numeric[k]]))) for k in zero_rows), default=0.0))
    top = float(max(closed.max(), numeric.max()))
    steps = np.diff(closed, axis=0)
    worst_step = float(steps.min()) if steps.size else 0.0
    checks = [
        Check("closed_vs_numeric", diff <= tol["closed_vs_numeric"], diff, tol["closed_vs_numeric"]),
        Check("alpha0_row_zero", bool(zero_rows) and zero_dev <= tol["alpha0_row"], zero_dev, tol["alpha0_row"]),
        Check("max_at_most_2_bits", top <= tol["max_bits"] + 1e-12, top, tol["max_bits"]),
        Check("monotone_in_alpha", worst_step >= -tol["monotone_slack"], worst_step, -tol["monotone_slack"]),
    ]
    summary = {"grid": [len(thetas), len(alphas)], "max_closed_vs_numeric": diff, "max_ji": top, "min_alpha_step": worst_step}
    return ExperimentResult("fig2", FIG2_COLUMNS, recs, checks, summary)


FIG3_COLUMNS = ["kind", "alpha", "theta", "ji_per_info", "ji_per_info_numeric"]
FIG3_NUMERIC_MIN_ALPHA = 0.05


def _fig3_row(curves, thetas, sign, refined, i: int) -> dict:
    kind, a = curves[i // len(thetas)]
    t = thetas[i % len(thetas)]
    if kind == "limit0":
        val = werner_ji_per_info_limit(t)
    else:
        val = werner_ji_per_info(WernerConfig(a, t))
    numeric = None
    if kind == "grid" and a >= FIG3_NUMERIC_MIN_ALPHA:
        rho, x, y = _werner_triple(a, t, sign, refined)
        numeric = joint_irreality(rho, x, y) / information(rho)
    return {"kind": kind, "alpha": a, "theta": t, "ji_per_info": val, "ji_per_info_numeric": numeric}


def run_fig3(cfg: ExperimentConfig) -> ExperimentResult:
    tol = cfg.tolerances
    thetas = cfg.thetas()
    curves = [("limit0", 0.0)]
    curves += [("grid", a) for a in sorted(set(cfg.small_alphas) | {a for a in cfg.alphas if a > 0})]
    curves += [("random", float(RngStream(cfg.seed, k).generator().random())) for k in range(cfg.samples)]
    curves = [(k, a) for k, a in curves if k != "random" or a > 0]
    fn = partial(_fig3_row, tuple(curves), tuple(thetas), cfg.werner_sign, cfg.refined)
    recs = parallel_map(fn, len(curves) * len(thetas), cfg.workers)
    vals = np.array([r["ji_per_info"] for r in recs])
    lowest = float(vals.min())
    # exact theta = pi/2 for every curve, independent of the grid spacing
    half_pi_dev = max(abs(werner_ji_per_info(WernerConfig(a, math.pi / 2)) - 1.0) for k, a in curves if k != "limit0")
    half_pi_dev = max(half_pi_dev, abs(werner_ji_per_info_limit(math.pi / 2) - 1.0))
    num_dev = max(
        (abs(r["ji_per_info"] - r["ji_per_info_numeric"]) for r in recs if r["ji_per_info_numeric"] is not None),
        default=0.0,
    )
    # small-alpha values approach the exact limit linearly in alpha
    lim_dev = max(
        abs(werner_ji_per_info(WernerConfig(a, t)) - werner_ji_per_info_limit(t))
        for a in cfg.small_alphas
        for t in thetas
    ) if cfg.small_alphas else 0.0
    checks = [
        Check("density_at_least_half", lowest >= tol["min_density"], lowest, tol["min_density"]),
        Check("density_one_at_half_pi", half_pi_dev <= tol["theta_half_pi"], half_pi_dev, tol["theta_half_pi"]),
        Check("closed_vs_numeric", num_dev <= tol["numeric_ratio"], num_dev, tol["numeric_ratio"]),
        Check("small_alpha_limit", lim_dev <= tol["limit"], lim_dev, tol["limit"]),
    ]
    summary = {
        "curves": len(curves),
        "random_curves": sum(1 for k, _ in curves if k == "random"),
        "min_density": lowest,
        "min_density_limit0": min(werner_ji_per_info_limit(t) for t in thetas),
        "min_density_alpha1": min(werner_ji_per_info(WernerConfig(1.0, t)) for t in thetas),
        "max_half_pi_deviation": half_pi_dev,
        "max_small_alpha_vs_limit": lim_dev,
    }
    return ExperimentResult("fig3", FIG3_COLUMNS, recs, checks, summary)


FIG4_COLUMNS = [
    "index",
    "alpha",
    "theta",
    "ji_closed",
    "ji_numeric",
    "delta_xy",
    "delta_yx",
    "delta_xy_inner",
    "delta_yx_inner",
    "script_d",
    "delta_pct",
    "d_ab_closed",
    "d_ab_numeric",
]


def _fig4_sample(seed, every, sign, refined, ji_floor, i: int) -> dict:
    g = RngStream(seed, i).generator()
    a = float(g.random())
    t = float(g.random() * math.pi)
    rho, x, y = _werner_triple(a, t, sign, refined)
    ji = joint_irreality(rho, x, y)
    dxy = delta_inner(rho, x, y)
    dyx = delta_inner(rho, y, x)
    script = (abs(dxy) + abs(dyx)) / 2
    rec = {
        "index": i,
        "alpha": a,
        "theta": t,
        "ji_closed": werner_ji(WernerConfig(a, t)),
        "ji_numeric": ji,
        "delta_xy": abs(dxy),
        "delta_yx": abs(dyx),
        "delta_xy_inner": dxy,
        "delta_yx_inner": dyx,
        "script_d": script,
        "delta_pct": 100 * (script - ji) / ji if ji > ji_floor else None,
        "d_ab_closed": werner_onesided_discord(a),
        "d_ab_numeric": None,
    }
    if i % every == 0:
        rec["d_ab_numeric"] = (onesided_discord_min(rho, "A").value + onesided_discord_min(rho, "B").value) / 2
    return rec


def _fig4_equality_cases(sign: str, refined: bool, thetas) -> float:
    worst = 0.0
    for a in (0.0, 0.25, 0.5, 0.75, 1.0):
        for t in (0.0, math.pi):
            rho, x, y = _werner_triple(a, t, sign, refined)
            worst = max(worst, abs(werner_onesided_discord(a) - joint_irreality(rho, x, y)))
    for t in thetas:
        rho, x, y = _werner_triple(0.0, t, sign, refined)
        worst = max(worst, abs(werner_onesided_discord(0.0) - joint_irreality(rho, x, y)))
    return worst


def run_fig4(cfg: ExperimentConfig) -> ExperimentResult:
    tol = cfg.tolerances
    fn = partial(_fig4_sample, cfg.seed, cfg.spot_check_every, cfg.werner_sign, cfg.refined, tol["ji_floor"])
    recs = parallel_map(fn, cfg.samples, cfg.workers)
    ji = np.array([r["ji_numeric"] for r in recs])
    dab = np.array([r["d_ab_closed"] for r in recs])
    above = float(np.max(dab - ji)) if recs else -math.inf
    deltas = np.array([r["delta_pct"] for r in recs if r["delta_pct"] is not None])
    excluded = sum(1 for r in recs if r["delta_pct"] is None)
    dmin = float(deltas.min()) if deltas.size else math.nan
    dmax = float(deltas.max()) if deltas.size else math.nan
    spots = [r for r in recs if r["d_ab_numeric"] is not None]
    spot_dev = max((abs(r["d_ab_numeric"] - r["d_ab_closed"]) for r in spots), default=math.nan)
    cn = float(np.max(np.abs(ji - np.array([r["ji_closed"] for r in recs])))) if recs else 0.0
    eq = _fig4_equality_cases(cfg.werner_sign, cfg.refined, cfg.thetas())
    checks = [
        Check("discord_le_ji", above <= tol["discord_le_ji"], above, tol["discord_le_ji"]),
        Check("delta_pct_nonnegative", bool(deltas.size) and dmin >= tol["delta_lower_pct"], dmin, tol["delta_lower_pct"]),
        Check("delta_pct_below_5", bool(deltas.size) and dmax < tol["delta_upper_pct"], dmax, tol["delta_upper_pct"]),
        Check("spot_checks_match_closed_form", bool(spots) and spot_dev <= tol["spot_check"], spot_dev, tol["spot_check"],
              f"{len(spots)} spot checks"),
        Check("ji_closed_vs_numeric", cn <= tol["closed_vs_numeric"], cn, tol["closed_vs_numeric"]),
        Check("equality_cases", eq <= tol["equality"], eq, tol["equality"]),
    ]
    summary = {
        "samples": len(recs),
        "delta_pct_min": dmin,
        "delta_pct_max": dmax,
        "delta_excluded_small_ji": excluded,
        "max_discord_minus_ji": above,
        "spot_checks": len(spots),
        "max_spot_check_deviation": spot_dev,
        "max_ji_closed_vs_numeric": cn,
        "max_equality_case_deviation": eq,
    }
    return ExperimentResult("fig4", FIG4_COLUMNS, recs, checks, summary)


# ---------------------------------------------------------------------------
# verification suites


class _Worst:
    """Running worst-case residual per named invariant."""

    def __init__(self):
        self.values: dict[str, float] = {}
        self.counts: dict[str, int] = {}

    def add(self, name: str, residual: float) -> None:
        self.values[name] = max(self.values.get(name, 0.0), float(residual))
        self.counts[name] = self.counts.get(name, 0) + 1

    def merge(self, other: "_Worst") -> None:
        for k, v in other.values.items():
            self.values[k] = max(self.values.get(k, 0.0), v)
            self.counts[k] = self.counts.get(k, 0) + other.counts[k]


def _commuting_partner(x: Observable, g) -> Observable:
    # same eigenbasis, permuted labels: commutes with x and is still rank-1
    perm = g.permutation(x.dim)
    return Observable.from_eigenbasis(np.arange(x.dim, dtype=float), x.basis[:, perm])


def _triple_checks(w: _Worst, rho: DensityMatrix, x: Observable, y: Observable, g) -> None:
    ji = joint_irreality(rho, x, y)
    dec = ji_decomposition(rho, x, y)
    w.add("eq10", abs(ji - dec.half_sum))
    w.add("ji_nonneg", max(0.0, -ji))
    w.add("ji_ge_mean_irreality", max(0.0, (dec.irr_x + dec.irr_y) - 2 * ji))
    lo, hi = ji_bounds(rho, x, y)
    w.add("bounds", max(0.0, lo - ji, ji - hi))
    c = overlap_c(x, y)
    ur = von_neumann_entropy(dephase(rho, x)) + von_neumann_entropy(dephase(rho, y)) + 2 * math.log2(c)
    w.add("ur", max(0.0, -ur))
    w.add("ur_check_flag", 0.0 if entropic_ur_check(rho, x, y) else 1.0)
    # faithfulness on the random triple and on constructed joint-reality triples
    yc = _commuting_partner(x, g)
    joint = dephase_seq(rho, x, yc)
    for r_, x_, y_ in ((rho, x, y), (joint, x, yc), (maximally_mixed(rho.dim), x, y)):
        small = joint_irreality(r_, x_, y_) <= 1e-9
        crit = is_joint_reality_state(r_, x_, y_, 1e-6)
        w.add("faithfulness", 0.0 if small == crit else 1.0)
    w.add("joint_implies_individual", max(state_distance(dephase(joint, x), joint), state_distance(dephase(joint, yc), joint)))
    # Bayes symmetry on the joint-reality state
    px = np.array([np.trace(p @ joint.matrix).real for p in x.projectors])
    py = np.array([np.trace(p @ joint.matrix).real for p in yc.projectors])
    cond = np.array([[np.trace(q @ p).real for q in yc.projectors] for p in x.projectors])
    w.add("bayes", float(np.max(np.abs(cond * py[None, :] - cond * px[:, None]))))
    # channel laws
    phi = dephase(rho, x)
    w.add("channel_trace", abs(np.trace(phi.matrix).real - 1.0))
    w.add("channel_idempotent", float(np.max(np.abs(dephase(phi, x).matrix - phi.matrix))))
    w.add("channel_unital", float(np.max(np.abs(dephase(maximally_mixed(rho.dim), x).matrix - np.eye(rho.dim) / rho.dim))))
    w.add("channel_projector_sum", float(np.max(np.abs(dephase_projectors(rho, x).matrix - phi.matrix))))
    w.add("entropy_monotone", max(0.0, von_neumann_entropy(rho) - von_neumann_entropy(phi) - 1e-10))
    # basis covariance
    u = random_unitary(rho.dim, g)
    rho_u = DensityMatrix(u @ rho.matrix @ u.conj().T, rho.dims, check=False)
    w.add("covariance", abs(joint_irreality(rho_u, x.conjugated(u), y.conjugated(u)) - ji))


def _local_checks(w: _Worst, rho: DensityMatrix, g) -> None:
    dims = rho.dims
    a = random_observable(dims[0], g)
    b = random_observable(dims[1], g)
    xa, yb = local_observable(a, dims, "A"), local_observable(b, dims, "B")
    ji = joint_irreality(rho, xa, yb)
    ra, rb = rho.reduced("A"), rho.reduced("B")
    rhs = irreality(ra, a) + irreality(rb, b) + symmetric_discord(rho, a, b)
    w.add("eq11", abs(ji - rhs))
    prod = DensityMatrix(np.kron(ra.matrix, rb.matrix), dims, check=False)
    w.add("product", abs(joint_irreality(prod, xa, yb) - irreality(ra, a) - irreality(rb, b)))
    w.add("delta_local_is_discord", abs(abs(delta_inner(rho, xa, yb)) - symmetric_discord(rho, a, b)))
    w.add("delta_product_zero", abs(delta_inner(prod, *(random_observable(rho.dim, g) for _ in range(2)))))
    # probability consistency for the commuting pair and a random Z
    z = random_observable(rho.dim, g)
    sxy, syx = dephase_seq(rho, xa, yb), dephase_seq(rho, yb, xa)
    w.add("probability", max(abs(np.trace(p @ (sxy.matrix - syx.matrix))) for p in z.projectors))


def _verify_triples(seed: int, i: int) -> _Worst:
    w = _Worst()
    g = RngStream(seed, i).generator()
    # qubit triple
    rho2 = random_density_matrix(2, g, rank=int(g.integers(1, 3)))
    _triple_checks(w, rho2, random_observable(2, g), random_observable(2, g), g)
    # two-qubit triple
    rho4 = random_density_matrix(4, g, rank=int(g.integers(1, 5)), dims=(2, 2))
    _triple_checks(w, rho4, random_observable(4, g), random_observable(4, g), g)
    _local_checks(w, rho4, g)
    return w


def _verify_mub(seed: int, i: int) -> _Worst:
    w = _Worst()
    g = RngStream(seed, 10_000_000 + i).generator()
    for d in (2, 3, 4):
        x, xbar = mub_pair(d)
        rho = random_density_matrix(d, g, rank=int(g.integers(1, d + 1)))
        w.add(f"mub_collapse_d{d}", schatten2(dephase_seq(rho, x, xbar).matrix - np.eye(d) / d))
        w.add(f"mub_ji_d{d}", abs(joint_irreality(rho, x, xbar) - information(rho)))
    return w


def _verify_classical(seed: int, i: int) -> _Worst:
    w = _Worst()
    g = RngStream(seed, 20_000_000 + i).generator()
    grid = random_distribution((32, 32), g)
    w.add("classical_q", float(np.max(np.abs(classical_unrevealed(grid, "q") - grid))))
    w.add("classical_p", float(np.max(np.abs(classical_unrevealed(grid, "p") - grid))))
    w.add("classical_q_then_p", float(np.max(np.abs(classical_sequential(grid, "q-then-p") - grid))))
    w.add("classical_p_then_q", float(np.max(np.abs(classical_sequential(grid, "p-then-q") - grid))))
    return w


def _verify_linalg(seed: int, i: int) -> _Worst:
    w = _Worst()
    g = RngStream(seed, 30_000_000 + i).generator()
    d = int(g.integers(1, 17))
    z = g.standard_normal((d, d)) + 1j * g.standard_normal((d, d))
    h = (z + z.conj().T) / 2
    vals, vecs = eig_hermitian(h)
    w.add("eig_reconstruction", float(np.max(np.abs(vecs @ np.diag(vals) @ vecs.conj().T - h))) / d)
    w.add("eig_unitary", float(np.max(np.abs(vecs.conj().T @ vecs - np.eye(d)))) / d)
    a = g.standard_normal((2, 2)) + 1j * g.standard_normal((2, 2))
    b = g.standard_normal((3, 3)) + 1j * g.standard_normal((3, 3))
    w.add("tensor_trace", abs(np.trace(tensor(a, b)) - np.trace(a) * np.trace(b)))
    ra = random_density_matrix(2, g).matrix
    rb = random_density_matrix(3, g).matrix
    pab = tensor(ra, rb)
    w.add("partial_trace_product", max(np.max(np.abs(partial_trace(pab, (2, 3), "A") - ra)),
                                       np.max(np.abs(partial_trace(pab, (2, 3), "B") - rb))))
    u = random_unitary(d, g)
    w.add("schatten_invariance", abs(schatten2(u @ h @ u.conj().T) - schatten2(h)))
    return w


VERIFY_THRESHOLDS = {
    "eq10": "eq10",
    "eq11": "eq11",
    "product": "product",
    "bounds": "bounds",
    "ur": "ur",
    "ur_check_flag": None,
    "ji_nonneg": "ji_nonneg",
    "ji_ge_mean_irreality": "ji_nonneg",
    "faithfulness": None,
    "joint_implies_individual": "faithful_state",
    "bayes": "probability",
    "probability": "probability",
    "channel_trace": "channel",
    "channel_idempotent": "channel",
    "channel_unital": "channel",
    "channel_projector_sum": "channel",
    "entropy_monotone": None,
    "covariance": "covariance",
    "delta_local_is_discord": "eq11",
    "delta_product_zero": "product",
    "classical_q": "classical",
    "classical_p": "classical",
    "classical_q_then_p": "classical",
    "classical_p_then_q": "classical",
    "eig_reconstruction": "linalg",
    "eig_unitary": "linalg",
    "tensor_trace": "channel",
    "partial_trace_product": "channel",
    "schatten_invariance": "linalg",
}


def _fault_injection() -> bool:
    skew = np.array([[1.0, 0.5], [0.5 + 1e-6, 0.0]])
    try:
        hermitian(skew)
    except HermiticityError:
        return True
    return False


VERIFY_COLUMNS = ["invariant", "passed", "worst_residual", "threshold", "evaluations"]


def run_verify(cfg: ExperimentConfig) -> ExperimentResult:
    tol = cfg.tolerances
    total = _Worst()
    jobs = [
        (_verify_triples, cfg.samples),
        (_verify_mub, cfg.mub_samples),
        (_verify_classical, cfg.classical_grids),
        (_verify_linalg, max(cfg.samples // 100, 10)),
    ]
    for fn, n in jobs:
        for part in parallel_map(partial(fn, cfg.seed), n, cfg.workers):
            total.merge(part)
    checks: list[Check] = []
    recs: list[dict] = []
    for name in sorted(total.values):
        key = VERIFY_THRESHOLDS.get(name)
        if name.startswith("mub_collapse"):
            key = "mub_state"
        elif name.startswith("mub_ji"):
            key = "mub_ji"
        threshold = tol[key] if key else 0.0
        worst = total.values[name]
        ok = worst <= threshold
        checks.append(Check(name, ok, worst, threshold))
        recs.append({"invariant": name, "passed": ok, "worst_residual": worst, "threshold": threshold,
                     "evaluations": total.counts[name]})
    fault = _fault_injection()
    checks.append(Check("fault_injection_rejected", fault, 0.0 if fault else 1.0, 0.0))
    recs.append({"invariant": "fault_injection_rejected", "passed": fault, "worst_residual": 0.0 if fault else 1.0,
                 "threshold": 0.0, "evaluations": 1})
    summary = {"triples_per_dimension": cfg.samples, "failed": [c.name for c in checks if not c.passed]}
    return ExperimentResult("verify", VERIFY_COLUMNS, recs, checks, summary)


RUNNERS = {
    "fig1": run_fig1,
    "fig2": run_fig2,
    "fig3": run_fig3,
    "fig4": run_fig4,
    "mu_fit": run_mu_fit,
    "verify": run_verify,
}


# ---------------------------------------------------------------------------
# output


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else f"{float(v):.12g}"
    return str(v)


def to_csv(columns: list[str], records: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([format_value(rec.get(c)) for c in columns])
    return buf.getvalue()


PLOT_SPECS = {
    "fig1": {"kind": "scatter", "x": "irreality", "y": ["upper", "lower"], "xlabel": "irreality (bits)",
             "ylabel": "bound (bits)", "diagonal": True, "notes": "log base 2"},
    "mu_fit": {"kind": "histogram", "table": "hist", "x": "bin_lo", "y": "count", "xlabel": "mu", "ylabel": "count"},
    "fig2": {"kind": "lines", "x": "theta", "y": "ji_closed", "group_by": "alpha", "xlabel": "theta",
             "ylabel": "joint irreality (bits)", "notes": "log base 2; maximum log2 d = 2"},
    "fig3": {"kind": "lines", "x": "theta", "y": "ji_per_info", "group_by": "alpha", "highlight": {"limit0": "solid black"},
             "xlabel": "theta", "ylabel": "JI per unit information"},
    "fig4": {"kind": "scatter", "panels": [{"x": "ji_numeric", "y": "script_d", "diagonal": True},
                                            {"x": "index", "y": "delta_pct", "hlines": [0, 5]},
                                            {"x": "ji_numeric", "y": "d_ab_closed", "diagonal": True}],
             "notes": "log base 2"},
    "verify": {"kind": "table"},
}


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not serializable: {type(o)}")


def _clean(o):
    if isinstance(o, float) and (math.isnan(o) or math.isinf(o)):
        return None
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def write_outputs(result: ExperimentResult, cfg: ExperimentConfig, started_at: str, duration: float) -> list[Path]:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = result.experiment
    paths = []
    p = out / f"{name}.csv"
    p.write_text(to_csv(result.columns, result.records))
    paths.append(p)
    for table, (cols, rows) in result.extra_tables.items():
        p = out / f"{name}_{table}.csv"
        p.write_text(to_csv(cols, rows))
        paths.append(p)
    manifest = {
        "experiment": name,
        "seed": cfg.seed,
        "samples": cfg.samples,
        "tolerances": cfg.tolerances,
        "started_at": started_at,
        "duration_s": round(duration, 3),
        "version": __version__,
        "workers": cfg.workers,
        "config": {k: v for k, v in asdict(cfg).items() if k not in ("tolerances", "out_dir")},
        "summary": result.summary,
        "checks": [asdict(c) for c in result.checks],
        "passed": result.passed,
    }
    p = out / f"{name}_manifest.json"
    p.write_text(json.dumps(_clean(manifest), indent=2, default=_json_default) + "\n")
    paths.append(p)
    plot = {"data": f"{name}.csv", "columns": result.columns, **PLOT_SPECS[name]}
    p = out / f"{name}_plot.json"
    p.write_text(json.dumps(plot, indent=2) + "\n")
    paths.append(p)
    return paths


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run one experiment and, when ``cfg.out_dir`` is set, write its files."""
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    t0 = time.perf_counter()
    result = RUNNERS[cfg.experiment](cfg)
    duration = time.perf_counter() - t0
    result.summary["duration_s"] = round(duration, 3)
    log.info("%s finished in %.1f s (%s)", cfg.experiment, duration, "pass" if result.passed else "FAIL")
    if cfg.out_dir is not None:
        write_outputs(result, cfg, started, duration)
    return result
