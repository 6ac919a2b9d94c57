"""Entropic quantifiers: irreality, joint irreality, discords and bounds.

All values are in bits. Eigenvalues below ``EIGEN_FLOOR`` are treated as
zero before any logarithm is taken; composed channels leave rounding noise
at roughly that scale.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, fields
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from .channels import dephase, dephase_bilocal, dephase_seq, is_joint_reality_state
from .linalg import eig_hermitian, eigvalsh, partial_trace
from .qstate import DensityMatrix, Observable, StateError, as_state, bloch_observable, local_observable

EIGEN_FLOOR = 1e-12
LN2 = math.log(2.0)


def _entropy_of_spectrum(w) -> float:
    w = np.asarray(w, dtype=float)
    w = w[w > EIGEN_FLOOR]
    return float(max(-np.sum(w * np.log2(w)), 0.0))


def von_neumann_entropy(rho) -> float:
    """-Tr[rho log2 rho]."""
    return _entropy_of_spectrum(eigvalsh(np.asarray(rho)))


def information(rho) -> float:
    """log2 d - S(rho)."""
    rho = as_state(rho)
    return math.log2(rho.dim) - von_neumann_entropy(rho)


def relative_entropy(rho, sigma) -> float:
    """Tr[rho (log2 rho - log2 sigma)].

    Returns ``inf`` (with a warning) when the support of ``rho`` is not
    contained in that of ``sigma``.
    """
    r = np.asarray(rho)
    ws, vs = eig_hermitian(np.asarray(sigma))
    weights = np.real(np.einsum("ik,ij,jk->k", vs.conj(), r, vs))
    outside = (ws <= EIGEN_FLOOR) & (weights > EIGEN_FLOOR)
    if np.any(outside):
        warnings.warn(
            f"relative entropy is infinite: rho has weight {weights[outside].max():.3e} "
            "outside the support of sigma",
            RuntimeWarning,
            stacklevel=2,
        )
        return math.inf
    keep = ws > EIGEN_FLOOR
    cross = float(np.sum(weights[keep] * np.log2(ws[keep])))
    return -von_neumann_entropy(r) - cross


def _dims(rho, dims) -> tuple[int, int]:
    d = dims if dims is not None else getattr(rho, "dims", None)
    if d is None:
        raise StateError("operation needs a bipartition (d_A, d_B)")
    return tuple(d)


def mutual_information(rho, dims: tuple[int, int] | None = None) -> float:
    """S(rho_A) + S(rho_B) - S(rho)."""
    dims = _dims(rho, dims)
    m = np.asarray(rho)
    return (
        von_neumann_entropy(partial_trace(m, dims, "A"))
        + von_neumann_entropy(partial_trace(m, dims, "B"))
        - von_neumann_entropy(m)
    )


def irreality(rho, x: Observable) -> float:
    """S(Phi_X(rho)) - S(rho)."""
    return von_neumann_entropy(dephase(rho, x)) - von_neumann_entropy(rho)


def joint_irreality(rho, x: Observable, y: Observable) -> float:
    """[S(Phi_XY(rho)) + S(Phi_YX(rho))]/2 - S(rho)."""
    s_xy = von_neumann_entropy(dephase_seq(rho, x, y))
    s_yx = von_neumann_entropy(dephase_seq(rho, y, x))
    return (s_xy + s_yx) / 2 - von_neumann_entropy(rho)


class JIDecomposition(NamedTuple):
    irr_x: float
    irr_y: float
    irr_x_after_y: float
    irr_y_after_x: float

    @property
    def half_sum(self) -> float:
        return (self.irr_x + self.irr_y + self.irr_x_after_y + self.irr_y_after_x) / 2


def ji_decomposition(rho, x: Observable, y: Observable) -> JIDecomposition:
    """The four irrealities whose half-sum is the joint irreality.

    ``half_sum`` returns that value: per ordering, the irreality of the first
    measurement plus that of the second one on the dephased state, averaged.
    """
    return JIDecomposition(
        irreality(rho, x),
        irreality(rho, y),
        irreality(dephase(rho, y), x),
        irreality(dephase(rho, x), y),
    )


def symmetric_discord(rho, a: Observable, b: Observable, dims: tuple[int, int] | None = None) -> float:
    """Mutual-information loss under the bilocal map of local observables ``a`` and ``b``."""
    dims = _dims(rho, dims)
    rho = as_state(rho, dims)
    return mutual_information(rho, dims) - mutual_information(dephase_bilocal(rho, a, b), dims)


def delta_inner(rho, x: Observable, y: Observable, dims: tuple[int, int] | None = None) -> float:
    """Signed quantity inside the modulus of :func:`delta_correlation`."""
    dims = _dims(rho, dims)
    rho = as_state(rho, dims)
    product = DensityMatrix(
        np.kron(partial_trace(rho.matrix, dims, "A"), partial_trace(rho.matrix, dims, "B")), dims, check=False
    )
    return (
        mutual_information(rho, dims)
        + mutual_information(dephase_seq(product, x, y), dims)
        - mutual_information(dephase_seq(rho, x, y), dims)
    )


def delta_correlation(rho, x: Observable, y: Observable, dims: tuple[int, int] | None = None) -> float:
    """|I(rho) + I(Phi_XY(rho_A x rho_B)) - I(Phi_XY(rho))| with I the mutual information."""
    return abs(delta_inner(rho, x, y, dims))


def script_d(rho, x: Observable, y: Observable, dims: tuple[int, int] | None = None) -> float:
    """Symmetrized correlation estimate (delta_XY + delta_YX)/2."""
    return (delta_correlation(rho, x, y, dims) + delta_correlation(rho, y, x, dims)) / 2


# ---------------------------------------------------------------------------
# one-sided discord

DISCORD_GRID = (24, 48)
DISCORD_SEEDS = 5
DISCORD_XATOL = 1e-8


_PX = np.array([[0, 1], [1, 0]], dtype=complex)
_PY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_PZ = np.array([[1, 0], [0, -1]], dtype=complex)


class OneSidedDiscord(NamedTuple):
    value: float
    direction: np.ndarray


def _direction(theta: float, phi: float) -> np.ndarray:
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def _conditional_entropy_after(m: np.ndarray, dims, side: str, n: np.ndarray) -> float:
    # sum_i p_i S(rho_{other|i}) for the qubit measurement along n on `side`
    da, db = dims
    t = m.reshape(da, db, da, db)
    total = 0.0
    for sgn in (1.0, -1.0):
        p = (np.eye(2) + sgn * (n[0] * _PX + n[1] * _PY + n[2] * _PZ)) / 2
        if side == "A":
            cond = np.einsum("ki,ijkl->jl", p, t)
        else:
            cond = np.einsum("lj,ijkl->ik", p, t)
        pi = float(np.trace(cond).real)
        if pi > EIGEN_FLOOR:
            total += pi * von_neumann_entropy(cond / pi)
    return total


def discord_objective(rho, n, side: str = "A", dims: tuple[int, int] | None = None) -> float:
    """I(rho) - I(Phi_n(rho)) for the qubit measurement along ``n`` on ``side``.

    Uses I(Phi_n(rho)) = S(rho_other) - sum_i p_i S(rho_other|i).
    """
    dims = _dims(rho, dims)
    m = np.asarray(rho)
    other = "B" if side == "A" else "A"
    s_other = von_neumann_entropy(partial_trace(m, dims, other))
    return mutual_information(m, dims) - s_other + _conditional_entropy_after(m, dims, side, n)


def onesided_discord_min(rho, side: str = "A", dims: tuple[int, int] | None = None) -> OneSidedDiscord:
    """Minimum of I(rho) - I(Phi_A(rho)) over projective measurements on a qubit side.

    A 24 x 48 polar/azimuthal grid picks five seeds, each polished by
    Nelder-Mead. The best value wins; ties go to the earliest seed.
    """
    dims = _dims(rho, dims)
    if side not in ("A", "B"):
        raise StateError(f"side must be 'A' or 'B', got {side!r}")
    d_side = dims[0] if side == "A" else dims[1]
    if d_side != 2:
        raise StateError(f"one-sided discord minimization supports a qubit side only (d = {d_side})")
    m = np.asarray(rho)
    other = "B" if side == "A" else "A"
    base = mutual_information(m, dims) - von_neumann_entropy(partial_trace(m, dims, other))

    def objective(v):
        return base + _conditional_entropy_after(m, dims, side, _direction(v[0], v[1]))

    n_pol, n_az = DISCORD_GRID
    thetas = (np.arange(n_pol) + 0.5) * math.pi / n_pol
    phis = np.arange(n_az) * 2 * math.pi / n_az
    scored = []
    for th in thetas:
        for ph in phis:
            scored.append((objective((th, ph)), th, ph))
    scored.sort(key=lambda s: s[0])
    best_val, best_v = math.inf, None
    for val0, th, ph in scored[:DISCORD_SEEDS]:
        res = minimize(
            objective,
            x0=np.array([th, ph]),
            method="Nelder-Mead",
            options={"xatol": DISCORD_XATOL, "fatol": 1e-13, "maxiter": 2000},
        )
        val, v = (float(res.fun), res.x) if res.fun < val0 else (val0, np.array([th, ph]))
        if val < best_val:
            best_val, best_v = val, v
    return OneSidedDiscord(max(best_val, 0.0), _direction(best_v[0], best_v[1]))


def onesided_discord_average(rho, dims: tuple[int, int] | None = None) -> float:
    dims = _dims(rho, dims)
    return (onesided_discord_min(rho, "A", dims).value + onesided_discord_min(rho, "B", dims).value) / 2


def onesided_objective_full(rho, n, side: str = "A", dims: tuple[int, int] | None = None) -> float:
    """Same objective as :func:`discord_objective` but via the full dephased matrix."""
    dims = _dims(rho, dims)
    rho = as_state(rho, dims)
    obs = local_observable(bloch_observable(n), dims, side)
    return mutual_information(rho, dims) - mutual_information(dephase(rho, obs), dims)


# ---------------------------------------------------------------------------
# bounds

UR_TOL = 1e-9


def overlap_c(x: Observable, y: Observable) -> float:
    """max_ij ||X_i Y_j||; for rank-1 projectors this is max |<x_i|y_j>|."""
    if x.dim != y.dim:
        raise StateError("observables act on different dimensions")
    g = x.basis.conj().T @ y.basis
    if x.is_rank_one and y.is_rank_one:
        return float(np.max(np.abs(g)))
    best = 0.0
    for i in range(len(x.eigenvalues)):
        for j in range(len(y.eigenvalues)):
            sub = g[np.ix_(x.labels == i, y.labels == j)]
            best = max(best, float(np.linalg.norm(sub, 2)))
    return best


def ji_bounds(rho, x: Observable, y: Observable) -> tuple[float, float]:
    """(I(rho) - log2(c d), I(rho))."""
    rho = as_state(rho)
    info = information(rho)
    return info - math.log2(overlap_c(x, y) * rho.dim), info


def entropic_ur_check(rho, x: Observable, y: Observable, tol: float = UR_TOL) -> bool:
    """S(Phi_X(rho)) + S(Phi_Y(rho)) >= -2 log2 c within ``tol``."""
    lhs = von_neumann_entropy(dephase(rho, x)) + von_neumann_entropy(dephase(rho, y))
    return lhs >= -2 * math.log2(overlap_c(x, y)) - tol


MUB_TOL = 1e-10


def is_mub(a: Observable, b: Observable, tol: float = MUB_TOL) -> bool:
    if not (a.is_rank_one and b.is_rank_one) or a.dim != b.dim:
        return False
    g = np.abs(a.basis.conj().T @ b.basis) ** 2
    return bool(np.max(np.abs(g - 1.0 / a.dim)) <= tol)


def mub_special_case(rho, a: Observable, abar: Observable, dims: tuple[int, int] | None = None) -> float:
    """I(rho_A) + I(rho) for a local MUB pair on side A (I: information, then mutual information)."""
    dims = _dims(rho, dims)
    if not is_mub(a, abar):
        raise StateError("observables do not form a mutually unbiased pair")
    if a.dim != dims[0]:
        raise StateError(f"local MUB pair has dimension {a.dim}, subsystem A has {dims[0]}")
    m = np.asarray(rho)
    return information(partial_trace(m, dims, "A")) + mutual_information(m, dims)


# ---------------------------------------------------------------------------
# report


@dataclass
class MeasureReport:
    """Named scalar results for one (state, observables) triple, in bits."""

    S: float
    I: float
    irreality_X: float
    irreality_Y: float | None = None
    JI: float | None = None
    ji_per_info: float | None = None
    D_AB_symmetric: float | None = None
    delta_XY: float | None = None
    delta_YX: float | None = None
    delta_XY_inner: float | None = None
    delta_YX_inner: float | None = None
    script_D: float | None = None
    D_onesided_A: float | None = None
    D_onesided_B: float | None = None
    D_onesided_avg: float | None = None
    lower_bound: float | None = None
    upper_bound: float | None = None
    overlap_c: float | None = None

    UNITLESS = ("ji_per_info", "overlap_c")

    def to_dict(self, log_base: str = "2") -> dict:
        """Flat mapping; ``log_base="e"`` rescales entropic fields to nats."""
        out = asdict(self)
        if log_base == "e":
            for k, v in out.items():
                if v is not None and k not in self.UNITLESS:
                    out[k] = v * LN2
        elif log_base != "2":
            raise ValueError(f"log_base must be '2' or 'e', got {log_base!r}")
        return out

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_dict(cls, d: dict) -> "MeasureReport":
        return cls(**{k: d.get(k) for k in cls.field_names()})

    def to_json(self, log_base: str = "2") -> str:
        return json.dumps(self.to_dict(log_base), indent=2)


def measure_report(
    rho,
    x: Observable,
    y: Observable | None = None,
    *,
    local: tuple[Observable, Observable] | None = None,
    onesided: bool = False,
) -> MeasureReport:
    """Evaluate every applicable measure for ``rho`` and the given observables.

    Pair quantities need ``y``; correlation quantities need a bipartition on
    ``rho``. ``local=(A, B)`` adds the symmetric discord of those local
    observables; ``onesided=True`` runs the discord minimizer (qubit sides).
    """
    rho = as_state(rho)
    s = von_neumann_entropy(rho)
    info = math.log2(rho.dim) - s
    report = MeasureReport(S=s, I=info, irreality_X=irreality(rho, x))
    bipartite = rho.dims is not None
    if y is not None:
        ji = joint_irreality(rho, x, y)
        lo, hi = ji_bounds(rho, x, y)
        report.irreality_Y = irreality(rho, y)
        report.JI = ji
        report.ji_per_info = ji / info if info > 1e-12 else None
        report.lower_bound, report.upper_bound = lo, hi
        report.overlap_c = overlap_c(x, y)
        if bipartite:
            report.delta_XY_inner = delta_inner(rho, x, y)
            report.delta_YX_inner = delta_inner(rho, y, x)
            report.delta_XY = abs(report.delta_XY_inner)
            report.delta_YX = abs(report.delta_YX_inner)
            report.script_D = (report.delta_XY + report.delta_YX) / 2
    if local is not None:
        report.D_AB_symmetric = symmetric_discord(rho, local[0], local[1])
    if onesided and bipartite:
        report.D_onesided_A = onesided_discord_min(rho, "A").value
        report.D_onesided_B = onesided_discord_min(rho, "B").value
        report.D_onesided_avg = (report.D_onesided_A + report.D_onesided_B) / 2
    return report


def joint_reality_consistent(rho, x: Observable, y: Observable, ji_tol: float = 1e-9, state_tol: float = 1e-6) -> bool:
    """JI <= ji_tol exactly when both orderings return rho within state_tol."""
    return (joint_irreality(rho, x, y) <= ji_tol) == is_joint_reality_state(rho, x, y, state_tol)
