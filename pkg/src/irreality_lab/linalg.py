"""Dense complex matrix kernel.

Everything here works on plain ``numpy`` arrays. Hermitian inputs are checked
against a small asymmetry gate and then symmetrized, which absorbs the rounding
drift that builds up when dephasing maps are composed.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

HERMITIAN_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
JACOBI_TOL = 1e-14


class HermiticityError(ValueError):
    """Raised when a matrix is too far from Hermitian to be symmetrized."""


class NonConvergenceError(ArithmeticError):
    """Raised when the Jacobi sweeps hit their cap."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (off-diagonal residual {residual:.3e})")
        self.residual = residual


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a square, finite complex array."""
    a = np.asarray(getattr(m, "matrix", m), dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix has non-finite entries")
    return a


def hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``m`` as Hermitian and return ``(M + M^dag) / 2``.

    Raises
    ------
    HermiticityError
        If any entry of ``M - M^dag`` exceeds ``tol`` in modulus.
    """
    a = as_matrix(m)
    ah = a.conj().T
    skew = np.abs(a - ah).max() if a.size else 0.0
    if skew > tol:
        raise HermiticityError(f"matrix is not Hermitian: max|M - M^dag| = {skew:.3e} > {tol:.1e}")
    return (a + ah) * 0.5


def _offdiag_sq(a: list, n: int) -> float:
    total = 0.0
    for i in range(n):
        row = a[i]
        for j in range(i + 1, n):
            z = row[j]
            total += z.real * z.real + z.imag * z.imag
    return 2.0 * total


def _jacobi(m: np.ndarray, want_vectors: bool):
    # scalar loops on nested lists: numpy call overhead dominates at d <= 16
    n = m.shape[0]
    a = m.tolist()
    v = np.eye(n, dtype=complex).tolist() if want_vectors else None
    scale = max(1.0, math.sqrt(sum(z.real * z.real + z.imag * z.imag for row in a for z in row)))
    limit = (JACOBI_TOL * scale) ** 2
    for _ in range(JACOBI_MAX_SWEEPS):
        if _offdiag_sq(a, n) <= limit:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                ph = (apq / mag).conjugate()
                app = a[p][p].real
                aqq = a[q][q].real
                tau = (aqq - app) / (2.0 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # U = diag(1, ph) @ [[c, s], [-s, c]] acting on the (p, q) plane
                u_qp = -s * ph
                u_qq = c * ph
                for row in a:
                    xp = row[p]
                    xq = row[q]
                    row[p] = xp * c + xq * u_qp
                    row[q] = xp * s + xq * u_qq
                rp = a[p]
                rq = a[q]
                cqp = u_qp.conjugate()
                cqq = u_qq.conjugate()
                for k in range(n):
                    xp = rp[k]
                    xq = rq[k]
                    rp[k] = xp * c + xq * cqp
                    rq[k] = xp * s + xq * cqq
                rp[q] = rq[p] = 0j
                rp[p] = complex(rp[p].real, 0.0)
                rq[q] = complex(rq[q].real, 0.0)
                if v is not None:
                    for row in v:
                        xp = row[p]
                        xq = row[q]
                        row[p] = xp * c + xq * u_qp
                        row[q] = xp * s + xq * u_qq
    else:
        residual = math.sqrt(_offdiag_sq(a, n))
        if residual > JACOBI_TOL * scale:
            raise NonConvergenceError(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps", residual)
    w = np.array([a[i][i].real for i in range(n)])
    return w, (np.array(v, dtype=complex) if v is not None else None)


def eig_hermitian(m) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.

    Eigenvalues are returned in ascending order with the eigenvectors as the
    matching columns of a unitary matrix. Inside a degenerate eigenspace the
    basis is whatever the rotations produced.
    """
    a = hermitian(m)
    w, v = _jacobi(a, want_vectors=True)
    order = np.argsort(w, kind="stable")
    return Spectrum(w[order], v[:, order])


def eigvalsh(m) -> np.ndarray:
    """Ascending eigenvalues only; skips the eigenvector accumulation."""
    w, _ = _jacobi(hermitian(m), want_vectors=False)
    return np.sort(w)


def eigvalsh_batch(stack) -> np.ndarray:
    """Ascending eigenvalues for a stack ``(N, d, d)`` of Hermitian matrices.

    The same cyclic Jacobi rotations as :func:`eigvalsh`, applied to every
    matrix of the stack at once.
    """
    a = np.array(stack, dtype=complex)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError(f"expected a stack of square matrices, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix stack has non-finite entries")
    ah = np.conj(np.swapaxes(a, 1, 2))
    skew = np.abs(a - ah).max() if a.size else 0.0
    if skew > HERMITIAN_TOL:
        raise HermiticityError(f"matrix is not Hermitian: max|M - M^dag| = {skew:.3e} > {HERMITIAN_TOL:.1e}")
    a = (a + ah) * 0.5
    n = a.shape[1]
    scale = np.maximum(1.0, np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2))))
    limit = (JACOBI_TOL * scale) ** 2
    off = np.ones((n, n), dtype=bool) & ~np.eye(n, dtype=bool)

    def offdiag(x):
        return np.sum(np.abs(x[:, off]) ** 2, axis=1)

    for _ in range(JACOBI_MAX_SWEEPS):
        if np.all(offdiag(a) <= limit):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                mag = np.abs(apq)
                live = mag > 1e-300
                safe = np.where(live, mag, 1.0)
                ph = np.where(live, np.conj(apq) / safe, 1.0)
                tau = (a[:, q, q].real - a[:, p, p].real) / (2.0 * safe)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
                t = np.where(live, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                u_qp = (-s * ph)[:, None]
                u_qq = (c * ph)[:, None]
                c_, s_ = c[:, None], s[:, None]
                xp, xq = a[:, :, p].copy(), a[:, :, q].copy()
                a[:, :, p] = xp * c_ + xq * u_qp
                a[:, :, q] = xp * s_ + xq * u_qq
                xp, xq = a[:, p, :].copy(), a[:, q, :].copy()
                a[:, p, :] = xp * c_ + xq * np.conj(u_qp)
                a[:, q, :] = xp * s_ + xq * np.conj(u_qq)
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
    else:
        residual = float(np.sqrt(offdiag(a)).max()) if a.size else 0.0
        if np.any(np.sqrt(offdiag(a)) > JACOBI_TOL * scale):
            raise NonConvergenceError(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps", residual)
    return np.sort(np.einsum("kii->ki", a).real, axis=1)


def tensor(m, n) -> np.ndarray:
    return np.kron(np.asarray(m, dtype=complex), np.asarray(n, dtype=complex))


def partial_trace(m, dims: tuple[int, int], keep: str = "A") -> np.ndarray:
    """Reduced operator of a bipartite matrix.

    ``keep`` selects the factor that survives: ``"A"`` traces out B and
    ``"B"`` traces out A.
    """
    a = as_matrix(m)
    da, db = dims
    if da * db != a.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape[0]} != {da} x {db}")
    t = a.reshape(da, db, da, db)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def schatten2(m) -> float:
    """Schatten 2-norm sqrt(Tr[M^dag M])."""
    a = np.asarray(m, dtype=complex)
    return float(np.sqrt(np.sum(np.abs(a) ** 2)))


def commutator(m, n) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    b = np.asarray(n, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a
