"""Unrevealed-measurement (dephasing) maps and their compositions."""

from __future__ import annotations

import numpy as np

from .linalg import schatten2
from .qstate import DensityMatrix, Observable, StateError, as_state, local_observable

STATE_TOL = 1e-9


def _check_dims(rho: DensityMatrix, obs: Observable) -> None:
    if rho.dim != obs.dim:
        raise StateError(f"dimension mismatch: state {rho.dim} vs observable {obs.dim}")


def dephase(rho, obs: Observable) -> DensityMatrix:
    """Sum_i X_i rho X_i, evaluated in the observable's eigenbasis.

    The state is rotated into the basis, every coherence between different
    projector blocks is zeroed, and the result rotated back.
    """
    rho = as_state(rho)
    _check_dims(rho, obs)
    v = obs.basis
    inner = v.conj().T @ rho.matrix @ v
    mask = obs.labels[:, None] == obs.labels[None, :]
    out = v @ (inner * mask) @ v.conj().T
    return DensityMatrix(out, rho.dims, check=False)


def dephase_projectors(rho, obs: Observable) -> DensityMatrix:
    """Direct projector sum; kept as an independent check on :func:`dephase`."""
    rho = as_state(rho)
    _check_dims(rho, obs)
    out = sum(p @ rho.matrix @ p for p in obs.projectors)
    return DensityMatrix(out, rho.dims, check=False)


def dephase_seq(rho, first: Observable, second: Observable) -> DensityMatrix:
    """Phi_first o Phi_second: ``second`` acts on the state first."""
    return dephase(dephase(rho, second), first)


def dephase_bilocal(rho, a: Observable, b: Observable, dims: tuple[int, int] | None = None) -> DensityMatrix:
    """Sum_ij (A_i x B_j) rho (A_i x B_j) for local observables on each side."""
    rho = as_state(rho, dims)
    if rho.dims is None:
        raise StateError("bilocal dephasing needs a bipartition")
    if (a.dim, b.dim) != rho.dims:
        raise StateError(f"local observables of dimension ({a.dim}, {b.dim}) do not match bipartition {rho.dims}")
    return dephase(rho, a.tensor(b))


def state_distance(rho, sigma) -> float:
    return schatten2(np.asarray(rho) - np.asarray(sigma))


def is_reality_state(rho, obs: Observable, tol: float = STATE_TOL) -> bool:
    """True when the unrevealed measurement of ``obs`` leaves ``rho`` unchanged."""
    rho = as_state(rho)
    return state_distance(dephase(rho, obs), rho) <= tol


def is_joint_reality_state(rho, x: Observable, y: Observable, tol: float = STATE_TOL) -> bool:
    """True when both orderings of the two unrevealed measurements return ``rho``."""
    rho = as_state(rho)
    return (
        state_distance(dephase_seq(rho, x, y), rho) <= tol
        and state_distance(dephase_seq(rho, y, x), rho) <= tol
    )


__all__ = [
    "dephase",
    "dephase_projectors",
    "dephase_seq",
    "dephase_bilocal",
    "is_reality_state",
    "is_joint_reality_state",
    "local_observable",
    "state_distance",
]
