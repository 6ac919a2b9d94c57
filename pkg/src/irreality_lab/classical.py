"""Discrete phase-space oracle: unrevealed measurements in a realistic theory.

A joint distribution is an ``n_q x n_p`` array of nonnegative weights summing
to one; axis 0 indexes q and axis 1 indexes p.
"""

from __future__ import annotations

import numpy as np

NORM_TOL = 1e-12
_AXES = {"q": 0, "p": 1}


def joint_distribution(w) -> np.ndarray:
    """Validate a discretized joint distribution and return it as a float array."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 2:
        raise ValueError(f"joint distribution must be 2-D, got shape {w.shape}")
    if np.any(w < 0):
        raise ValueError("joint distribution has negative weights")
    total = w.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise ValueError(f"joint distribution sums to {total!r}, expected 1")
    return w


def random_distribution(shape: tuple[int, int] = (32, 32), rng=None) -> np.ndarray:
    g = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    w = g.random(shape)
    return w / w.sum()


def marginal(w, axis: str = "q") -> np.ndarray:
    w = joint_distribution(w)
    return w.sum(axis=1 - _AXES[axis])


def classical_collapse(w, outcome: int, axis: str = "q") -> np.ndarray:
    """Condition on reading ``outcome`` for the coordinate ``axis``.

    The result is supported on the single slice ``outcome`` and renormalized.
    """
    w = joint_distribution(w)
    ax = _AXES[axis]
    sl = np.take(w, outcome, axis=ax)
    p = sl.sum()
    if p <= 0:
        raise ValueError(f"outcome {outcome} of {axis} has zero probability")
    out = np.zeros_like(w)
    if ax == 0:
        out[outcome, :] = sl / p
    else:
        out[:, outcome] = sl / p
    return out


def classical_unrevealed(w, axis: str = "q") -> np.ndarray:
    """Average of the collapsed distributions weighted by outcome probabilities."""
    w = joint_distribution(w)
    probs = marginal(w, axis)
    out = np.zeros_like(w)
    for k, pk in enumerate(probs):
        if pk > 0:
            out += pk * classical_collapse(w, k, axis)
    return out


def classical_sequential(w, order: str = "q-then-p") -> np.ndarray:
    """Two unrevealed measurements in the given order."""
    if order == "q-then-p":
        return classical_unrevealed(classical_unrevealed(w, "q"), "p")
    if order == "p-then-q":
        return classical_unrevealed(classical_unrevealed(w, "p"), "q")
    raise ValueError(f"order must be 'q-then-p' or 'p-then-q', got {order!r}")
