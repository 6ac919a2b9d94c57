"""States, observables, named preparations and seeded random generators."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .linalg import eig_hermitian, eigvalsh, hermitian, partial_trace

TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10
BASIS_TOL = 1e-10
DEGENERACY_TOL = 1e-8

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


class StateError(ValueError):
    """Invalid state, observable, or state-spec document."""


class DensityMatrix:
    """Unit-trace positive semidefinite operator, optionally bipartite.

    Parameters
    ----------
    matrix : array_like
        Hermitian ``d x d`` matrix. Symmetrized on construction.
    dims : tuple of int, optional
        Bipartition ``(d_A, d_B)`` with ``d_A * d_B == d``.
    check : bool
        Validate trace and positivity. Internal callers that produce states
        from states (channels, partial traces) pass ``False``.
    """

    __slots__ = ("matrix", "dims")

    def __init__(self, matrix, dims: tuple[int, int] | None = None, check: bool = True):
        m = hermitian(matrix)
        if dims is not None:
            dims = (int(dims[0]), int(dims[1]))
            if dims[0] * dims[1] != m.shape[0]:
                raise StateError(f"bipartition {dims} does not match dimension {m.shape[0]}")
        if check:
            tr = np.trace(m).real
            if abs(tr - 1.0) > TRACE_TOL:
                raise StateError(f"trace is {tr!r}, expected 1")
            lo = eigvalsh(m)[0]
            if lo < -POSITIVITY_TOL:
                raise StateError(f"state is not positive semidefinite: min eigenvalue {lo:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim}, dims={self.dims})"

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def reduced(self, keep: str = "A") -> "DensityMatrix":
        if self.dims is None:
            raise StateError("state has no bipartition")
        return DensityMatrix(partial_trace(self.matrix, self.dims, keep), check=False)


def as_state(rho, dims: tuple[int, int] | None = None) -> DensityMatrix:
    """Wrap an array as an (unchecked) state, keeping any bipartition it has."""
    if isinstance(rho, DensityMatrix):
        if dims is None or tuple(dims) == rho.dims:
            return rho
        return DensityMatrix(rho.matrix, dims, check=False)
    return DensityMatrix(rho, dims, check=False)


@dataclass(frozen=True, eq=False)
class Observable:
    """Projective observable stored as an eigenbasis plus a projector label per column.

    ``basis`` is unitary; the projector ``k`` is the sum of ``|v><v|`` over the
    columns ``v`` with ``labels == k`` and carries eigenvalue ``eigenvalues[k]``.
    Rank-1 observables have one column per label. Tensor factors with an
    identity produce higher-rank (Lueders) projectors such as ``A_i x 1``.
    """

    eigenvalues: np.ndarray
    basis: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        d = self.basis.shape[0]
        if self.basis.shape != (d, d) or self.labels.shape != (d,):
            raise StateError("basis must be square with one label per column")
        gram = self.basis.conj().T @ self.basis
        err = np.max(np.abs(gram - np.eye(d)))
        if err > BASIS_TOL:
            raise StateError(f"observable basis is not orthonormal (residual {err:.3e})")
        if set(self.labels.tolist()) != set(range(len(self.eigenvalues))):
            raise StateError("every eigenvalue needs at least one basis column")
        for a in (self.eigenvalues, self.basis, self.labels):
            a.setflags(write=False)

    @classmethod
    def from_eigenbasis(cls, eigenvalues, vectors) -> "Observable":
        """Rank-1 observable from eigenvalues and eigenvector columns."""
        v = np.asarray(vectors, dtype=complex)
        ev = np.asarray(eigenvalues, dtype=float)
        if v.ndim != 2 or v.shape[1] != ev.size:
            raise StateError("need one eigenvector column per eigenvalue")
        return cls(ev, v.copy(), np.arange(ev.size))

    @classmethod
    def from_matrix(cls, m, degenerate: str = "reject") -> "Observable":
        """Spectral decomposition of a Hermitian matrix.

        A degenerate spectrum does not fix a rank-1 eigenbasis, so it is
        rejected unless ``degenerate="group"``, which merges each eigenspace
        into a single higher-rank projector.
        """
        w, v = eig_hermitian(m)
        groups = [[0]]
        for k in range(1, w.size):
            if abs(w[k] - w[groups[-1][0]]) <= DEGENERACY_TOL * max(1.0, abs(w[k])):
                groups[-1].append(k)
            else:
                groups.append([k])
        if len(groups) < w.size and degenerate != "group":
            raise StateError(
                f"observable is degenerate (eigenvalues {np.round(w, 10).tolist()}); "
                "pass an explicit eigenbasis or degenerate='group'"
            )
        labels = np.empty(w.size, dtype=int)
        values = []
        for g, cols in enumerate(groups):
            labels[cols] = g
            values.append(float(np.mean(w[cols])))
        return cls(np.array(values), v, labels)

    @classmethod
    def identity(cls, d: int) -> "Observable":
        return cls(np.array([1.0]), np.eye(d, dtype=complex), np.zeros(d, dtype=int))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def is_rank_one(self) -> bool:
        return len(self.eigenvalues) == self.dim

    @property
    def projectors(self) -> list[np.ndarray]:
        out = []
        for k in range(len(self.eigenvalues)):
            cols = self.basis[:, self.labels == k]
            out.append(cols @ cols.conj().T)
        return out

    def block(self, k: int) -> np.ndarray:
        """Basis columns spanning projector ``k``."""
        return self.basis[:, self.labels == k]

    def matrix(self) -> np.ndarray:
        vals = np.asarray(self.eigenvalues)[self.labels]
        return (self.basis * vals) @ self.basis.conj().T

    def tensor(self, other: "Observable") -> "Observable":
        """Product observable with projectors ``P_i x Q_j``."""
        n_other = len(other.eigenvalues)
        labels = (self.labels[:, None] * n_other + other.labels[None, :]).ravel()
        values = np.outer(self.eigenvalues, other.eigenvalues).ravel()
        return Observable(values, np.kron(self.basis, other.basis), labels)

    def conjugated(self, u) -> "Observable":
        """Observable ``U X U^dag``."""
        return Observable(self.eigenvalues.copy(), np.asarray(u) @ self.basis, self.labels.copy())


def local_observable(obs: Observable, dims: tuple[int, int], side: str = "A") -> Observable:
    """Embed ``obs`` as ``obs x 1`` (side A) or ``1 x obs`` (side B)."""
    da, db = dims
    if side == "A":
        if obs.dim != da:
            raise StateError(f"observable dimension {obs.dim} != d_A = {da}")
        return obs.tensor(Observable.identity(db))
    if side == "B":
        if obs.dim != db:
            raise StateError(f"observable dimension {obs.dim} != d_B = {db}")
        return Observable.identity(da).tensor(obs)
    raise StateError(f"side must be 'A' or 'B', got {side!r}")


# ---------------------------------------------------------------------------
# named preparations


def _unit(n, tol: float = 1e-12) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if n.shape != (3,):
        raise StateError(f"expected a 3-vector, got shape {n.shape}")
    norm = math.sqrt(float(n @ n))
    if abs(norm - 1.0) > tol:
        raise StateError(f"direction must have unit norm, got {norm!r}")
    return n


def pauli_dot(n) -> np.ndarray:
    x, y, z = (float(c) for c in n)
    return np.array([[z, x - 1j * y], [x + 1j * y, -z]])


def bloch_state(r) -> DensityMatrix:
    """Qubit state (1 + r.sigma)/2 for a Bloch vector with norm at most 1."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise StateError(f"Bloch vector must have 3 components, got shape {r.shape}")
    norm = math.sqrt(float(r @ r))
    if norm > 1 + 1e-12:
        raise StateError(f"Bloch vector norm {norm!r} exceeds 1")
    return DensityMatrix((PAULI_I + pauli_dot(r)) / 2, check=False)


def bloch_observable(n) -> Observable:
    """Qubit observable n.sigma with eigenvalues -1, +1."""
    n = _unit(n)
    x, y, z = n
    # eigenvectors of n.sigma, stable away from both poles
    if z >= 0:
        up = np.array([1 + z, x + 1j * y]) / math.sqrt(2 * (1 + z))
        down = np.array([-(x - 1j * y), 1 + z]) / math.sqrt(2 * (1 + z))
    else:
        up = np.array([x - 1j * y, 1 - z]) / math.sqrt(2 * (1 - z))
        down = np.array([1 - z, -(x + 1j * y)]) / math.sqrt(2 * (1 - z))
    return Observable.from_eigenbasis([-1.0, 1.0], np.column_stack([down, up]))


def bell_state(sign: str = "-") -> DensityMatrix:
    """Projector onto (|01> +/- |10>)/sqrt(2)."""
    s = _sign(sign)
    psi = np.array([0, 1, s, 0], dtype=complex) / math.sqrt(2)
    return DensityMatrix(np.outer(psi, psi.conj()), (2, 2), check=False)


def werner_state(alpha: float, sign: str = "-") -> DensityMatrix:
    """(1 - alpha) 1/4 + alpha psi_sign."""
    if not 0.0 <= alpha <= 1.0:
        raise StateError(f"alpha must lie in [0, 1], got {alpha!r}")
    m = (1 - alpha) * np.eye(4) / 4 + alpha * bell_state(sign).matrix
    return DensityMatrix(m, (2, 2), check=False)


def maximally_mixed(d: int, dims: tuple[int, int] | None = None) -> DensityMatrix:
    return DensityMatrix(np.eye(d, dtype=complex) / d, dims, check=False)


def _sign(sign) -> int:
    if sign in ("-", "minus", -1):
        return -1
    if sign in ("+", "plus", 1):
        return 1
    raise StateError(f"sign must be '+' or '-', got {sign!r}")


def computational_observable(d: int) -> Observable:
    return Observable.from_eigenbasis(np.arange(d, dtype=float), np.eye(d, dtype=complex))


def fourier_observable(d: int) -> Observable:
    j = np.arange(d)
    f = np.exp(2j * np.pi * np.outer(j, j) / d) / math.sqrt(d)
    return Observable.from_eigenbasis(np.arange(d, dtype=float), f)


def mub_pair(d: int) -> tuple[Observable, Observable]:
    """Computational-basis observable and its discrete Fourier conjugate."""
    if d < 2:
        raise StateError("MUB pair needs d >= 2")
    return computational_observable(d), fourier_observable(d)


def werner_observables(theta: float, refined: bool = True) -> tuple[Observable, Observable]:
    """The pair X = sigma_z x 1, Y = (sigma_x cos t + sigma_z sin t) x sigma_y.

    Both operators are doubly degenerate. With ``refined=True`` each is
    resolved into rank-1 projectors: X in the computational basis, and Y in
    the basis ``(|a,0> +/- Y|a,0>)/sqrt(2)`` for ``a = 0, 1``. This is the
    refinement under which the analytic Werner joint-irreality formula holds.
    With ``refined=False`` the rank-2 spectral projectors are used.
    """
    n = np.array([math.cos(theta), 0.0, math.sin(theta)])
    y_mat = np.kron(pauli_dot(n), PAULI_Y)
    if not refined:
        x = local_observable(bloch_observable([0, 0, 1]), (2, 2), "A")
        y = bloch_observable(n).tensor(bloch_observable([0, 1, 0]))
        return x, y
    x = Observable.from_eigenbasis([1.0, 1.0, -1.0, -1.0], np.eye(4, dtype=complex))
    cols, vals = [], []
    for a in (0, 1):
        u = np.zeros(4, dtype=complex)
        u[2 * a] = 1.0
        yu = y_mat @ u
        for s in (1.0, -1.0):
            cols.append((u + s * yu) / math.sqrt(2))
            vals.append(s)
    return x, Observable.from_eigenbasis(vals, np.column_stack(cols))


# ---------------------------------------------------------------------------
# randomness


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream: equal ``(seed, index)`` give equal samples.

    Backed by Philox with the seed as key and the index in the second counter
    word, so streams for different indices never overlap.
    """

    seed: int
    index: int = 0

    def generator(self) -> np.random.Generator:
        bits = np.random.Philox(key=self.seed & (2**64 - 1), counter=[0, self.index, 0, 0])
        return np.random.Generator(bits)


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def random_qubit_config(rng) -> tuple[float, float]:
    """Independent uniform ``(r, lambda)`` on [0, 1]^2."""
    g = _gen(rng)
    r, lam = g.random(2)
    return float(r), float(lam)


def random_unit_vector(rng, dim: int = 3) -> np.ndarray:
    g = _gen(rng)
    while True:
        v = g.standard_normal(dim)
        n = np.linalg.norm(v)
        if n > 1e-12:
            return v / n


def embed_vectors(r: float, lam: float, rng) -> tuple[np.ndarray, np.ndarray]:
    """Bloch vector of norm ``r`` and unit direction x with |x.r_hat| = lam.

    ``x`` lies in a uniformly random plane containing ``r_hat``.
    """
    g = _gen(rng)
    r_hat = random_unit_vector(g)
    while True:
        e = g.standard_normal(3)
        e -= np.dot(e, r_hat) * r_hat
        n = np.linalg.norm(e)
        if n > 1e-12:
            e /= n
            break
    x_hat = lam * r_hat + math.sqrt(max(0.0, 1 - lam * lam)) * e
    x_hat /= np.linalg.norm(x_hat)
    return r * r_hat, x_hat


def embed_config(r: float, lam: float, rng) -> tuple[DensityMatrix, Observable]:
    """Random qubit state and observable realizing the configuration ``(r, lam)``."""
    r_vec, x_hat = embed_vectors(r, lam, rng)
    return bloch_state(r_vec), bloch_observable(x_hat)


def random_unitary(d: int, rng) -> np.ndarray:
    """Haar-random unitary via QR with phase fix."""
    g = _gen(rng)
    z = (g.standard_normal((d, d)) + 1j * g.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density_matrix(d: int, rng, rank: int | None = None, dims=None) -> DensityMatrix:
    """Hilbert-Schmidt random state (Ginibre ``G G^dag`` normalized)."""
    g = _gen(rng)
    k = d if rank is None else rank
    z = g.standard_normal((d, k)) + 1j * g.standard_normal((d, k))
    m = z @ z.conj().T
    return DensityMatrix(m / np.trace(m).real, dims, check=False)


def random_observable(d: int, rng) -> Observable:
    """Rank-1 observable with a Haar-random eigenbasis."""
    return Observable.from_eigenbasis(np.arange(d, dtype=float), random_unitary(d, rng))


# ---------------------------------------------------------------------------
# state-spec documents


def _field(doc: dict, key: str, ctx: str):
    if key not in doc:
        raise StateError(f"{ctx}: missing field '{key}'")
    return doc[key]


def _complex_entries(pairs, n: int, ctx: str) -> np.ndarray:
    try:
        arr = np.asarray(pairs, dtype=float)
    except (TypeError, ValueError) as exc:
        raise StateError(f"{ctx}: entries must be [re, im] pairs") from exc
    if arr.shape != (n, 2):
        raise StateError(f"{ctx}: expected {n} [re, im] pairs, got shape {arr.shape}")
    return arr[:, 0] + 1j * arr[:, 1]


def state_from_spec(doc: dict) -> DensityMatrix:
    """Build a state from a spec document.

    Either ``{"preset": name, ...params}`` (also accepted as
    ``{"preset": {name: {...params}}}``) with presets ``werner``, ``bell``,
    ``bloch`` and ``maximally_mixed``, or ``{"matrix": [[re, im], ...]}``
    listing d^2 entries row-major with an optional ``"bipartition": [dA, dB]``.
    """
    if not isinstance(doc, dict):
        raise StateError("state spec must be a JSON object")
    if "preset" in doc:
        preset = doc["preset"]
        params = {k: v for k, v in doc.items() if k != "preset"}
        if isinstance(preset, dict):
            if len(preset) != 1:
                raise StateError("state.preset: expected exactly one preset name")
            (preset, params), = preset.items()
            params = dict(params or {})
        ctx = f"state.preset[{preset}]"
        if preset == "werner":
            return werner_state(float(_field(params, "alpha", ctx)), params.get("sign", "-"))
        if preset == "bell":
            return bell_state(params.get("sign", "-"))
        if preset == "bloch":
            return bloch_state(_field(params, "r", ctx))
        if preset == "maximally_mixed":
            d = int(_field(params, "d", ctx))
            dims = params.get("bipartition")
            return maximally_mixed(d, tuple(dims) if dims else None)
        raise StateError(f"state.preset: unknown preset {preset!r}")
    if "matrix" in doc:
        entries = doc["matrix"]
        n = len(entries)
        d = math.isqrt(n)
        if d * d != n or d == 0:
            raise StateError(f"state.matrix: {n} entries is not a perfect square")
        m = _complex_entries(entries, n, "state.matrix").reshape(d, d)
        dims = doc.get("bipartition")
        return DensityMatrix(m, tuple(dims) if dims else None)
    raise StateError("state spec needs 'preset' or 'matrix'")


def observable_from_spec(doc: dict) -> Observable:
    """Build an observable from a spec document.

    Accepted forms: ``{"pauli_direction": [x, y, z]}``, ``{"identity": d}``,
    ``{"factors": [spec, spec, ...]}`` (tensor product, left to right),
    ``{"mub": d, "which": "computational"|"fourier"}``, or explicit
    ``{"eigenvalues": [...], "eigenvectors": [[[re, im], ...], ...]}`` with one
    eigenvector per eigenvalue.
    """
    if not isinstance(doc, dict):
        raise StateError("observable spec must be a JSON object")
    if "factors" in doc:
        factors = doc["factors"]
        if not factors:
            raise StateError("observable.factors: empty list")
        obs = observable_from_spec(factors[0])
        for f in factors[1:]:
            obs = obs.tensor(observable_from_spec(f))
        return obs
    if "pauli_direction" in doc:
        return bloch_observable(doc["pauli_direction"])
    if "identity" in doc:
        return Observable.identity(int(doc["identity"]))
    if "mub" in doc:
        x, xbar = mub_pair(int(doc["mub"]))
        return xbar if doc.get("which", "computational") == "fourier" else x
    if "eigenvalues" in doc:
        vals = np.asarray(doc["eigenvalues"], dtype=float)
        vecs = _field(doc, "eigenvectors", "observable")
        if len(vecs) != vals.size:
            raise StateError("observable.eigenvectors: need one vector per eigenvalue")
        cols = [_complex_entries(v, vals.size, f"observable.eigenvectors[{i}]") for i, v in enumerate(vecs)]
        return Observable.from_eigenbasis(vals, np.column_stack(cols))
    raise StateError("observable spec needs 'pauli_direction', 'factors', 'identity', 'mub' or 'eigenvalues'")


def load_spec(path) -> dict:
    """Read a JSON spec file, reporting the line and column of syntax errors."""
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
