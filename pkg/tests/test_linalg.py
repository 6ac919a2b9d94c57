import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from irreality_lab.linalg import (
    HermiticityError,
    commutator,
    eig_hermitian,
    eigvalsh,
    eigvalsh_batch,
    hermitian,
    partial_trace,
    schatten2,
    tensor,
)


def rand_herm(d, rng):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (z + z.conj().T) / 2


@pytest.mark.parametrize("d", [1, 2, 3, 4, 7, 16])
def test_eig_reconstruction(d):
    rng = np.random.default_rng(d)
    h = rand_herm(d, rng)
    w, v = eig_hermitian(h)
    assert_allclose(v @ np.diag(w) @ v.conj().T, h, atol=1e-12 * max(1, d))
    assert_allclose(v.conj().T @ v, np.eye(d), atol=1e-12)
    assert np.all(np.diff(w) >= 0)
    # independent oracle: LAPACK
    assert_allclose(w, np.linalg.eigvalsh(h), atol=1e-12)


def test_eig_degenerate_and_diagonal():
    h = np.diag([2.0, 1.0, 1.0, -3.0])
    w, v = eig_hermitian(h)
    assert_allclose(w, [-3, 1, 1, 2])
    assert_allclose(v @ np.diag(w) @ v.conj().T, h, atol=1e-15)
    assert_allclose(eigvalsh(np.eye(3) * 0.5), [0.5] * 3)


def test_eig_known_values():
    assert_allclose(eigvalsh([[0, 1], [1, 0]]), [-1, 1], atol=1e-15)
    assert_allclose(eigvalsh([[0, -1j], [1j, 0]]), [-1, 1], atol=1e-15)


def test_hermiticity_gate():
    with pytest.raises(HermiticityError):
        hermitian([[1.0, 0.5], [0.5 + 1e-6, 0.0]])
    # asymmetry below the gate is symmetrized away
    h = hermitian([[1.0, 0.5], [0.5 + 1e-14, 0.0]])
    assert_allclose(h, h.conj().T, atol=0)
    with pytest.raises(ValueError):
        hermitian(np.ones((2, 3)))
    with pytest.raises(ValueError):
        hermitian([[np.nan, 0], [0, 1]])


def test_batch_matches_single():
    rng = np.random.default_rng(3)
    stack = np.array([rand_herm(4, rng) for _ in range(50)])
    w = eigvalsh_batch(stack)
    for h, row in zip(stack, w):
        assert_allclose(row, eigvalsh(h), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_eig_property(d, seed):
    h = rand_herm(d, np.random.default_rng(seed))
    w, v = eig_hermitian(h)
    assert_allclose(v @ np.diag(w) @ v.conj().T, h, atol=1e-11)
    assert_allclose(w.sum(), np.trace(h).real, atol=1e-11)


def test_tensor_and_partial_trace():
    rng = np.random.default_rng(0)
    a = rand_herm(2, rng)
    b = rand_herm(3, rng)
    ab = tensor(a, b)
    assert ab.shape == (6, 6)
    assert_allclose(np.trace(ab), np.trace(a) * np.trace(b))
    assert_allclose(partial_trace(ab, (2, 3), "A"), a * np.trace(b), atol=1e-13)
    assert_allclose(partial_trace(ab, (2, 3), "B"), b * np.trace(a), atol=1e-13)
    with pytest.raises(ValueError):
        partial_trace(ab, (2, 2))


def test_schatten_and_commutator():
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    z = np.diag([1.0, -1.0]).astype(complex)
    assert_allclose(schatten2(x), np.sqrt(2))
    # [X, Z] = -2iY, norm 2 sqrt 2
    assert_allclose(schatten2(commutator(x, z)), 2 * np.sqrt(2))
    assert_allclose(schatten2(commutator(z, z)), 0)
    with pytest.raises(ValueError):
        commutator(x, np.eye(3))
