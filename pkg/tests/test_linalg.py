import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fidelity_forge import channels as ch
from fidelity_forge.basis import PAULI_X, PAULI_Z, pauli_basis
from fidelity_forge.errors import DimensionMismatch, NotHermitian
from fidelity_forge.linalg import expm_minus_i, frob_inner, herm_eig, kron, random_hermitian_matrix


def test_kron_trivial_cases():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(kron(np.diag([1, 2]), np.diag([3, 4])), np.diag([3, 4, 6, 8]))


def test_kron_matches_index_formula():
    a, b = PAULI_X, PAULI_Z
    expected = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    expected[i * 2 + k, j * 2 + l] = a[i, j] * b[k, l]
    assert np.array_equal(kron(a, b), expected)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_kron_associative_and_bilinear(seed):
    rng = np.random.default_rng(seed)
    a, b, c, a2 = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(4))
    assert np.allclose(kron(kron(a, b), c), kron(a, kron(b, c)), atol=1e-12)
    assert np.allclose(kron(a + 2 * a2, b), kron(a, b) + 2 * kron(a2, b), atol=1e-12)


def test_herm_eig_pauli_spectra():
    vals, _ = herm_eig(PAULI_Z)
    assert np.allclose(vals, [-1, 1])
    vals, vecs = herm_eig(PAULI_X)
    assert np.allclose(vals, [-1, 1])
    assert np.allclose(vecs[:, 0], np.array([1, -1]) / np.sqrt(2))
    assert np.allclose(vecs[:, 1], np.array([1, 1]) / np.sqrt(2))


def test_herm_eig_residuals_on_fixture_generator():
    h = ch.hermitian_from_coeffs(ch.load_coefficients("table1"))
    vals, vecs = herm_eig(h)
    for k in range(len(vals)):
        assert np.linalg.norm(h @ vecs[:, k] - vals[k] * vecs[:, k]) < 1e-8


def test_herm_eig_phase_convention_and_rejects_non_hermitian(rng):
    vals, vecs = herm_eig(random_hermitian_matrix(6, rng))
    for k in range(6):
        first = vecs[np.flatnonzero(np.abs(vecs[:, k]) > 1e-12)[0], k]
        assert abs(first.imag) < 1e-12 and first.real > 0
    with pytest.raises(NotHermitian):
        herm_eig(np.array([[0, 1], [0, 0]], dtype=complex))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 4, 8, 16, 32]))
def test_herm_eig_reconstructs_and_trace_matches(seed, d):
    h = random_hermitian_matrix(d, np.random.default_rng(seed))
    h /= np.linalg.norm(h)
    vals, vecs = herm_eig(h)
    assert np.all(np.diff(vals) >= 0)
    assert np.linalg.norm(vecs.conj().T @ vecs - np.eye(d)) < 1e-10
    assert np.linalg.norm(vecs @ np.diag(vals) @ vecs.conj().T - h) < 1e-9
    assert abs(vals.sum() - np.trace(h).real) < 1e-9


def test_expm_minus_i_examples(rng):
    h = random_hermitian_matrix(4, rng)
    assert np.allclose(expm_minus_i(h, 0.0), np.eye(4), atol=1e-12)
    theta = 0.37
    assert np.allclose(expm_minus_i(PAULI_Z, theta), np.diag([np.exp(-1j * theta), np.exp(1j * theta)]))
    assert np.linalg.norm(expm_minus_i(h, 1.0) @ expm_minus_i(h, -1.0) - np.eye(4)) < 1e-9


@pytest.mark.parametrize("d", [2, 4, 8, 16, 32])
def test_expm_minus_i_is_unitary(d):
    for seed in range(20):
        u = expm_minus_i(random_hermitian_matrix(d, np.random.default_rng(seed)), 1.3)
        assert np.linalg.norm(u.conj().T @ u - np.eye(d)) < 1e-9


def test_frob_inner_examples():
    d = 4
    assert frob_inner(np.eye(d) / 2, np.eye(d) / 2) == pytest.approx(1.0)
    obs = pauli_basis(2).observables
    gram = np.array([[np.trace(a @ b) for b in obs] for a in obs])
    inner = np.array([[frob_inner(a, b) for b in obs] for a in obs])
    assert np.allclose(inner, gram, atol=1e-12)
    assert np.allclose(inner, np.eye(16), atol=1e-12)
    psi = np.array([0.6, 0.8j])
    rho = np.outer(psi, psi.conj())
    assert frob_inner(rho, rho) == pytest.approx(1.0)
    with pytest.raises(DimensionMismatch):
        frob_inner(np.eye(2), np.eye(4))
