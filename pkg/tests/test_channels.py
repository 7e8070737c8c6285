import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fidelity_forge import channels as ch
from fidelity_forge.basis import PAULI_X, PAULI_Z, PAULIS
from fidelity_forge.errors import (
    DimensionMismatch,
    FixtureError,
    InvalidQubitIndex,
    NotUnitary,
    OutOfRange,
    WrongParameterCount,
)
from fidelity_forge.fidelity import process_fidelity_exact
from fidelity_forge.linalg import random_hermitian_matrix

from conftest import random_cptp, random_state, random_unitary

KET0 = np.diag([1.0, 0.0]).astype(complex)
KET1 = np.diag([0.0, 1.0]).astype(complex)
HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def superoperator(channel: ch.Channel) -> np.ndarray:
    # column stacking: vec(K rho K^dag) = (conj(K) kron K) vec(rho)
    return sum(np.kron(k.conj(), k) for k in channel.kraus)


def test_unitary_channel_examples(rng):
    ident = ch.unitary_channel(np.eye(2))
    rho = random_state(2, rng)
    assert np.allclose(ident(rho), rho)
    assert np.allclose(ch.unitary_channel(PAULI_X)(KET0), KET1)
    u_t = ch.unitary_channel(ch.fixture_unitary("table1"))
    for _ in range(50):
        assert np.trace(u_t(random_state(8, rng))).real == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(NotUnitary):
        ch.unitary_channel(np.diag([1.0, 0.5]))


def test_apply_examples(rng):
    rho = random_state(4, rng)
    assert np.allclose(ch.depolarizing(1.0, 2)(rho), np.eye(4) / 4)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi /= np.linalg.norm(psi)
    out = ch.unitary_channel(random_unitary(4, rng))(np.outer(psi, psi.conj()))
    assert np.trace(out @ out).real == pytest.approx(1.0)
    chan = ch.compose(ch.tensor(ch.depolarizing(0.3), ch.unitary_channel(HADAMARD)), random_cptp(4, rng))
    expected = (superoperator(chan) @ rho.reshape(-1, order="F")).reshape(4, 4, order="F")
    assert np.allclose(chan(rho), expected, atol=1e-10)
    with pytest.raises(DimensionMismatch):
        chan(np.eye(2) / 2)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4, 8]))
def test_channel_outputs_are_states(seed, d):
    rng = np.random.default_rng(seed)
    chan = random_cptp(d, rng)
    assert chan.is_trace_preserving()
    out = chan(random_state(d, rng))
    assert np.allclose(out, out.conj().T)
    assert np.trace(out).real == pytest.approx(1.0)
    assert np.linalg.eigvalsh(out).min() > -1e-9


def test_compose_and_tensor(rng):
    u = random_unitary(4, rng)
    both = ch.compose(ch.unitary_channel(u.conj().T), ch.unitary_channel(u))
    rho = random_state(4, rng)
    assert np.allclose(both(rho), rho, atol=1e-10)
    cnot = ch.unitary_channel(ch.cnot_matrix(0, 1, 2))
    thrice = ch.compose(cnot, ch.compose(cnot, cnot))
    assert np.allclose(thrice(rho), cnot(rho), atol=1e-12)
    # depolarizing on the left factor only: right marginal unchanged
    left, right = random_state(2, rng), random_state(2, rng)
    out = ch.tensor(ch.depolarizing(0.4), ch.identity_channel(2))(np.kron(left, right))
    out4 = out.reshape(2, 2, 2, 2)
    assert np.allclose(np.einsum("abcb->ac", out4), 0.6 * left + 0.4 * np.eye(2) / 2)
    assert np.allclose(np.einsum("abad->bd", out4), right)
    with pytest.raises(DimensionMismatch):
        ch.compose(cnot, ch.identity_channel(2))


def test_reduce_kraus_preserves_action(rng):
    chan = ch.compose(random_cptp(4, rng, 4), random_cptp(4, rng, 4))
    small = ch.reduce_kraus(chan)
    assert small.kraus.shape[0] <= 16
    rho = random_state(4, rng)
    assert np.allclose(small(rho), chan(rho), atol=1e-12)


def test_u3_examples():
    assert np.allclose(ch.u3_matrix(0, 0, 0), np.eye(2))
    assert np.allclose(ch.u3_matrix(np.pi, 0, np.pi), PAULI_X)
    assert np.allclose(ch.u3_matrix(np.pi / 2, 0, np.pi), HADAMARD)


@settings(max_examples=50, deadline=None)
@given(*[st.floats(-10, 10) for _ in range(3)])
def test_u3_unitary(theta, phi, lam):
    u = ch.u3_matrix(theta, phi, lam)
    assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12)


def test_circuit_unitary_examples():
    assert np.allclose(ch.circuit_unitary(ch.CircuitSpec(2, [])), np.eye(4))
    expected = np.eye(4)[[0, 3, 2, 1]]
    assert np.array_equal(ch.circuit_unitary(ch.CircuitSpec(2, [ch.CNOT(0, 1)])).real, expected)
    spec = ch.parameterised_cnot_spec(np.zeros(18))
    assert np.allclose(ch.circuit_unitary(spec), ch.cnot_matrix(0, 2, 3), atol=1e-10)
    with pytest.raises(InvalidQubitIndex):
        ch.CircuitSpec(2, [ch.CNOT(0, 2)])
    with pytest.raises(InvalidQubitIndex):
        ch.CircuitSpec(2, [ch.U3(5, 0, 0, 0)])


def test_little_endian_embedding():
    # qubit 0 is the right-most Kronecker factor
    assert np.allclose(ch.embed(PAULI_X, (0,), 2), np.kron(np.eye(2), PAULI_X))
    assert np.allclose(ch.embed(PAULI_X, (1,), 2), np.kron(PAULI_X, np.eye(2)))


def test_parameterised_cnot_examples():
    u = ch.circuit_unitary(ch.parameterised_cnot_spec(np.zeros(18)))
    # |q0 q1 q2> = |100> is basis index 1; CNOT(0 -> 2) sends it to |101>, index 5
    assert np.allclose(u @ np.eye(8)[1], np.eye(8)[5])
    spec = ch.parameterised_cnot_spec(np.linspace(-1, 1, 18))
    assert np.allclose(ch.circuit_unitary(spec.appended(ch.U3(1, 0, 0, 0))), ch.circuit_unitary(spec))
    with pytest.raises(WrongParameterCount):
        ch.parameterised_cnot_spec(np.zeros(17))


def test_circuit_unitary_matches_gate_by_gate_oracle(rng):
    spec = ch.random_circuit_spec(rng)
    u = np.eye(8, dtype=complex)
    for g in spec.gates:
        if isinstance(g, ch.U3):
            ops = [np.eye(2)] * 3
            ops[2 - g.qubit] = ch.u3_matrix(g.theta, g.phi, g.lam)
            gate = np.kron(np.kron(ops[0], ops[1]), ops[2])
        else:
            gate = np.zeros((8, 8))
            for i in range(8):
                j = i ^ (((i >> g.control) & 1) << g.target)
                gate[j, i] = 1
        u = gate @ u
    assert np.allclose(ch.circuit_unitary(spec), u, atol=1e-12)


def test_random_hermitian_examples(rng):
    alpha = np.zeros(64)
    alpha[0] = 0.7
    h = ch.hermitian_from_coeffs(ch.RandomHermitianCoeffs(3, alpha))
    assert np.allclose(h, 0.7 * np.eye(8))
    coeffs = ch.load_coefficients("table1")
    assert coeffs["000"] == 0.45631
    assert np.trace(ch.hermitian_from_coeffs(coeffs)).real == pytest.approx(8 * 0.45631)
    coeffs, h = ch.random_hermitian(3, rng)
    assert np.linalg.norm(h - h.conj().T) < 1e-12
    assert np.all(np.abs(coeffs.alpha) <= 1)


def test_pauli_sum_order():
    alpha = np.zeros(16)
    alpha[int("13", 4)] = 1.0
    h = ch.hermitian_from_coeffs(ch.RandomHermitianCoeffs(2, alpha))
    assert np.allclose(h, np.kron(PAULIS[1], PAULIS[3]))


def test_perturbed_unitary_examples(rng):
    u_t = random_unitary(8, rng)
    h_r = random_hermitian_matrix(8, rng)
    assert np.allclose(ch.perturbed_unitary(u_t, h_r, 0.0), u_t)
    u_c = ch.perturbed_unitary(u_t, h_r, 1e-4)
    assert np.allclose(u_c.conj().T @ u_c, np.eye(8), atol=1e-9)
    f = process_fidelity_exact(ch.unitary_channel(u_t), ch.unitary_channel(u_c))
    assert f > 0.999


def test_fixture_tables():
    for name, n in ch.COEFFICIENT_TABLES.items():
        c = ch.load_coefficients(name)
        assert c.n_qubits == n and c.alpha.size == 4**n
        assert np.all(np.abs(c.alpha) <= 1)
    assert ch.load_coefficients("table2").alpha.size == 16
    u6 = ch.circuit_unitary(ch.fixture_circuit("table6"))
    assert np.allclose(u6.conj().T @ u6, np.eye(8), atol=1e-9)
    diff = ch.load_u3_params("table7") - ch.load_u3_params("table6")
    assert diff.size == 30 and np.all(np.abs(diff) <= 0.4 + 1e-12)
    with pytest.raises(FixtureError):
        ch.load_coefficients("table6")
    with pytest.raises(FixtureError):
        ch.fixture_unitary("table99")


def test_random_circuit_spec(rng):
    spec = ch.random_circuit_spec(rng)
    params = spec.u3_params
    assert params.size == 30
    assert np.all((params >= 0) & (params <= 2 * np.pi))
    assert sum(isinstance(g, ch.CNOT) for g in spec.gates) == 4


def test_noise_config_validation():
    assert ch.NoiseConfig.none() == ch.NoiseConfig(0, 0, 0, 0)
    with pytest.raises(OutOfRange):
        ch.NoiseConfig(depolarizing_1q=1.5)
    with pytest.raises(OutOfRange):
        ch.NoiseConfig(coherent_zz_angle=4.0)
    with pytest.raises(OutOfRange):
        ch.NoiseConfig(coherent_z_angle=-4.0)


def test_noisy_backend_examples(rng):
    spec = ch.random_circuit_spec(rng)
    clean = ch.noisy_backend(spec, ch.NoiseConfig.none())
    rho = random_state(8, rng)
    assert np.allclose(clean(rho), ch.unitary_channel(ch.circuit_unitary(spec))(rho), atol=1e-10)
    empty = ch.noisy_backend(ch.CircuitSpec(2, []), ch.NoiseConfig(0.3, 0, 0, 0))
    assert np.allclose(empty(rho[:4, :4] / np.trace(rho[:4, :4])), rho[:4, :4] / np.trace(rho[:4, :4]))
    ideal = ch.unitary_channel(ch.cnot_matrix(0, 2, 3))
    noisy = ch.noisy_backend(ch.parameterised_cnot_spec(np.zeros(18)), ch.NoiseConfig())
    assert noisy.is_trace_preserving()
    assert process_fidelity_exact(ideal, noisy) < 1


def test_z_frame_error_is_attached_to_u3_gates():
    spec = ch.CircuitSpec(1, [ch.U3(0, 0, 0, 0)])
    noisy = ch.noisy_backend(spec, ch.NoiseConfig(0, 0, 0, 0.2))
    assert np.allclose(noisy.kraus[0] @ noisy.kraus[0].conj().T, np.eye(2))
    plus = np.full((2, 2), 0.5, dtype=complex)
    out = noisy(plus)
    # exp(-i a Z) rotates the equator by 2a
    assert np.trace(out @ PAULI_X).real == pytest.approx(np.cos(0.4))
    cnot_only = ch.noisy_backend(ch.CircuitSpec(2, [ch.CNOT(0, 1)]), ch.NoiseConfig(0, 0, 0, 0.2))
    assert np.allclose(cnot_only.kraus[0], ch.cnot_matrix(0, 1, 2))


def test_coherent_errors_combine_constructively():
    ideal = ch.unitary_channel(ch.cnot_matrix(0, 2, 3))
    noisy = ch.noisy_backend(ch.parameterised_cnot_spec(np.zeros(18)), ch.NoiseConfig())
    f1 = process_fidelity_exact(ideal, noisy)
    f3 = process_fidelity_exact(ideal, ch.reduce_kraus(ch.compose(noisy, ch.compose(noisy, noisy))))
    assert f3 < f1**3 - 0.005


def test_default_noise_lands_in_target_band():
    ideal = ch.unitary_channel(ch.cnot_matrix(0, 2, 3))
    noisy = ch.noisy_backend(ch.parameterised_cnot_spec(np.zeros(18)), ch.NoiseConfig())
    assert 0.60 <= process_fidelity_exact(ideal, noisy) <= 0.85


def test_generated_channels_trace_preserving(rng):
    for _ in range(5):
        spec = ch.random_circuit_spec(rng)
        assert ch.noisy_backend(spec, ch.NoiseConfig()).is_trace_preserving()
    assert ch.depolarizing(0.2, 2).is_trace_preserving()
    assert ch.unitary_channel(ch.fixture_unitary("toronto")).is_trace_preserving()
