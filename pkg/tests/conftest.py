import numpy as np
import pytest

from fidelity_forge import channels as ch
from fidelity_forge.linalg import expm_minus_i, random_hermitian_matrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return expm_minus_i(random_hermitian_matrix(d, rng))


def random_state(d: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_cptp(d: int, rng: np.random.Generator, n_kraus: int = 3) -> ch.Channel:
    """Random channel from an isometry (Stinespring) split into Kraus blocks."""
    a = rng.normal(size=(n_kraus * d, d)) + 1j * rng.normal(size=(n_kraus * d, d))
    q, _ = np.linalg.qr(a)
    return ch.Channel(q.reshape(n_kraus, d, d))


def tables_pair(eps: float = 0.1):
    u_t = ch.fixture_unitary("table4")
    h_r = ch.hermitian_from_coeffs(ch.load_coefficients("table5"))
    return ch.unitary_channel(u_t), ch.unitary_channel(ch.perturbed_unitary(u_t, h_r, eps))


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record and print one PASS/FAIL line, then assert."""

    def check(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
