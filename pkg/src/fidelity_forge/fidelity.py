"""Exact fidelity functionals between two channels.

Nothing here is clamped: the low-order k-fidelities are legitimately negative
for badly mismatched channels.
"""
from __future__ import annotations

import enum
import functools
from dataclasses import dataclass

import numpy as np

from .basis import StateBasis, pauli_basis, state_basis
from .channels import Channel, apply_many
from .errors import DimensionMismatch, OutOfRange

IMAG_TOL = 1e-10


class Formulation(enum.Enum):
    OPERATOR_BASIS = "operator_basis"
    STATE_BASIS = "state_basis"
    LOCAL_OBSERVABLE = "local_observable"


@dataclass(frozen=True)
class FidelityReport:
    value: float
    formulation: Formulation
    n_terms: int


@functools.lru_cache(maxsize=None)
def _paulis(n: int) -> np.ndarray:
    return pauli_basis(n).observables


def _check_pair(lam: Channel, gam: Channel, basis: StateBasis | None = None) -> int:
    if lam.dim != gam.dim:
        raise DimensionMismatch(f"channel dims {lam.dim} and {gam.dim} differ")
    if basis is not None and basis.dim != lam.dim:
        raise DimensionMismatch(f"basis dim {basis.dim} vs channel dim {lam.dim}")
    return lam.dim


def _real(z: complex, scale: float = 1.0) -> float:
    if abs(z.imag) > IMAG_TOL * max(1.0, scale):
        raise ArithmeticError(f"fidelity has imaginary residual {z.imag:.3g}")
    return float(z.real)


def _basis_for(ch: Channel, basis: StateBasis | None) -> StateBasis:
    return basis if basis is not None else state_basis(ch.n_qubits)


def gram(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``G_ij = tr[a_i b_j]`` for stacks of Hermitian operators (real part)."""
    g = a.reshape(a.shape[0], -1).conj() @ b.reshape(b.shape[0], -1).T
    return np.ascontiguousarray(g.real)


def pauli_expectations(outputs: np.ndarray, observables: np.ndarray) -> np.ndarray:
    """``E_ij = tr[outputs_i W_j]`` for Hermitian observables ``W_j``."""
    return gram(outputs, observables).real


def process_fidelity_exact(lam: Channel, gam: Channel) -> float:
    """Average of ``tr[lam(s^dag) gam(s)]`` over the normalized Pauli operator basis."""
    d = _check_pair(lam, gam)
    ops = _paulis(lam.n_qubits)
    la = apply_many(lam, ops)
    ga = apply_many(gam, ops)
    total = np.vdot(la.reshape(-1), ga.reshape(-1))
    return _real(total) / d**2


def process_fidelity_statebasis(lam: Channel, gam: Channel, basis: StateBasis | None = None) -> float:
    basis = _basis_for(lam, basis)
    d = _check_pair(lam, gam, basis)
    g = gram(apply_many(lam, basis.sic.states), apply_many(gam, basis.sic.states))
    return float(np.sum(basis.overlap.B_inverse * g)) / d**2


def process_fidelity_local_observable(lam: Channel, gam: Channel, basis: StateBasis | None = None) -> float:
    """Process fidelity contracted against local observables (``d**4`` settings)."""
    basis = _basis_for(lam, basis)
    d = _check_pair(lam, gam, basis)
    states, obs = basis.sic.states, basis.pauli.observables
    lw = pauli_expectations(apply_many(lam, states), obs)
    gw = pauli_expectations(apply_many(gam, states), obs)
    coeff = basis.overlap.B_inverse.T @ lw
    return float(np.sum(coeff * gw)) / d**2


def process_fidelity(
    lam: Channel,
    gam: Channel,
    formulation: Formulation = Formulation.OPERATOR_BASIS,
    basis: StateBasis | None = None,
    verify: bool = False,
) -> FidelityReport:
    """Process fidelity in the requested formulation.

    The local-observable route costs ``d**4`` trace evaluations and exists for
    cross-checking only; it must be requested with ``verify=True``.
    """
    d2 = lam.dim**2
    if formulation is Formulation.OPERATOR_BASIS:
        return FidelityReport(process_fidelity_exact(lam, gam), formulation, d2)
    if formulation is Formulation.STATE_BASIS:
        return FidelityReport(process_fidelity_statebasis(lam, gam, basis), formulation, d2 * d2)
    if not verify:
        raise ValueError("the local-observable formulation is a verification mode; pass verify=True")
    return FidelityReport(process_fidelity_local_observable(lam, gam, basis), formulation, d2 * d2)


def _state_gram(lam: Channel, gam: Channel, basis: StateBasis) -> np.ndarray:
    return gram(apply_many(lam, basis.sic.states), apply_many(gam, basis.sic.states))


def k_fidelities(lam: Channel, gam: Channel, basis: StateBasis | None = None) -> np.ndarray:
    """All truncations ``k = 0..n`` of the state-basis expansion at once."""
    basis = _basis_for(lam, basis)
    d = _check_pair(lam, gam, basis)
    weighted = basis.overlap.B_inverse * _state_gram(lam, gam, basis)
    ham = basis.hamming
    per_order = np.array([weighted[ham == m].sum() for m in range(basis.n_qubits + 1)])
    return np.cumsum(per_order) / d**2


def k_fidelity(lam: Channel, gam: Channel, k: int, basis: StateBasis | None = None) -> float:
    """Keep only input pairs that differ on at most ``k`` qubits.

    Each kept pair is weighted by the inverse-overlap entry for its Hamming
    distance, so ``k = 0`` carries weight ``(5/4)**n`` per diagonal term and
    ``k = n`` is the full process fidelity.
    """
    basis = _basis_for(lam, basis)
    if not 0 <= k <= basis.n_qubits:
        raise OutOfRange(f"k={k} outside 0..{basis.n_qubits}")
    return float(k_fidelities(lam, gam, basis)[k])


def zero_fidelity(lam: Channel, gam: Channel, basis: StateBasis | None = None) -> float:
    """Mean state overlap ``tr[lam(rho_i) gam(rho_i)]`` over the product-SIC inputs.

    Cross-checked against the observable double sum
    ``sum_ij tr[lam(rho_i) W_j] tr[gam(rho_i) W_j]``.
    """
    basis = _basis_for(lam, basis)
    d = _check_pair(lam, gam, basis)
    la = apply_many(lam, basis.sic.states)
    ga = apply_many(gam, basis.sic.states)
    direct = np.einsum("nab,nba->", la, ga)
    value = _real(direct) / d**2
    obs = basis.pauli.observables
    via_obs = float(np.sum(pauli_expectations(la, obs) * pauli_expectations(ga, obs))) / d**2
    if abs(via_obs - value) > 1e-10:
        raise ArithmeticError(f"0-fidelity routes disagree: {value} vs {via_obs}")
    return value
