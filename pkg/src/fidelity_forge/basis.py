"""Product-SIC input states, normalized Pauli observables and overlap algebra.

Index scheme: an n-qubit basis element is labelled by a digit vector
``(a_0, ..., a_{n-1})`` with digits in ``0..3``. The digit vector is read in
Kronecker order (``a_0`` is the leftmost tensor factor) and the flat index is
``sum_k a_k 4**(n-1-k)``, i.e. plain base-4 lexicographic order.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, OutOfRange, SingularOverlap, TooManyQubits

MAX_QUBITS = 6

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)
PAULI_LETTERS = "IXYZ"

# Bloch vectors of the canonical tetrahedron; pairwise dot product -1/3.
SIC_BLOCH_VECTORS = np.array(
    [
        [0.0, 0.0, 1.0],
        [2.0 * np.sqrt(2.0) / 3.0, 0.0, -1.0 / 3.0],
        [-np.sqrt(2.0) / 3.0, np.sqrt(2.0 / 3.0), -1.0 / 3.0],
        [-np.sqrt(2.0) / 3.0, -np.sqrt(2.0 / 3.0), -1.0 / 3.0],
    ]
)


def _check_qubits(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise TooManyQubits(f"n must be in 1..{MAX_QUBITS}, got {n}")


def digit_vectors(n: int) -> np.ndarray:
    """All base-4 digit vectors of length ``n`` in lexicographic order."""
    return np.array(list(itertools.product(range(4), repeat=n)), dtype=np.int64).reshape(-1, n)


def _kron_power(single: np.ndarray, n: int) -> np.ndarray:
    """Stack of all n-fold Kronecker products of the matrices in ``single``."""
    out = single
    k = single.shape[0]
    for _ in range(n - 1):
        a, da = out.shape[0], out.shape[1]
        db = single.shape[1]
        out = np.einsum("aij,bkl->abikjl", out, single).reshape(a * k, da * db, da * db)
    return out


def hamming_matrix(digits: np.ndarray) -> np.ndarray:
    """Pairwise Hamming distances between digit vectors."""
    n_items, n = digits.shape
    ham = np.zeros((n_items, n_items), dtype=np.int8)
    for site in range(n):
        col = digits[:, site]
        ham += col[:, None] != col[None, :]
    return ham


def sic_single_qubit() -> list[np.ndarray]:
    """The four tetrahedral single-qubit states ``(I + r.sigma)/2``."""
    return [
        0.5 * (PAULI_I + r[0] * PAULI_X + r[1] * PAULI_Y + r[2] * PAULI_Z)
        for r in SIC_BLOCH_VECTORS
    ]


@dataclass(frozen=True)
class SicSet:
    n_qubits: int
    states: np.ndarray  # (4**n, d, d)
    digits: np.ndarray  # (4**n, n)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def __len__(self) -> int:
        return self.states.shape[0]


@dataclass(frozen=True)
class PauliBasis:
    """Tensor products of ``{I, X, Y, Z}`` divided by ``sqrt(d)``."""

    n_qubits: int
    observables: np.ndarray  # (4**n, d, d)
    digits: np.ndarray

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def labels(self) -> list[str]:
        return ["".join(PAULI_LETTERS[a] for a in row) for row in self.digits]

    def index(self, label: str) -> int:
        digits = [PAULI_LETTERS.index(c) for c in label.upper()]
        if len(digits) != self.n_qubits:
            raise DimensionMismatch(f"label {label!r} has wrong length")
        return int(sum(a * 4 ** (self.n_qubits - 1 - k) for k, a in enumerate(digits)))

    def __getitem__(self, label: str) -> np.ndarray:
        return self.observables[self.index(label)]


@dataclass(frozen=True)
class OverlapStructure:
    B: np.ndarray
    B_inverse: np.ndarray
    single_qubit_inverse: np.ndarray


@dataclass(frozen=True)
class StateBasis:
    """Everything the fidelity functionals need for an n-qubit system."""

    sic: SicSet
    pauli: PauliBasis
    overlap: OverlapStructure
    hamming: np.ndarray = field(repr=False)

    @property
    def n_qubits(self) -> int:
        return self.sic.n_qubits

    @property
    def dim(self) -> int:
        return self.sic.dim


def sic_product_states(n: int) -> SicSet:
    _check_qubits(n)
    single = np.array(sic_single_qubit())
    return SicSet(n, _kron_power(single, n), digit_vectors(n))


def pauli_basis(n: int) -> PauliBasis:
    _check_qubits(n)
    ops = _kron_power(np.array(PAULIS), n) / np.sqrt(2.0**n)
    return PauliBasis(n, ops, digit_vectors(n))


def overlap_matrix(states: np.ndarray) -> np.ndarray:
    """``B_ij = tr[rho_i^dag rho_j]`` as a real matrix."""
    flat = states.reshape(states.shape[0], -1)
    gram = flat.conj() @ flat.T
    if np.max(np.abs(gram.imag), initial=0.0) > 1e-10:
        raise SingularOverlap("overlap matrix has a non-negligible imaginary part")
    return np.ascontiguousarray(gram.real)


def _checked_inverse(b: np.ndarray) -> np.ndarray:
    try:
        inv = np.linalg.inv(b)
    except np.linalg.LinAlgError as exc:
        raise SingularOverlap(str(exc)) from exc
    resid = np.linalg.norm(b @ inv - np.eye(b.shape[0]))
    if not np.isfinite(resid) or resid > 1e-6:
        raise SingularOverlap(f"inversion residual {resid:.3g} exceeds 1e-6")
    return inv


def overlap_structure(states: SicSet) -> OverlapStructure:
    """Overlap matrix of a product-SIC set and its inverse.

    The inverse is formed as the Kronecker power of the inverted single-qubit
    overlap matrix and cross-checked against direct inversion of the full
    matrix.
    """
    n = states.n_qubits
    B = overlap_matrix(states.states)
    single_B = overlap_matrix(np.array(sic_single_qubit()))
    single_inv = _checked_inverse(single_B)
    kron_inv = np.ones((1, 1))
    for _ in range(n):
        kron_inv = np.kron(kron_inv, single_inv)
    direct_inv = _checked_inverse(B)
    if np.max(np.abs(direct_inv - kron_inv)) > 1e-8:
        raise SingularOverlap("Kronecker-power inverse disagrees with direct inversion")
    return OverlapStructure(B=B, B_inverse=kron_inv, single_qubit_inverse=single_inv)


def order_coefficient(n: int, m: int) -> float:
    """Entry of the inverse overlap matrix for states differing on ``m`` sites."""
    if n < 1 or not 0 <= m <= n:
        raise OutOfRange(f"need 0 <= m <= n, got n={n}, m={m}")
    return (-1) ** m * 5.0 ** (n - m) / 4.0**n


def overlap_cost(states) -> float:
    """Sum of ``tr[rho_i rho_j]`` over ordered pairs ``i != j``."""
    arr = [np.asarray(s) for s in states]
    shapes = {a.shape for a in arr}
    if len(shapes) != 1:
        raise DimensionMismatch(f"states have differing shapes {shapes}")
    stack = np.array(arr)
    flat = stack.reshape(len(arr), -1)
    # tr[a b] = sum_ij a_ij b_ji = vec(a^T) . vec(b)
    gram = np.transpose(stack, (0, 2, 1)).reshape(len(arr), -1) @ flat.T
    total = gram.sum() - np.trace(gram)
    assert abs(total.imag) < 1e-10, "overlap sum has an imaginary part"
    return float(total.real)


@functools.lru_cache(maxsize=None)
def state_basis(n: int) -> StateBasis:
    """Cached bundle of SIC states, Pauli basis and overlap structure."""
    sic = sic_product_states(n)
    return StateBasis(
        sic=sic,
        pauli=pauli_basis(n),
        overlap=overlap_structure(sic),
        hamming=hamming_matrix(sic.digits),
    )
