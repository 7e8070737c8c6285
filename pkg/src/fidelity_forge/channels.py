"""Kraus channels, U3/CNOT circuits, noise models and random instance generators.

Qubit ordering is little-endian everywhere: qubit ``q`` is bit ``q`` of the
computational-basis index, so qubit 0 is the rightmost Kronecker factor.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import NamedTuple, Union

import numpy as np

from . import linalg
from .basis import PAULIS, MAX_QUBITS
from .errors import (
    DimensionMismatch,
    FixtureError,
    InvalidQubitIndex,
    NotUnitary,
    OutOfRange,
    TooManyQubits,
    WrongParameterCount,
)

TP_TOL = 1e-9


@dataclass(frozen=True)
class Channel:
    """Completely-positive map stored as a stack of Kraus operators ``(K, d, d)``."""

    kraus: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[1] != k.shape[2] or k.shape[0] == 0:
            raise DimensionMismatch(f"bad Kraus stack shape {k.shape}")
        k.setflags(write=False)
        object.__setattr__(self, "kraus", k)

    @property
    def dim(self) -> int:
        return self.kraus.shape[1]

    @property
    def n_qubits(self) -> int:
        return int(round(np.log2(self.dim)))

    @property
    def is_unitary(self) -> bool:
        return self.kraus.shape[0] == 1 and linalg.is_unitary(self.kraus[0])

    def tp_error(self) -> float:
        acc = np.einsum("kji,kjl->il", self.kraus.conj(), self.kraus)
        return float(np.linalg.norm(acc - np.eye(self.dim)))

    def is_trace_preserving(self, tol: float = TP_TOL) -> bool:
        return self.tp_error() <= tol

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply(self, rho)


def identity_channel(dim: int) -> Channel:
    return Channel(np.eye(dim, dtype=complex))


def unitary_channel(u: np.ndarray) -> Channel:
    u = np.asarray(u, dtype=complex)
    if not linalg.is_unitary(u, tol=1e-8):
        raise NotUnitary("matrix is not unitary within 1e-8")
    return Channel(u)


def apply(ch: Channel, rho: np.ndarray) -> np.ndarray:
    """``sum_k K rho K^dag``."""
    rho = np.asarray(rho)
    if rho.shape != (ch.dim, ch.dim):
        raise DimensionMismatch(f"state shape {rho.shape} vs channel dim {ch.dim}")
    return np.einsum("kab,bc,kdc->ad", ch.kraus, rho, ch.kraus.conj())


def apply_many(ch: Channel, rhos: np.ndarray) -> np.ndarray:
    """Apply the channel to a stack of operators ``(N, d, d)``."""
    rhos = np.asarray(rhos)
    if rhos.shape[1:] != (ch.dim, ch.dim):
        raise DimensionMismatch(f"operator shape {rhos.shape[1:]} vs channel dim {ch.dim}")
    if ch.kraus.shape[0] == 1:
        u = ch.kraus[0]
        return u @ rhos @ u.conj().T
    tmp = np.einsum("kab,nbc->nkac", ch.kraus, rhos)
    return np.einsum("nkac,kdc->nad", tmp, ch.kraus.conj())


def compose(outer: Channel, inner: Channel) -> Channel:
    """Channel applying ``inner`` first, then ``outer``."""
    if outer.dim != inner.dim:
        raise DimensionMismatch(f"dims {outer.dim} and {inner.dim} differ")
    prod = np.einsum("aij,bjk->abik", outer.kraus, inner.kraus)
    return Channel(prod.reshape(-1, outer.dim, outer.dim))


def tensor(a: Channel, b: Channel) -> Channel:
    """``a`` on the left Kronecker factor, ``b`` on the right one."""
    ka, kb = a.kraus, b.kraus
    prod = np.einsum("aij,bkl->abikjl", ka, kb)
    d = a.dim * b.dim
    return Channel(prod.reshape(-1, d, d))


def reduce_kraus(ch: Channel, tol: float = 1e-13) -> Channel:
    """Equivalent channel with at most ``d**2`` Kraus operators (via the Choi matrix)."""
    d = ch.dim
    if ch.kraus.shape[0] <= 1:
        return ch
    vecs = ch.kraus.reshape(ch.kraus.shape[0], -1)
    choi = vecs.T @ vecs.conj()
    vals, v = np.linalg.eigh(0.5 * (choi + choi.conj().T))
    keep = vals > tol * max(1.0, vals[-1])
    ops = (v[:, keep] * np.sqrt(vals[keep])).T.reshape(-1, d, d)
    return Channel(ops[::-1])


def depolarizing(p: float, n_qubits: int = 1) -> Channel:
    """Uniform Pauli channel ``rho -> (1-p) rho + p I/d`` with ``4**n`` Kraus operators."""
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"probability {p} outside [0, 1]")
    paulis = np.array(PAULIS)
    ops = paulis
    for _ in range(n_qubits - 1):
        ops = np.einsum("aij,bkl->abikjl", ops, paulis).reshape(ops.shape[0] * 4, ops.shape[1] * 2, -1)
    n_ops = ops.shape[0]
    weights = np.full(n_ops, p / n_ops)
    weights[0] += 1.0 - p
    return Channel(np.sqrt(weights)[:, None, None] * ops)


# ---------------------------------------------------------------- gate algebra


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (lam + phi)) * c],
        ],
        dtype=complex,
    )


def embed(op: np.ndarray, qubits, n_qubits: int) -> np.ndarray:
    """Embed an operator on ``qubits`` into the full register.

    The operator's own basis index is little-endian in the listed qubits:
    ``qubits[0]`` is its least significant bit.
    """
    qubits = tuple(int(q) for q in qubits)
    k = len(qubits)
    op = np.asarray(op, dtype=complex)
    if op.shape != (2**k, 2**k):
        raise DimensionMismatch(f"operator shape {op.shape} for {k} qubits")
    if len(set(qubits)) != k or any(not 0 <= q < n_qubits for q in qubits):
        raise InvalidQubitIndex(f"bad qubit list {qubits} for {n_qubits} qubits")
    d = 2**n_qubits
    idx = np.arange(d)
    local = np.zeros(d, dtype=np.int64)
    mask = 0
    for j, q in enumerate(qubits):
        local |= ((idx >> q) & 1) << j
        mask |= 1 << q
    rest = idx & ~mask
    same_rest = rest[:, None] == rest[None, :]
    return np.where(same_rest, op[local[:, None], local[None, :]], 0.0)


def cnot_matrix(control: int, target: int, n_qubits: int) -> np.ndarray:
    if control == target or not (0 <= control < n_qubits and 0 <= target < n_qubits):
        raise InvalidQubitIndex(f"bad CNOT({control}, {target}) on {n_qubits} qubits")
    d = 2**n_qubits
    idx = np.arange(d)
    image = idx ^ (((idx >> control) & 1) << target)
    out = np.zeros((d, d), dtype=complex)
    out[image, idx] = 1.0
    return out


def zz_rotation(angle: float, q1: int, q2: int, n_qubits: int) -> np.ndarray:
    """``exp(-i angle Z_q1 Z_q2)`` on the full register."""
    idx = np.arange(2**n_qubits)
    parity = ((idx >> q1) ^ (idx >> q2)) & 1
    return np.diag(np.exp(-1j * angle * (1 - 2 * parity)))


class U3(NamedTuple):
    qubit: int
    theta: float
    phi: float
    lam: float


class CNOT(NamedTuple):
    control: int
    target: int


Gate = Union[U3, CNOT]


@dataclass(frozen=True)
class CircuitSpec:
    n_qubits: int
    gates: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        self.validate()

    def validate(self) -> None:
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise TooManyQubits(f"n_qubits={self.n_qubits}")
        for g in self.gates:
            if isinstance(g, U3):
                if not 0 <= g.qubit < self.n_qubits:
                    raise InvalidQubitIndex(f"{g} on {self.n_qubits} qubits")
            elif isinstance(g, CNOT):
                if g.control == g.target or not (
                    0 <= g.control < self.n_qubits and 0 <= g.target < self.n_qubits
                ):
                    raise InvalidQubitIndex(f"{g} on {self.n_qubits} qubits")
            else:
                raise TypeError(f"unknown gate {g!r}")

    @property
    def u3_params(self) -> np.ndarray:
        return np.array([[g.theta, g.phi, g.lam] for g in self.gates if isinstance(g, U3)]).reshape(-1)

    def appended(self, *gates: Gate) -> "CircuitSpec":
        return CircuitSpec(self.n_qubits, self.gates + tuple(gates))


def gate_unitary(g: Gate, n_qubits: int) -> np.ndarray:
    if isinstance(g, U3):
        return embed(u3_matrix(g.theta, g.phi, g.lam), (g.qubit,), n_qubits)
    return cnot_matrix(g.control, g.target, n_qubits)


def circuit_unitary(spec: CircuitSpec) -> np.ndarray:
    spec.validate()
    u = np.eye(2**spec.n_qubits, dtype=complex)
    for g in spec.gates:
        u = gate_unitary(g, spec.n_qubits) @ u
    return u


def parameterised_cnot_spec(params) -> CircuitSpec:
    """Three-qubit CNOT(0 -> 2) routed through qubit 1, dressed with U3 layers.

    The first nine parameters drive the input U3 layer on qubits 0, 1, 2, the
    last nine the output layer. All-zero parameters give the bare gate.
    """
    p = np.asarray(params, dtype=float).reshape(-1)
    if p.size != 18:
        raise WrongParameterCount(f"expected 18 parameters, got {p.size}")
    pre = [U3(q, *p[3 * q : 3 * q + 3]) for q in range(3)]
    post = [U3(q, *p[9 + 3 * q : 12 + 3 * q]) for q in range(3)]
    core = [CNOT(0, 1), CNOT(1, 2), CNOT(0, 1), CNOT(1, 2)]
    return CircuitSpec(3, pre + core + post)


# layout of the 10-U3 random benchmark circuit: "u" is a U3 slot, tuples are CNOTs
RANDOM_CIRCUIT_LAYOUT = (
    ("u", 0), ("u", 1), ("u", 2), (0, 1), (1, 2),
    ("u", 0), ("u", 1), ("u", 2), (0, 1), (1, 2),
    ("u", 0), ("u", 1), ("u", 2), ("u", 0),
)


def random_circuit_from_params(params) -> CircuitSpec:
    p = np.asarray(params, dtype=float).reshape(-1)
    if p.size != 30:
        raise WrongParameterCount(f"expected 30 parameters, got {p.size}")
    gates, k = [], 0
    for a, b in RANDOM_CIRCUIT_LAYOUT:
        if a == "u":
            gates.append(U3(b, *p[3 * k : 3 * k + 3]))
            k += 1
        else:
            gates.append(CNOT(a, b))
    return CircuitSpec(3, gates)


def random_circuit_spec(rng: np.random.Generator) -> CircuitSpec:
    return random_circuit_from_params(rng.uniform(0.0, 2.0 * np.pi, size=30))


# ------------------------------------------------------ random unitary channels


@dataclass(frozen=True)
class RandomHermitianCoeffs:
    """Pauli-expansion coefficients indexed by base-4 digit strings (flattened)."""

    n_qubits: int
    alpha: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float).reshape(-1)
        if a.size != 4**self.n_qubits:
            raise WrongParameterCount(f"need {4 ** self.n_qubits} coefficients, got {a.size}")
        object.__setattr__(self, "alpha", a)

    def __getitem__(self, key: str) -> float:
        return float(self.alpha[int(key, 4)])


def _pauli_sum(alpha: np.ndarray) -> np.ndarray:
    # alpha has shape (4,)*n; leading axis is the leftmost Kronecker factor
    if alpha.ndim == 0:
        return np.array([[complex(alpha)]])
    return sum(np.kron(PAULIS[a], _pauli_sum(alpha[a])) for a in range(4))


def hermitian_from_coeffs(coeffs: RandomHermitianCoeffs) -> np.ndarray:
    """``sum_a alpha_a sigma^(a_0) x ... x sigma^(a_{n-1})`` with unnormalized Paulis."""
    return _pauli_sum(coeffs.alpha.reshape((4,) * coeffs.n_qubits))


def random_hermitian(n: int, rng: np.random.Generator):
    """Random generator with coefficients uniform in ``[-1, 1]``."""
    if not 1 <= n <= MAX_QUBITS:
        raise TooManyQubits(f"n={n}")
    coeffs = RandomHermitianCoeffs(n, rng.uniform(-1.0, 1.0, size=4**n))
    return coeffs, hermitian_from_coeffs(coeffs)


def unitary_from_generator(h: np.ndarray) -> np.ndarray:
    return linalg.expm_minus_i(h, 1.0)


def perturbed_unitary(u_t: np.ndarray, h_r: np.ndarray, eps: float) -> np.ndarray:
    """``exp(-i eps h_r) u_t exp(i eps h_r)``."""
    rot = linalg.expm_minus_i(h_r, eps)
    return rot @ u_t @ rot.conj().T


# ------------------------------------------------------------------- fixtures


def _read_fixture(name: str) -> list[tuple[str, str]]:
    try:
        text = resources.files("fidelity_forge.fixtures").joinpath(f"{name}.txt").read_text()
    except FileNotFoundError as exc:
        raise FixtureError(f"no fixture named {name!r}") from exc
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append(tuple(line.split()))
    return rows


COEFFICIENT_TABLES = {"table1": 3, "table2": 2, "table3": 3, "table4": 3, "table5": 3}
CIRCUIT_TABLES = ("table6", "table7", "toronto")


def load_coefficients(name: str) -> RandomHermitianCoeffs:
    if name not in COEFFICIENT_TABLES:
        raise FixtureError(f"{name!r} is not a coefficient table")
    n = COEFFICIENT_TABLES[name]
    rows = _read_fixture(name)
    alpha = np.full(4**n, np.nan)
    for row in rows:
        if len(row) != 2 or len(row[0]) != n or set(row[0]) - set("0123"):
            raise FixtureError(f"{name}: malformed line {row}")
        alpha[int(row[0], 4)] = float(row[1])
    if len(rows) != 4**n or np.isnan(alpha).any():
        raise FixtureError(f"{name}: expected {4 ** n} distinct coefficients, got {len(rows)}")
    return RandomHermitianCoeffs(n, alpha)


def load_u3_params(name: str) -> np.ndarray:
    if name not in CIRCUIT_TABLES:
        raise FixtureError(f"{name!r} is not a circuit parameter table")
    rows = _read_fixture(name)
    order = {"theta": 0, "phi": 1, "lambda": 2}
    params = np.full((10, 3), np.nan)
    for row in rows:
        gate, _, which = row[0].partition(".")
        params[int(gate) - 1, order[which]] = float(row[1])
    if len(rows) != 30 or np.isnan(params).any():
        raise FixtureError(f"{name}: expected 30 parameters, got {len(rows)}")
    return params.reshape(-1)


def fixture_circuit(name: str) -> CircuitSpec:
    return random_circuit_from_params(load_u3_params(name))


def fixture_unitary(name: str) -> np.ndarray:
    """Unitary named by a fixture table: ``exp(-iH)`` or a circuit unitary."""
    if name in COEFFICIENT_TABLES:
        return unitary_from_generator(hermitian_from_coeffs(load_coefficients(name)))
    return circuit_unitary(fixture_circuit(name))


# ---------------------------------------------------------------- noisy backend


@dataclass(frozen=True)
class NoiseConfig:
    depolarizing_1q: float = 0.003
    depolarizing_2q: float = 0.02
    coherent_zz_angle: float = 0.05
    coherent_z_angle: float = 0.15

    def __post_init__(self):
        for p in (self.depolarizing_1q, self.depolarizing_2q):
            if not 0.0 <= p <= 1.0:
                raise OutOfRange(f"probability {p} outside [0, 1]")
        for a in (self.coherent_zz_angle, self.coherent_z_angle):
            if not -np.pi <= a <= np.pi:
                raise OutOfRange(f"angle {a} outside [-pi, pi]")

    @classmethod
    def none(cls) -> "NoiseConfig":
        return cls(0.0, 0.0, 0.0, 0.0)


def _z_rotation(angle: float) -> np.ndarray:
    return np.diag([np.exp(-1j * angle), np.exp(1j * angle)])


def _local_depolarizing(p: float, qubits, n_qubits: int) -> Channel:
    local = depolarizing(p, len(qubits))
    return Channel(np.array([embed(k, qubits, n_qubits) for k in local.kraus]))


def noisy_backend(spec: CircuitSpec, noise: NoiseConfig) -> Channel:
    """Simulated device channel for a circuit.

    Each U3 is followed by a systematic ``exp(-i angle Z)`` frame error and
    single-qubit depolarizing noise on its target. Each CNOT is followed by a
    coherent ``exp(-i angle Z Z)`` on its qubit pair and then two-qubit
    depolarizing noise on the same pair.
    """
    spec.validate()
    n = spec.n_qubits
    d = 2**n
    total = identity_channel(d)
    for g in spec.gates:
        u = gate_unitary(g, n)
        if isinstance(g, CNOT):
            if noise.coherent_zz_angle:
                u = zz_rotation(noise.coherent_zz_angle, g.control, g.target, n) @ u
            step = Channel(u)
            if noise.depolarizing_2q:
                step = compose(_local_depolarizing(noise.depolarizing_2q, (g.control, g.target), n), step)
        else:
            if noise.coherent_z_angle:
                u = embed(_z_rotation(noise.coherent_z_angle), (g.qubit,), n) @ u
            step = Channel(u)
            if noise.depolarizing_1q:
                step = compose(_local_depolarizing(noise.depolarizing_1q, (g.qubit,), n), step)
        total = compose(step, total)
        if total.kraus.shape[0] > d * d:
            total = reduce_kraus(total)
    return reduce_kraus(total)
