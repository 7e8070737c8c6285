"""Importance-sampled estimators of the 0-fidelity and the process fidelity.

Settings ``(i, j)`` pair an input (a product-SIC state for the 0-fidelity, a
normalized Pauli operator for the process fidelity) with a normalized Pauli
observable ``W_j``. They are drawn i.i.d. with probability proportional to the
squared target expectation, and each draw contributes the ratio of the
measured expectation under the channel being assessed to the exact target
expectation.

Random streams: a repetition ``r`` of a run seeded with ``seed`` uses
``np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key + (r,)))``,
see :func:`stream`.
"""
from __future__ import annotations

import enum
import functools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import sampling
from .basis import PAULIS, StateBasis, state_basis
from .channels import Channel, apply_many
from .errors import (
    DegenerateDistribution,
    DimensionMismatch,
    FixtureError,
    InvalidProbabilities,
    OutOfRange,
    ShotsNotDivisible,
)
from .fidelity import gram, process_fidelity_exact, zero_fidelity

DROP_TOL = 1e-12
MIN_MASS = 1e-9
CLAMP_TOL = 1e-12
CLAMP_MASS_TOL = 1e-8
MAX_UNIQUE_SETTINGS = 900
THREADS_ENV = "FIDELITY_FORGE_THREADS"


class Kind(enum.Enum):
    ZERO_FIDELITY = "zero"
    PROCESS_FIDELITY = "process"


class Mode(enum.Enum):
    FULL_TRACE = "full_trace"
    PROJECTIVE = "projective"
    # reference only: redraws the input eigenstate on every shot
    SHOT_BY_SHOT = "shot_by_shot"


SHOT_BY_SHOT_NOTE = "not NISQ-realizable: input state changes on every shot"


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, key...)``; the documented split function."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    if threads < 1:
        raise OutOfRange(f"threads must be >= 1, got {threads}")
    return threads


def _as_rng(rng) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    if rng is None:
        raise ValueError("an explicit rng or integer seed is required")
    return np.random.default_rng(int(rng)), int(rng)


# ------------------------------------------------------------- distributions


@dataclass(frozen=True)
class SettingDistribution:
    """Sampling distribution over (input, observable) settings.

    Only entries with a non-negligible target expectation are stored.
    ``mass`` is the total weight before renormalization; it is exactly 1 for
    unitary targets.
    """

    kind: Kind
    state_index: np.ndarray
    observable_index: np.ndarray
    probability: np.ndarray
    denominator: np.ndarray
    dim: int
    mass: float

    @property
    def entries(self) -> list[tuple[int, int, float, float]]:
        return list(
            zip(
                self.state_index.tolist(),
                self.observable_index.tolist(),
                self.probability.tolist(),
                self.denominator.tolist(),
            )
        )

    def __len__(self) -> int:
        return self.probability.size

    def sample(self, l: int, rng: np.random.Generator) -> np.ndarray:
        """Indices into the entry arrays of ``l`` i.i.d. draws."""
        return rng.choice(self.probability.size, size=l, p=self.probability)


def _distribution(kind: Kind, expectations: np.ndarray, dim: int) -> SettingDistribution:
    weights = expectations**2 / dim**2
    mass = float(weights.sum())
    if mass < MIN_MASS:
        raise DegenerateDistribution(f"total probability mass {mass:.3g} below {MIN_MASS}")
    i, j = np.nonzero(np.abs(expectations) >= DROP_TOL)
    prob = weights[i, j] / weights[i, j].sum()
    for arr in (i, j, prob):
        arr.setflags(write=False)
    den = expectations[i, j]
    den.setflags(write=False)
    return SettingDistribution(kind, i, j, prob, den, dim, mass)


def setting_distribution_zero(lam: Channel, basis: StateBasis | None = None) -> SettingDistribution:
    basis = basis if basis is not None else state_basis(lam.n_qubits)
    if basis.dim != lam.dim:
        raise DimensionMismatch(f"basis dim {basis.dim} vs channel dim {lam.dim}")
    expect = gram(apply_many(lam, basis.sic.states), basis.pauli.observables)
    return _distribution(Kind.ZERO_FIDELITY, expect, lam.dim)


def setting_distribution_process(lam: Channel, pauli=None) -> SettingDistribution:
    pauli = pauli if pauli is not None else state_basis(lam.n_qubits).pauli
    if pauli.dim != lam.dim:
        raise DimensionMismatch(f"basis dim {pauli.dim} vs channel dim {lam.dim}")
    ops = pauli.observables
    expect = gram(apply_many(lam, ops), ops)
    return _distribution(Kind.PROCESS_FIDELITY, expect, lam.dim)


# --------------------------------------------------------------- measurement


@dataclass(frozen=True)
class Eigensystem:
    """Distinct eigenvalues of an observable and the projectors onto their eigenspaces."""

    values: np.ndarray  # (G,)
    projectors: np.ndarray  # (G, d, d)


def eigensystem(w: np.ndarray, tol: float = 1e-9) -> Eigensystem:
    w = np.asarray(w, dtype=complex)
    return _eigensystem_cached(w.tobytes(), w.shape[0], tol)


@functools.lru_cache(maxsize=4096)
def _eigensystem_cached(raw: bytes, d: int, tol: float) -> Eigensystem:
    w = np.frombuffer(raw, dtype=complex).reshape(d, d)
    vals, vecs = np.linalg.eigh(0.5 * (w + w.conj().T))
    groups: list[list[int]] = []
    for k, v in enumerate(vals):
        if groups and abs(v - vals[groups[-1][0]]) <= tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    values = np.array([vals[g].mean() for g in groups])
    projectors = np.array([vecs[:, g] @ vecs[:, g].conj().T for g in groups])
    return Eigensystem(values, projectors)


def clean_probabilities(p: np.ndarray) -> np.ndarray:
    """Clamp round-off negatives and renormalize along the last axis.

    Raises:
        InvalidProbabilities: if more than ``1e-8`` of mass sits below ``-1e-12``.
    """
    p = np.asarray(p, dtype=float)
    neg = np.where(p < -CLAMP_TOL, -p, 0.0).sum(axis=-1)
    if np.any(neg > CLAMP_MASS_TOL):
        raise InvalidProbabilities(f"negative probability mass {float(np.max(neg)):.3g}")
    p = np.clip(p, 0.0, None)
    total = p.sum(axis=-1, keepdims=True)
    if np.any(total <= 0):
        raise InvalidProbabilities("outcome probabilities sum to zero")
    return p / total


def padded_cdf(p: np.ndarray, n_valid: np.ndarray | None = None) -> np.ndarray:
    """Row-wise CDF with the last real outcome and all padding set to ``+inf``."""
    cdf = np.cumsum(p, axis=-1)
    width = cdf.shape[-1]
    if n_valid is None:
        n_valid = np.full(cdf.shape[0], width)
    cdf[np.arange(width)[None, :] >= (np.asarray(n_valid)[:, None] - 1)] = np.inf
    return cdf


def measure_expectation(rho_out: np.ndarray, w: np.ndarray, mode: Mode, m: int = 1, rng=None) -> float:
    """Expectation of ``w`` in ``rho_out``: exact, or the mean of ``m`` projective shots."""
    rho_out = np.asarray(rho_out)
    w = np.asarray(w)
    if rho_out.shape != w.shape:
        raise DimensionMismatch(f"state {rho_out.shape} vs observable {w.shape}")
    if mode is Mode.FULL_TRACE:
        return float(np.einsum("ab,ba->", rho_out, w).real)
    if mode is not Mode.PROJECTIVE:
        raise ValueError(f"unsupported mode {mode}")
    if m < 1:
        raise OutOfRange(f"need m >= 1 shots, got {m}")
    rng, _ = _as_rng(rng)
    eig = eigensystem(w)
    p = np.einsum("gab,ba->g", eig.projectors, rho_out).real
    p = clean_probabilities(p[None, :])
    counts = sampling.count_outcomes(rng, padded_cdf(p), m)
    return float(counts[0] @ eig.values) / m


# ------------------------------------------------------------------ bounds


def _check_bound_args(f: float, l: int, m: float) -> float:
    if not -1e-9 <= f <= 1.0 + 1e-9:
        raise OutOfRange(f"fidelity {f} outside [0, 1]")
    if l < 1 or not m >= 1:
        raise OutOfRange(f"need l >= 1 and m >= 1, got l={l}, m={m}")
    return min(max(f, 0.0), 1.0)


def variance_bounds_zero(f0: float, d: int, l: int, m: float = math.inf) -> tuple[float, float]:
    """``((1 - F0^2)/l, (1 + d/m - F0^2)/l)``; ``m = inf`` is full-trace readout."""
    f0 = _check_bound_args(f0, l, m)
    return (1.0 - f0**2) / l, (1.0 + d / m - f0**2) / l


def variance_bounds_process(f: float, d: int, l: int, m: float = math.inf) -> tuple[float, float]:
    """``((1 - F^2)/l, (1 + d^2/m - F^2)/l)`` with ``m`` total shots per setting."""
    f = _check_bound_args(f, l, m)
    return (1.0 - f**2) / l, (1.0 + d**2 / m - f**2) / l


# --------------------------------------------------------------- estimators


@dataclass(frozen=True)
class EstimateRecord:
    kind: Kind
    mode: Mode
    l: int
    m: float
    value: float
    settings: np.ndarray  # (l, 2) of (input index, observable index)
    predicted_variance_lo: float
    predicted_variance_hi: float
    rng_seed: int | None = None
    heuristic: bool = False
    note: str = ""


def _is_unitary_target(lam: Channel) -> bool:
    return lam.kraus.shape[0] == 1 or np.linalg.matrix_rank(lam.kraus.reshape(lam.kraus.shape[0], -1), tol=1e-10) == 1


@dataclass
class _Tables:
    """Per-pair quantities shared by every repetition of an estimator."""

    numerator: np.ndarray  # exact tr[Gamma(input) W] per distribution entry
    values: np.ndarray  # (n_obs, G) distinct eigenvalues, zero padded
    n_groups: np.ndarray  # (n_obs,)
    projectors: np.ndarray = field(repr=False)  # (n_obs, G, d, d)


def _observable_tables(obs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Padded eigenvalues, group counts and eigenspace projectors of each observable."""
    systems = [eigensystem(w) for w in obs]
    width = max(e.values.size for e in systems)
    d = obs.shape[1]
    values = np.zeros((len(systems), width))
    projectors = np.zeros((len(systems), width, d, d), dtype=complex)
    for j, e in enumerate(systems):
        values[j, : e.values.size] = e.values
        projectors[j, : e.values.size] = e.projectors
    n_groups = np.array([e.values.size for e in systems])
    return values, n_groups, projectors


def _outcome_probabilities(outputs: np.ndarray, projectors: np.ndarray) -> np.ndarray:
    n_obs, width, d, _ = projectors.shape
    p = gram(projectors.reshape(n_obs * width, d, d), outputs).T
    return p.reshape(outputs.shape[0], n_obs, width)


class _Estimator:
    kind: Kind

    def __init__(self, lam: Channel, gam: Channel, basis: StateBasis | None = None):
        if lam.dim != gam.dim:
            raise DimensionMismatch(f"channel dims {lam.dim} and {gam.dim} differ")
        self.lam, self.gam = lam, gam
        self.basis = basis if basis is not None else state_basis(lam.n_qubits)
        self.dim = lam.dim
        self.unitary_target = _is_unitary_target(lam)

    # subclasses fill: distribution, tables, exact, _bounds, _measured
    def _bounds(self, l: int, m: float) -> tuple[float, float]:
        raise NotImplementedError

    def _measured(self, picks: np.ndarray, m: int, mode: Mode, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def _check(self, l: int, m: int | None, mode: Mode) -> float:
        if l < 1:
            raise OutOfRange(f"need l >= 1 settings, got {l}")
        if mode is Mode.FULL_TRACE:
            return math.inf
        if m is None or m < 1:
            raise OutOfRange(f"need m >= 1 shots in {mode.value} mode, got {m}")
        return m

    def _draw(self, l: int, m, mode: Mode, rng: np.random.Generator) -> tuple[np.ndarray, float]:
        picks = self.distribution.sample(l, rng)
        ratios = self._measured(picks, m, mode, rng) / self.distribution.denominator[picks]
        return picks, float(ratios.mean())

    def estimate(self, l: int, m: int | None = None, mode: Mode = Mode.FULL_TRACE, rng=None) -> EstimateRecord:
        """One estimate from ``l`` sampled settings."""
        m_eff = self._check(l, m, mode)
        rng, seed = _as_rng(rng)
        picks, value = self._draw(l, m, mode, rng)
        lo, hi = self._bounds(l, m_eff)
        dist = self.distribution
        settings = np.stack([dist.state_index[picks], dist.observable_index[picks]], axis=1)
        note = SHOT_BY_SHOT_NOTE if mode is Mode.SHOT_BY_SHOT else ""
        if not self.unitary_target:
            note = (note + "; " if note else "") + "heuristic: non-unitary target"
        return EstimateRecord(
            self.kind, mode, l, m_eff, value, settings, lo, hi, seed, not self.unitary_target, note
        )

    def sample(
        self,
        reps: int,
        l: int,
        m: int | None = None,
        mode: Mode = Mode.FULL_TRACE,
        seed: int = 0,
        key: tuple = (),
        threads: int | None = None,
    ) -> np.ndarray:
        """Values of ``reps`` independent estimates; repetition ``r`` uses ``stream(seed, *key, r)``."""
        self._check(l, m, mode)
        out = np.empty(reps)

        def run(r: int) -> None:
            out[r] = self._draw(l, m, mode, stream(seed, *key, r))[1]

        threads = resolve_threads(threads)
        if threads == 1:
            for r in range(reps):
                run(r)
        else:
            with ThreadPoolExecutor(threads) as pool:
                list(pool.map(run, range(reps)))
        return out

    def _shots(self, probs: np.ndarray, obs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
        """Empirical means of ``shots`` projective outcomes, one per row of ``probs``."""
        p = clean_probabilities(probs)
        cdf = padded_cdf(p, self.tables.n_groups[obs])
        counts = sampling.count_outcomes(rng, cdf, shots)
        return np.einsum("rg,rg->r", counts, self.tables.values[obs]) / shots


class ZeroFidelityEstimator(_Estimator):
    """Repeated 0-fidelity estimation for a fixed (target, actual) pair."""

    kind = Kind.ZERO_FIDELITY

    def __init__(
        self,
        lam: Channel,
        gam: Channel,
        basis: StateBasis | None = None,
        distribution: SettingDistribution | None = None,
    ):
        super().__init__(lam, gam, basis)
        if distribution is None:
            distribution = setting_distribution_zero(lam, self.basis)
        elif distribution.kind is not Kind.ZERO_FIDELITY or distribution.dim != self.dim:
            raise DimensionMismatch("precomputed distribution does not match this estimator")
        self.distribution = distribution
        self.exact = zero_fidelity(lam, gam, self.basis)
        self._outputs = apply_many(gam, self.basis.sic.states)
        obs = self.basis.pauli.observables
        dist = self.distribution
        numerator = gram(self._outputs, obs)[dist.state_index, dist.observable_index]
        self.tables = _Tables(numerator, *_observable_tables(obs))

    @cached_property
    def _probs(self) -> np.ndarray:
        return _outcome_probabilities(self._outputs, self.tables.projectors)

    def _bounds(self, l, m):
        return variance_bounds_zero(self.exact, self.dim, l, m)

    def _measured(self, picks, m, mode, rng):
        if mode is Mode.FULL_TRACE:
            return self.tables.numerator[picks]
        if mode is not Mode.PROJECTIVE:
            raise ValueError(f"0-fidelity estimation has no {mode.value} mode")
        i = self.distribution.state_index[picks]
        j = self.distribution.observable_index[picks]
        return self._shots(self._probs[i, j], j, m, rng)


def pauli_eigenstates(digits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Product eigenstates and eigenvalues of every normalized Pauli operator.

    Returns ``(vectors, eigenvalues)`` of shapes ``(N, d, d)`` (eigenvectors in
    rows) and ``(N, d)``. Identity factors use the computational basis.
    """
    single = []
    for a in range(4):
        vals, vecs = np.linalg.eigh(PAULIS[a])
        single.append((vals, vecs.T))
    n = digits.shape[1]
    d = 2**n
    vectors = np.empty((digits.shape[0], d, d), dtype=complex)
    eigvals = np.empty((digits.shape[0], d))
    for row, label in enumerate(digits):
        vec = np.ones((1, 1), dtype=complex)
        val = np.ones(1)
        for a in label:
            sv, sx = single[a]
            vec = np.einsum("ka,lb->klab", vec, sx).reshape(vec.shape[0] * 2, -1)
            val = np.outer(val, sv).reshape(-1)
        vectors[row] = vec
        eigvals[row] = val / np.sqrt(d)
    return vectors, eigvals


class ProcessFidelityEstimator(_Estimator):
    """Repeated process-fidelity estimation through eigenstate expansions of the inputs.

    In projective mode ``m`` is the total shot count per setting, split evenly
    over the ``d`` eigenstates of the sampled input operator.
    """

    kind = Kind.PROCESS_FIDELITY

    def __init__(self, lam: Channel, gam: Channel, basis: StateBasis | None = None):
        super().__init__(lam, gam, basis)
        pauli = self.basis.pauli
        self.distribution = setting_distribution_process(lam, pauli)
        self.exact = process_fidelity_exact(lam, gam)
        obs = pauli.observables
        self._vectors, self.eigenvalues = pauli_eigenstates(pauli.digits)
        dist = self.distribution
        numerator = gram(apply_many(gam, obs), obs)[dist.state_index, dist.observable_index]
        self.tables = _Tables(numerator, *_observable_tables(obs))

    @cached_property
    def _probs(self) -> np.ndarray:
        d, vectors = self.dim, self._vectors
        states = np.einsum("nka,nkb->nkab", vectors, vectors.conj()).reshape(-1, d, d)
        probs = _outcome_probabilities(apply_many(self.gam, states), self.tables.projectors)
        return probs.reshape(vectors.shape[0], d, probs.shape[1], -1)

    def _check(self, l, m, mode):
        m_eff = super()._check(l, m, mode)
        if mode is Mode.PROJECTIVE and m % self.dim:
            raise ShotsNotDivisible(f"m={m} is not a multiple of d={self.dim}")
        return m_eff

    def _bounds(self, l, m):
        return variance_bounds_process(self.exact, self.dim, l, m)

    def _measured(self, picks, m, mode, rng):
        if mode is Mode.FULL_TRACE:
            return self.tables.numerator[picks]
        i = self.distribution.state_index[picks]
        j = self.distribution.observable_index[picks]
        d = self.dim
        probs = self._probs[i, :, j]  # (l, d, G)
        lam_k = self.eigenvalues[i]  # (l, d)
        if mode is Mode.PROJECTIVE:
            obs = np.repeat(j, d)
            means = self._shots(probs.reshape(-1, probs.shape[-1]), obs, m // d, rng).reshape(-1, d)
            return np.einsum("lk,lk->l", lam_k, means)
        if mode is Mode.SHOT_BY_SHOT:
            # each shot picks one eigenstate uniformly and weights its outcome by d * lambda_k
            which = rng.integers(0, d, size=(picks.size, m))
            occupancy = np.stack([np.count_nonzero(which == k, axis=1) for k in range(d)], axis=1)
            out = np.empty(picks.size)
            for r in range(picks.size):
                p = clean_probabilities(probs[r])
                cdf = padded_cdf(p, np.full(d, self.tables.n_groups[j[r]]))
                total = 0.0
                for k in range(d):
                    if occupancy[r, k]:
                        counts = sampling.count_outcomes(rng, cdf[k : k + 1], occupancy[r, k])
                        total += d * lam_k[r, k] * float(counts[0] @ self.tables.values[j[r]])
                out[r] = total / m
            return out
        raise ValueError(f"unsupported mode {mode}")


def estimate_zero_fidelity(lam, gam, l, m=None, mode=Mode.FULL_TRACE, rng=None, basis=None) -> EstimateRecord:
    return ZeroFidelityEstimator(lam, gam, basis).estimate(l, m, mode, rng)


def estimate_process_fidelity(lam, gam, l, m=None, mode=Mode.FULL_TRACE, rng=None, basis=None) -> EstimateRecord:
    return ProcessFidelityEstimator(lam, gam, basis).estimate(l, m, mode, rng)


# ---------------------------------------------------------------- benchmark


@dataclass(frozen=True)
class BudgetRow:
    """One line of a projective budget schedule (shots per state for the process kind)."""

    budget: int
    zero_l: int
    zero_m: int
    process_l: int
    process_unique: int
    process_shots_per_state: int

    def validate(self, d: int) -> None:
        if min(self.zero_l, self.zero_m, self.process_l, self.process_shots_per_state) < 1:
            raise OutOfRange(f"nonpositive entry in {self}")
        if self.zero_l * self.zero_m != self.budget:
            raise OutOfRange(f"zero allocation {self.zero_l}x{self.zero_m} != budget {self.budget}")
        if self.process_unique != d * self.process_l:
            raise OutOfRange(f"process unique settings {self.process_unique} != d*l for d={d}")
        if self.process_l * d * self.process_shots_per_state != self.budget:
            raise OutOfRange(f"process allocation does not spend budget {self.budget}")

    @property
    def process_m(self) -> int:
        return self.process_unique // self.process_l * self.process_shots_per_state


def parse_schedule(text: str) -> list[BudgetRow]:
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 6:
            raise FixtureError(f"schedule line needs 6 integers: {line!r}")
        try:
            rows.append(BudgetRow(*(int(p) for p in parts)))
        except ValueError as exc:
            raise FixtureError(f"bad schedule line {line!r}") from exc
    if not rows:
        raise FixtureError("empty schedule")
    return rows


def default_schedule() -> list[BudgetRow]:
    from importlib import resources

    return parse_schedule(resources.files("fidelity_forge.fixtures").joinpath("table8.txt").read_text())


BENCHMARK_HEADER = "budget,kind,mode,l,m,unique_settings,empirical_std,bound_lo_std,bound_hi_std,reps,seed"


@dataclass(frozen=True)
class BenchmarkRow:
    budget: int
    kind: Kind
    mode: Mode
    l: int
    m: int
    unique_settings: int
    empirical_std: float
    bound_lo_std: float
    bound_hi_std: float
    reps: int
    seed: int

    @property
    def in_band(self) -> bool:
        return 0.5 * self.bound_lo_std <= self.empirical_std <= 1.5 * self.bound_hi_std

    def csv(self) -> str:
        return (
            f"{self.budget},{self.kind.value},{self.mode.value},{self.l},{self.m},{self.unique_settings},"
            f"{self.empirical_std:.10g},{self.bound_lo_std:.10g},{self.bound_hi_std:.10g},{self.reps},{self.seed}"
        )


def benchmark_estimators(
    lam: Channel,
    gam: Channel,
    schedule: list[BudgetRow],
    reps: int,
    seed: int,
    threads: int | None = None,
    max_unique: int = MAX_UNIQUE_SETTINGS,
) -> list[BenchmarkRow]:
    """Projective estimation of both kinds for every schedule row.

    Process-kind settings are capped so that ``d * l`` never exceeds
    ``max_unique`` unique experiments.
    """
    d = lam.dim
    zero = ZeroFidelityEstimator(lam, gam)
    proc = ProcessFidelityEstimator(lam, gam)
    out = []
    for r, row in enumerate(schedule):
        row.validate(d)
        l_proc = min(row.process_l, max_unique // d)
        runs = (
            (Kind.ZERO_FIDELITY, zero, row.zero_l, row.zero_m, row.zero_l, variance_bounds_zero, zero.exact),
            (Kind.PROCESS_FIDELITY, proc, l_proc, row.process_m, d * l_proc, variance_bounds_process, proc.exact),
        )
        for k, (kind, est, l, m, unique, bounds, exact) in enumerate(runs):
            values = est.sample(reps, l, m, Mode.PROJECTIVE, seed=seed, key=(r, k), threads=threads)
            lo, hi = bounds(exact, d, l, m)
            out.append(
                BenchmarkRow(
                    row.budget, kind, Mode.PROJECTIVE, l, m, unique,
                    float(np.std(values, ddof=1)), math.sqrt(lo), math.sqrt(hi), reps, seed,
                )
            )
    return out
