"""Bayesian optimization of the dressed three-qubit CNOT on the simulated backend.

The objective is a sampled 0-fidelity estimate against the ideal CNOT(0 -> 2).
The surrogate is a Gaussian process with a squared-exponential kernel and one
lengthscale per parameter; its hyperparameters come from a fixed log-grid
search of the marginal likelihood. Expected improvement is maximized over a
quasi-random candidate set.

Random streams (see :func:`estimation.stream`): probe ``k`` uses
``(seed, 0, k)``, the objective at iteration ``t`` uses ``(seed, 1, t)`` and the
candidate set at iteration ``t`` uses ``(seed, 2, t)``.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.stats import norm, qmc

from .channels import (
    Channel,
    NoiseConfig,
    cnot_matrix,
    compose,
    noisy_backend,
    parameterised_cnot_spec,
    reduce_kraus,
    unitary_channel,
)
from .errors import IllConditionedKernel, OutOfRange, WrongParameterCount
from .estimation import Mode, ZeroFidelityEstimator, setting_distribution_zero, stream
from .fidelity import process_fidelity_exact

N_PARAMS = 18
N_CANDIDATES = 2048
JITTERS = (0.0, 1e-10, 1e-8, 1e-6, 1e-4)
LENGTHSCALE_GRID = np.geomspace(0.05, 20.0, 14)
SIGNAL_GRID = (0.25, 1.0, 4.0)
NOISE_GRID = (1e-4, 1e-3, 1e-2, 0.05, 0.2)
# half-widths of the local candidate boxes, as fractions of each parameter range
LOCAL_SCALES = (0.05, 0.015)


@dataclass(frozen=True)
class OptimizationConfig:
    iterations: int = 140
    l: int = 160
    m: int = 2048
    mode: Mode = Mode.PROJECTIVE
    initial_probes: int = 20
    bounds: np.ndarray = field(default_factory=lambda: np.tile([-np.pi, np.pi], (N_PARAMS, 1)))
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    seed: int = 0

    def __post_init__(self):
        b = np.array(self.bounds, dtype=float).reshape(-1, 2)
        if b.shape[0] != N_PARAMS:
            raise WrongParameterCount(f"need {N_PARAMS} bound pairs, got {b.shape[0]}")
        if not np.all(b[:, 0] < b[:, 1]):
            raise OutOfRange("every lower bound must be below its upper bound")
        b.setflags(write=False)
        object.__setattr__(self, "bounds", b)
        if self.initial_probes < 1 or self.iterations < self.initial_probes:
            raise OutOfRange("need 1 <= initial_probes <= iterations")
        if self.l < 1 or (self.mode is Mode.PROJECTIVE and self.m < 1):
            raise OutOfRange("estimator needs l >= 1 and m >= 1")
        if self.mode not in (Mode.FULL_TRACE, Mode.PROJECTIVE):
            raise OutOfRange(f"unsupported estimator mode {self.mode}")


PRESETS = {
    "paper": OptimizationConfig(),
    "desk": OptimizationConfig(iterations=60, mode=Mode.FULL_TRACE, initial_probes=10),
}


def preset(name: str, **overrides) -> OptimizationConfig:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return replace(PRESETS[name], **overrides)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    params: np.ndarray
    estimate: float
    timestamp: float  # seconds since the run started; not part of the CSV


@dataclass(frozen=True)
class OptimizationTrace:
    records: tuple
    best_params: np.ndarray
    best_estimate: float
    exact_single: float
    exact_triple: float
    baseline_single: float  # all-zero parameters
    baseline_triple: float

    @property
    def best_index(self) -> int:
        return int(np.argmax([r.estimate for r in self.records]))

    def csv_lines(self) -> list[str]:
        header = "iteration," + ",".join(f"param_{k}" for k in range(N_PARAMS)) + ",estimate,is_best"
        best = self.best_index
        lines = [header]
        for k, r in enumerate(self.records):
            cells = [str(r.iteration)] + [repr(float(x)) for x in r.params] + [repr(r.estimate), str(int(k == best))]
            lines.append(",".join(cells))
        lines.append(
            f"# summary best_estimate={self.best_estimate!r} exact_single={self.exact_single!r} "
            f"exact_triple={self.exact_triple!r} baseline_single={self.baseline_single!r} "
            f"baseline_triple={self.baseline_triple!r}"
        )
        return lines


def ideal_cnot() -> Channel:
    return unitary_channel(cnot_matrix(0, 2, 3))


def device_channel(params, noise: NoiseConfig) -> Channel:
    return noisy_backend(parameterised_cnot_spec(params), noise)


def exact_fidelities(params, noise: NoiseConfig) -> tuple[float, float]:
    """Exact process fidelity of one and of three back-to-back applications."""
    ch = device_channel(params, noise)
    triple = reduce_kraus(compose(ch, reduce_kraus(compose(ch, ch))))
    target = ideal_cnot()
    return process_fidelity_exact(target, ch), process_fidelity_exact(target, triple)


class Objective:
    """Noisy 0-fidelity estimate of the device channel; caches the target distribution."""

    def __init__(self, cfg: OptimizationConfig):
        self.cfg = cfg
        self.target = ideal_cnot()
        self.distribution = setting_distribution_zero(self.target)

    def noise_variance(self, values: np.ndarray) -> np.ndarray:
        """Upper variance bound of each estimate, with the estimate standing in for F0."""
        f0 = np.clip(values, 0.0, 1.0)
        m = self.cfg.m if self.cfg.mode is Mode.PROJECTIVE else math.inf
        return (1.0 + self.target.dim / m - f0**2) / self.cfg.l + 1e-6

    def __call__(self, params, rng: np.random.Generator) -> float:
        p = np.asarray(params, dtype=float)
        b = self.cfg.bounds
        if p.shape != (N_PARAMS,) or np.any(p < b[:, 0]) or np.any(p > b[:, 1]):
            raise OutOfRange("parameters outside the configured bounds")
        est = ZeroFidelityEstimator(
            self.target, device_channel(p, self.cfg.noise), distribution=self.distribution
        )
        m = self.cfg.m if self.cfg.mode is Mode.PROJECTIVE else None
        return est.estimate(self.cfg.l, m, self.cfg.mode, rng).value


def objective(params, cfg: OptimizationConfig, rng: np.random.Generator) -> float:
    return Objective(cfg)(params, rng)


# ---------------------------------------------------------------- surrogate


def _sq_dists(a: np.ndarray, b: np.ndarray, lengthscales: np.ndarray) -> np.ndarray:
    a = a / lengthscales
    b = b / lengthscales
    return np.maximum(np.sum(a**2, 1)[:, None] + np.sum(b**2, 1)[None, :] - 2.0 * a @ b.T, 0.0)


def _cholesky(k: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.mean(np.diag(k))))
    for jitter in JITTERS:
        try:
            return np.linalg.cholesky(k + jitter * scale * np.eye(k.shape[0]))
        except np.linalg.LinAlgError:
            continue
    raise IllConditionedKernel("kernel matrix not positive definite after jitter 1e-4")


@dataclass(frozen=True)
class Surrogate:
    """Gaussian process posterior on standardized observations."""

    x: np.ndarray
    y: np.ndarray
    lengthscales: np.ndarray
    signal_variance: float
    noise_variance: np.ndarray | float
    y_mean: float
    y_scale: float
    chol: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    log_likelihood: float = 0.0

    @property
    def flat(self) -> bool:
        """True when all observations coincide and the surrogate carries no ranking."""
        return bool(np.ptp(self.y) == 0.0)

    def predict(self, xq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and variance in the original units."""
        kq = self.signal_variance * np.exp(-0.5 * _sq_dists(np.atleast_2d(xq), self.x, self.lengthscales))
        mean = kq @ self.alpha
        v = solve_triangular(self.chol, kq.T, lower=True)
        var = np.maximum(self.signal_variance - np.sum(v**2, axis=0), 0.0)
        return self.y_mean + self.y_scale * mean, self.y_scale**2 * var


def _log_likelihood(d2: np.ndarray, z: np.ndarray, signal: float, noise):
    k = signal * np.exp(-0.5 * d2) + np.diag(np.broadcast_to(noise, z.shape))
    try:
        chol = np.linalg.cholesky(k)
    except np.linalg.LinAlgError:
        return -np.inf
    alpha = cho_solve((chol, True), z)
    return float(-0.5 * z @ alpha - np.sum(np.log(np.diag(chol))) - 0.5 * z.size * math.log(2 * math.pi))


def fit_surrogate(x, y, noise_var=None) -> Surrogate:
    """Fit hyperparameters by grid search of the marginal likelihood.

    An isotropic pass over lengthscale, signal and noise grids is followed by
    one coordinate sweep over the per-dimension lengthscales.

    Args:
        x: ``(N, D)`` observed points.
        y: ``(N,)`` observed values.
        noise_var: Optional known per-observation noise variances in the units
            of ``y``. When given, the noise grid is skipped.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size < 2 or x.shape[0] != y.size:
        raise OutOfRange("need at least two paired observations")
    y_mean = float(y.mean())
    y_scale = float(y.std()) or 1.0
    z = (y - y_mean) / y_scale
    ones = np.ones(x.shape[1])
    noise_z = None
    if noise_var is not None:
        noise_z = np.broadcast_to(np.asarray(noise_var, dtype=float), y.shape) / y_scale**2
    noise_grid = NOISE_GRID if noise_var is None else NOISE_GRID[:1]

    best = (-np.inf, None)
    for ls in LENGTHSCALE_GRID:
        d2 = _sq_dists(x, x, ls * ones)
        for s in SIGNAL_GRID:
            for nv in noise_grid:
                ll = _log_likelihood(d2, z, s, nv if noise_var is None else noise_z)
                if ll > best[0]:
                    best = (ll, (ls * ones, s, nv if noise_z is None else noise_z))
    if best[1] is None:
        raise IllConditionedKernel("no grid point gives a positive-definite kernel")
    ll_best, (lengthscales, signal, noise) = best

    # per-dimension squared distances, rescaled as lengthscales change
    per_dim = (x[:, None, :] - x[None, :, :]) ** 2
    for dim in range(x.shape[1]):
        base = per_dim / lengthscales**2
        rest = base.sum(-1) - base[..., dim]
        for ls in LENGTHSCALE_GRID:
            d2 = rest + per_dim[..., dim] / ls**2
            ll = _log_likelihood(d2, z, signal, noise)
            if ll > ll_best:
                ll_best = ll
                lengthscales = lengthscales.copy()
                lengthscales[dim] = ls

    k = signal * np.exp(-0.5 * _sq_dists(x, x, lengthscales)) + np.diag(np.broadcast_to(noise, y.shape))
    chol = _cholesky(k)
    alpha = cho_solve((chol, True), z)
    return Surrogate(x, z, lengthscales, signal, noise, y_mean, y_scale, chol, alpha, ll_best)


def expected_improvement(mean: np.ndarray, var: np.ndarray, best: float) -> np.ndarray:
    sd = np.sqrt(var)
    gain = mean - best
    with np.errstate(divide="ignore", invalid="ignore"):
        zscore = np.where(sd > 0, gain / sd, 0.0)
    ei = gain * norm.cdf(zscore) + sd * norm.pdf(zscore)
    return np.where(sd > 0, ei, np.maximum(gain, 0.0))


def candidates(bounds: np.ndarray, rng: np.random.Generator, center=None, n: int = N_CANDIDATES) -> np.ndarray:
    """Scrambled Sobol points inside ``bounds``.

    With ``center`` given, only the first quarter spans the whole box; the
    rest is split over boxes around ``center`` whose half-widths are the
    ``LOCAL_SCALES`` fractions of each range, clipped to the bounds.
    """
    lo, hi = bounds[:, 0], bounds[:, 1]
    dim = bounds.shape[0]
    if center is None:
        return lo + (hi - lo) * _sobol(dim, rng, n)
    n_global = n // 4
    pts = [lo + (hi - lo) * _sobol(dim, rng, n_global)]
    sizes = np.diff(np.linspace(n_global, n, len(LOCAL_SCALES) + 1).astype(int))
    for frac, size in zip(LOCAL_SCALES, sizes):
        half = frac * (hi - lo)
        box_lo = np.maximum(center - half, lo)
        box_hi = np.minimum(center + half, hi)
        pts.append(box_lo + (box_hi - box_lo) * _sobol(dim, rng, size))
    return np.vstack(pts)


def _sobol(dim: int, rng: np.random.Generator, n: int) -> np.ndarray:
    # block sizes need not be powers of two; the balance warning is expected
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return qmc.Sobol(dim, scramble=True, seed=rng).random(n)


def acquire(surrogate: Surrogate, bounds: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Maximize expected improvement over the candidate set; lowest index wins ties.

    The incumbent is the observed point with the highest posterior mean, which
    is less fooled by a lucky noisy draw than the raw maximum. Candidates
    concentrate around it.
    """
    mean_obs, _ = surrogate.predict(surrogate.x)
    incumbent = int(np.argmax(mean_obs))
    if surrogate.flat:
        return candidates(bounds, rng)[0]
    cand = candidates(bounds, rng, surrogate.x[incumbent])
    mean, var = surrogate.predict(cand)
    return cand[int(np.argmax(expected_improvement(mean, var, float(mean_obs[incumbent]))))]


def run_optimization(cfg: OptimizationConfig, progress=None) -> OptimizationTrace:
    """Probe, then run the BO loop for the remaining iterations.

    The first probe is the all-zero parameter vector (the undressed gate);
    the remaining probes are uniform in the bounds.
    """
    obj = Objective(cfg)
    b = cfg.bounds
    start = time.perf_counter()
    xs, ys, records = [], [], []
    zero = np.clip(np.zeros(N_PARAMS), b[:, 0], b[:, 1])
    for t in range(cfg.iterations):
        if t == 0:
            x = zero
        elif t < cfg.initial_probes:
            x = stream(cfg.seed, 0, t).uniform(b[:, 0], b[:, 1])
        else:
            surrogate = fit_surrogate(np.array(xs), np.array(ys), obj.noise_variance(np.array(ys)))
            x = acquire(surrogate, b, stream(cfg.seed, 2, t))
        y = obj(x, stream(cfg.seed, 1, t))
        xs.append(x)
        ys.append(y)
        records.append(IterationRecord(t, x, y, time.perf_counter() - start))
        if progress is not None:
            progress(t, y)
    best = int(np.argmax(ys))
    f1, f3 = exact_fidelities(xs[best], cfg.noise)
    z1, z3 = exact_fidelities(zero, cfg.noise)
    return OptimizationTrace(tuple(records), xs[best], float(ys[best]), f1, f3, z1, z3)
