import numpy as np
import pytest

from fidelity_forge import channels as ch
from fidelity_forge import optimize as opt
from fidelity_forge.errors import IllConditionedKernel, OutOfRange, WrongParameterCount
from fidelity_forge.estimation import Mode


def test_config_validation():
    with pytest.raises(OutOfRange):
        opt.OptimizationConfig(iterations=5, initial_probes=10)
    with pytest.raises(OutOfRange):
        opt.OptimizationConfig(bounds=np.tile([1.0, -1.0], (18, 1)))
    with pytest.raises(WrongParameterCount):
        opt.OptimizationConfig(bounds=np.tile([-1.0, 1.0], (17, 1)))
    assert opt.preset("paper").iterations == 140
    desk = opt.preset("desk", seed=4)
    assert (desk.iterations, desk.mode, desk.seed) == (60, Mode.FULL_TRACE, 4)
    with pytest.raises(KeyError):
        opt.preset("nope")


def test_objective_examples():
    zero = np.zeros(18)
    clean = opt.preset("desk", noise=ch.NoiseConfig.none())
    assert opt.objective(zero, clean, np.random.default_rng(0)) == pytest.approx(1.0, abs=1e-12)
    noisy = opt.preset("paper")
    value = opt.objective(zero, noisy, np.random.default_rng(1))
    assert 0.4 < value < 0.95
    assert value < opt.objective(zero, opt.preset("paper", noise=ch.NoiseConfig.none()), np.random.default_rng(1))
    again = opt.objective(zero, noisy, np.random.default_rng(1))
    assert again == value
    with pytest.raises(OutOfRange):
        opt.objective(np.full(18, 4.0), noisy, np.random.default_rng(0))


def test_flat_surrogate_returns_first_candidate():
    bounds = np.tile([-1.0, 1.0], (3, 1))
    x = np.random.default_rng(0).uniform(-1, 1, size=(6, 3))
    s = opt.fit_surrogate(x, np.full(6, 0.5))
    assert s.flat
    first = opt.candidates(bounds, np.random.default_rng(7))[0]
    assert np.array_equal(opt.acquire(s, bounds, np.random.default_rng(7)), first)


def test_posterior_interpolates_observations():
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, size=(12, 2))
    y = np.sin(3 * x[:, 0]) + x[:, 1] ** 2
    s = opt.fit_surrogate(x, y, noise_var=1e-6)
    mean, var = s.predict(x)
    assert np.all(var >= 0)
    assert np.max(np.abs(mean - y)) < 5 * np.sqrt(1e-6) + 1e-3
    _, var_q = s.predict(rng.uniform(-1, 1, size=(50, 2)))
    assert np.all(var_q >= 0)


def test_bo_finds_quadratic_maximum():
    bounds = np.array([[-2.0, 2.0]])
    f = lambda x: -((x - 0.7) ** 2)  # noqa: E731
    rng = np.random.default_rng(3)
    xs = list(rng.uniform(-2, 2, size=(4, 1)))
    ys = [float(f(x[0])) for x in xs]
    for t in range(26):
        s = opt.fit_surrogate(np.array(xs), np.array(ys), noise_var=1e-8)
        x = opt.acquire(s, bounds, np.random.default_rng(100 + t))
        assert bounds[0, 0] <= x[0] <= bounds[0, 1]
        xs.append(x)
        ys.append(float(f(x[0])))
    grid = np.linspace(-2, 2, 100001)
    assert abs(xs[int(np.argmax(ys))][0] - grid[np.argmax(f(grid))]) < 0.05


def test_expected_improvement_properties():
    mean = np.array([0.0, 1.0, 1.0, 2.0])
    var = np.array([1.0, 1.0, 0.0, 0.0])
    ei = opt.expected_improvement(mean, var, 1.0)
    assert np.all(ei >= 0)
    assert ei[1] > ei[0] and ei[2] == 0 and ei[3] == 1.0


def test_candidates_inside_bounds():
    bounds = np.tile([-np.pi, np.pi], (18, 1))
    rng = np.random.default_rng(0)
    pts = opt.candidates(bounds, rng, center=np.full(18, 3.1))
    assert pts.shape == (opt.N_CANDIDATES, 18)
    assert np.all(pts >= bounds[:, 0]) and np.all(pts <= bounds[:, 1])


def test_cholesky_escalation():
    with pytest.raises(IllConditionedKernel):
        opt._cholesky(-np.eye(3))
    near_singular = np.ones((4, 4))
    assert np.all(np.isfinite(opt._cholesky(near_singular)))


@pytest.mark.parametrize("seed", range(4))
def test_run_optimization_zero_noise_reaches_ideal(seed):
    cfg = opt.preset("desk", noise=ch.NoiseConfig.none(), seed=seed)
    trace = opt.run_optimization(cfg)
    assert trace.exact_single >= 0.999


def test_trace_invariants_and_reproducibility():
    cfg = opt.preset("desk", iterations=14, initial_probes=4, seed=2)
    a = opt.run_optimization(cfg)
    b = opt.run_optimization(cfg)
    assert len(a.records) == 14
    assert a.best_estimate == max(r.estimate for r in a.records)
    assert np.array_equal(a.records[0].params, np.zeros(18))
    for r in a.records:
        assert np.all(r.params >= cfg.bounds[:, 0]) and np.all(r.params <= cfg.bounds[:, 1])
    assert a.csv_lines() == b.csv_lines()
    assert a.exact_triple >= a.baseline_triple - 1e-12 or a.best_index == 0
    lines = a.csv_lines()
    assert lines[0].split(",")[0] == "iteration" and lines[0].endswith("estimate,is_best")
    assert sum(line.endswith(",1") for line in lines[1:-1]) == 1
    assert lines[-1].startswith("# summary")


def test_csv_round_trip():
    trace = opt.run_optimization(opt.preset("desk", iterations=5, initial_probes=5, seed=3))
    lines = trace.csv_lines()
    for line, rec in zip(lines[1:-1], trace.records):
        cells = line.split(",")
        assert int(cells[0]) == rec.iteration
        assert np.array_equal(np.array(cells[1:19], dtype=float), rec.params)
        assert float(cells[19]) == rec.estimate
