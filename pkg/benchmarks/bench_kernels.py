"""Compare the compiled and numpy shot-sampling backends.

Run with ``python3 benchmarks/bench_kernels.py``. Prints one row per problem
size with the best-of-N wall time per shot for each backend, and checks that
both backends return identical counts from the same seed.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from fidelity_forge.estimation import padded_cdf
from fidelity_forge.sampling import BACKENDS, count_outcomes

SIZES = ((64, 8, 1024), (336, 8, 336), (1024, 8, 4096), (112, 32, 16384))


def random_table(rows: int, outcomes: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(outcomes), size=rows)
    return padded_cdf(p)


def best_time(backend: str, cdf: np.ndarray, shots: int, repeat: int) -> tuple[float, np.ndarray]:
    best, counts = np.inf, None
    for _ in range(repeat):
        rng = np.random.default_rng(1234)
        t0 = time.perf_counter()
        counts = count_outcomes(rng, cdf, shots, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, counts


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    names = [b for b in ("python", "compiled") if b in BACKENDS]
    print("rows  outcomes  shots  " + "  ".join(f"{n:>12s} ns/shot" for n in names) + "  speedup  identical")
    for rows, outcomes, shots in SIZES:
        cdf = random_table(rows, outcomes, seed=rows)
        results = {n: best_time(n, cdf, shots, args.repeat) for n in names}
        per_shot = {n: 1e9 * t / (rows * shots) for n, (t, _) in results.items()}
        speedup = per_shot["python"] / per_shot["compiled"] if "compiled" in names else float("nan")
        same = all(np.array_equal(results[n][1], results["python"][1]) for n in names)
        cells = "  ".join(f"{per_shot[n]:20.2f}" for n in names)
        print(f"{rows:4d}  {outcomes:8d}  {shots:5d}  {cells}  {speedup:7.2f}  {same}")


if __name__ == "__main__":
    main()
