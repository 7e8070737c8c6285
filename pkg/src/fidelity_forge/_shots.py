"""Pure numpy implementation of the shot-sampling core."""
from __future__ import annotations

import numpy as np

# uniforms materialized at once; keeps memory near 32 MB
_CHUNK = 1 << 22


def count_outcomes(bit_generator: np.random.BitGenerator, cdf: np.ndarray, shots: int) -> np.ndarray:
    """Histogram ``shots`` inverse-CDF draws for every row of ``cdf``.

    Consumes the bit generator exactly like ``Generator.random((rows, shots))``.
    """
    cdf = np.ascontiguousarray(cdf, dtype=float)
    rows, width = cdf.shape
    counts = np.zeros((rows, width), dtype=np.int64)
    if rows == 0 or shots == 0:
        return counts
    gen = np.random.Generator(bit_generator)
    step = max(1, _CHUNK // shots)
    for start in range(0, rows, step):
        block = cdf[start : start + step]
        u = gen.random((block.shape[0], shots))
        outcome = np.zeros(u.shape, dtype=np.int64)
        for k in range(width - 1):
            outcome += u >= block[:, k : k + 1]
        for k in range(width):
            counts[start : start + step, k] = np.count_nonzero(outcome == k, axis=1)
    return counts
