"""Backend selection for projective shot sampling.

The compiled core is used when it was built; otherwise the numpy fallback
takes over. Set ``FIDELITY_FORGE_BACKEND=python`` to force the fallback.
Both backends consume random numbers identically, so counts agree exactly.
"""
from __future__ import annotations

import os

import numpy as np

from . import _shots

try:
    from . import _kernels
except ImportError:  # extension not built
    _kernels = None

BACKENDS = {"python": _shots.count_outcomes}
if _kernels is not None:
    BACKENDS["compiled"] = _kernels.count_outcomes

_requested = os.environ.get("FIDELITY_FORGE_BACKEND", "").strip().lower()
if _requested and _requested not in ("python", "compiled"):
    raise ImportError(f"unknown FIDELITY_FORGE_BACKEND {_requested!r}")
BACKEND = _requested or ("compiled" if "compiled" in BACKENDS else "python")
if BACKEND not in BACKENDS:
    raise ImportError("compiled backend requested but the extension is not built")


def count_outcomes(rng: np.random.Generator, cdf: np.ndarray, shots: int, backend: str | None = None) -> np.ndarray:
    """Outcome counts for ``shots`` draws per row of a padded CDF table.

    Args:
        rng: Generator whose bit stream is consumed.
        cdf: ``(rows, k)`` cumulative probabilities; the last usable entry
            of each row and any padding must be ``+inf``.
        shots: Draws per row.
        backend: ``"compiled"`` or ``"python"``; defaults to the active one.
    """
    fn = BACKENDS[backend or BACKEND]
    cdf = np.ascontiguousarray(cdf, dtype=float)
    if cdf.ndim != 2:
        raise ValueError("cdf must be two-dimensional")
    return fn(rng.bit_generator, cdf, int(shots))
