"""Dense complex-matrix kernel.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. Every
function here is pure and never mutates its inputs.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotHermitian

HERMITIAN_TOL = 1e-9


class HermEigen(NamedTuple):
    """Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(mats) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def _scale(a: np.ndarray) -> float:
    return max(1.0, float(np.linalg.norm(a)))


def is_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        return False
    return float(np.linalg.norm(h - h.conj().T)) <= tol * _scale(h)


def _fix_phases(vecs: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    # first component above tol made real-positive, column by column
    vecs = vecs.copy()
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        nz = np.flatnonzero(np.abs(col) > tol)
        if nz.size:
            first = col[nz[0]]
            vecs[:, k] = col * (abs(first) / first)
    return vecs


def herm_eig(h: np.ndarray) -> HermEigen:
    """Eigendecomposition of a Hermitian matrix.

    Eigenvalues come back ascending. Each eigenvector is rotated so that its
    first non-negligible component is real and positive, which makes the
    output deterministic for non-degenerate spectra.

    Raises:
        NotHermitian: if ``h`` is not square or ``||h - h^dag||_F`` exceeds
            ``1e-9 * max(1, ||h||_F)``.
        NoConvergence: if the LAPACK driver fails to converge.
    """
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    hs = 0.5 * (h + h.conj().T)
    try:
        vals, vecs = np.linalg.eigh(hs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NoConvergence(str(exc)) from exc
    return HermEigen(vals, _fix_phases(vecs))


def expm_minus_i(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """Return ``exp(-i t h)`` for Hermitian ``h`` via its eigendecomposition."""
    vals, vecs = herm_eig(h)
    return (vecs * np.exp(-1j * t * vals)) @ vecs.conj().T


def frob_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """``sum_ij conj(a_ij) b_ij``; equals ``tr[a b]`` when ``a`` is Hermitian."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return complex(np.vdot(a, b))


def dagger(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).conj().T


def is_unitary(u: np.ndarray, tol: float = 1e-8) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    err = np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]))
    return float(err) <= tol * _scale(u)


def random_hermitian_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (a + a.conj().T)
