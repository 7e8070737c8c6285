# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled shot-sampling core.

Draws uniforms straight from a numpy ``BitGenerator`` in the same order as
``Generator.random((rows, shots))`` so results match the numpy fallback
bit for bit.
"""
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from numpy.random cimport bitgen_t

import numpy as np


def count_outcomes(object bit_generator, const double[:, ::1] cdf, Py_ssize_t shots):
    """Histogram ``shots`` inverse-CDF draws for every row of ``cdf``.

    Each row must be nondecreasing and end in ``+inf``. Returns int64 counts
    with the same shape as ``cdf``.
    """
    cdef Py_ssize_t rows = cdf.shape[0], width = cdf.shape[1]
    cdef Py_ssize_t r, s, j, k, last = width - 1
    cdef double u
    cdef bitgen_t *rng
    out = np.zeros((rows, width), dtype=np.int64)
    cdef long long[:, ::1] counts = out
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("not a numpy BitGenerator")
    rng = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
    with bit_generator.lock, nogil:
        for r in range(rows):
            for s in range(shots):
                u = rng.next_double(rng.state)
                # branchless scan: outcomes are close to coin flips
                k = 0
                for j in range(last):
                    k += u >= cdf[r, j]
                counts[r, k] += 1
    return out
