# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled reservoir overlap kernel; see ``_fallback.bath_spectrum``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, sqrt, M_PI

cnp.import_array()

# exp(-x) underflows to exactly 0.0 in double precision beyond this
DEF GAUSS_UNDERFLOW = 746.0


def bath_spectrum(double[::1] energies, double[::1] sigma, double[:, ::1] r2,
                  double[::1] offsets, bint gaussian, double width, double cutoff):
    cdef Py_ssize_t n = energies.shape[0]
    cdef Py_ssize_t m_count = offsets.shape[0]
    cdef Py_ssize_t m, i, j
    cdef double acc, x, dE, si, w2 = 2.0 * width * width
    cdef double gnorm = 1.0 / (width * sqrt(2.0 * M_PI))
    cdef double lnorm = width / M_PI
    out = np.zeros(m_count, dtype=np.float64)
    cdef double[::1] res = out
    for m in range(m_count):
        acc = 0.0
        for i in range(n):
            si = sigma[i]
            if si == 0.0:
                continue
            for j in range(n):
                if r2[j, i] == 0.0:
                    continue
                dE = energies[j] - energies[i]
                if fabs(dE) > cutoff:
                    continue
                x = offsets[m] - dE
                if gaussian:
                    x = x * x / w2
                    if x > GAUSS_UNDERFLOW:
                        continue
                    acc += si * r2[j, i] * gnorm * exp(-x)
                else:
                    acc += si * r2[j, i] * lnorm / (x * x + width * width)
        res[m] = acc
    return out
