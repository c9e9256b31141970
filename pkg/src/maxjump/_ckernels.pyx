# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Signatures mirror :mod:`maxjump._pykernels`."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


def sample_chain(const double[:, ::1] cum, const double[::1] uniforms, Py_ssize_t y0):
    cdef Py_ssize_t horizon = uniforms.shape[0]
    cdef Py_ssize_t m = cum.shape[1]
    cdef Py_ssize_t k, j, y = y0
    cdef double u
    out = np.empty(horizon + 1, dtype=np.int64)
    cdef long long[::1] modes = out
    modes[0] = y
    for k in range(horizon):
        u = uniforms[k]
        j = 0
        while j < m - 1 and u >= cum[y, j]:
            j += 1
        y = j
        modes[k + 1] = y
    return out


def propagate(const double[:, :, ::1] A, const long long[:, ::1] modes,
              const double[:, ::1] x0, drive, bint maxplus):
    cdef Py_ssize_t npaths = modes.shape[0]
    cdef Py_ssize_t horizon = modes.shape[1] - 1
    cdef Py_ssize_t n = A.shape[1]
    cdef Py_ssize_t p, k, r, s, y
    cdef double best, v
    cdef bint has_drive = drive is not None
    cdef const double[:, :, ::1] d
    if has_drive:
        d = drive
    out = np.empty((npaths, horizon + 1, n), dtype=np.float64)
    cdef double[:, :, ::1] x = out
    for p in range(npaths):
        for r in range(n):
            x[p, 0, r] = x0[p, r]
        for k in range(horizon):
            y = modes[p, k]
            for r in range(n):
                best = -INFINITY if maxplus else 0.0
                for s in range(n):
                    if maxplus:
                        v = A[y, r, s] + x[p, k, s]
                    else:
                        v = A[y, r, s] * x[p, k, s]
                    if v > best:
                        best = v
                if has_drive and d[p, k, r] > best:
                    best = d[p, k, r]
                x[p, k + 1, r] = best
    return out


cdef double _descend(const double[:, :, ::1] A, const double[:, ::1] c,
                     const double[:, ::1] P, double[:, ::1] work,
                     Py_ssize_t depth, Py_ssize_t k0, Py_ssize_t last, double prob) nogil:
    cdef Py_ssize_t m = A.shape[0]
    cdef Py_ssize_t n = A.shape[1]
    cdef Py_ssize_t j, r, s
    cdef double total = 0.0, best, v, cj
    for j in range(m):
        cj = c[last, j]
        if cj == 0.0:
            continue
        if depth == k0:
            best = 0.0
            for r in range(n):
                v = P[j, r] * work[depth, r]
                if v > best:
                    best = v
            total += prob * cj * best
        else:
            for r in range(n):
                best = 0.0
                for s in range(n):
                    v = A[j, r, s] * work[depth, s]
                    if v > best:
                        best = v
                work[depth + 1, r] = best
            total += _descend(A, c, P, work, depth + 1, k0, j, prob * cj)
    return total


def kstep_deltas(const double[:, :, ::1] A, const double[:, ::1] c,
                 const double[:, ::1] P, Py_ssize_t k0):
    cdef Py_ssize_t m = A.shape[0]
    cdef Py_ssize_t n = A.shape[1]
    cdef Py_ssize_t i, r, s
    cdef double best, v
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] deltas = out
    cdef double[:, ::1] work = np.empty((k0 + 1, n), dtype=np.float64)
    for i in range(m):
        for r in range(n):
            best = 0.0
            for s in range(n):
                v = A[i, r, s] / P[i, s]
                if v > best:
                    best = v
            work[1, r] = best
        deltas[i] = _descend(A, c, P, work, 1, k0, i, 1.0)
    return out
