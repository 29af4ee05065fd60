# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_pykernels``; same contracts."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

cdef double TIE_EPS = 1e-12


cdef inline double _sqdist(const double[:, ::1] x, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    cdef Py_ssize_t k, d = x.shape[1], d4 = d - d % 4
    cdef double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0, t0, t1, t2, t3
    for k in range(0, d4, 4):
        t0 = x[a, k] - x[b, k]
        t1 = x[a, k + 1] - x[b, k + 1]
        t2 = x[a, k + 2] - x[b, k + 2]
        t3 = x[a, k + 3] - x[b, k + 3]
        s0 += t0 * t0
        s1 += t1 * t1
        s2 += t2 * t2
        s3 += t3 * t3
    for k in range(d4, d):
        t0 = x[a, k] - x[b, k]
        s0 += t0 * t0
    return (s0 + s1) + (s2 + s3)


cdef inline double _dot(const double[:, ::1] x, Py_ssize_t a, const double[:, ::1] y, Py_ssize_t b) noexcept nogil:
    # four independent accumulators break the add dependency chain
    cdef Py_ssize_t k, d = x.shape[1], d4 = d - d % 4
    cdef double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0
    for k in range(0, d4, 4):
        s0 += x[a, k] * y[b, k]
        s1 += x[a, k + 1] * y[b, k + 1]
        s2 += x[a, k + 2] * y[b, k + 2]
        s3 += x[a, k + 3] * y[b, k + 3]
    for k in range(d4, d):
        s0 += x[a, k] * y[b, k]
    return (s0 + s1) + (s2 + s3)


def minmax_greedy(const double[:, ::1] x, Py_ssize_t first, Py_ssize_t count):
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] picked_arr = np.empty(count, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] radii_arr = np.empty(count, dtype=np.float64)
    cdef double[::1] mind2 = np.empty(n, dtype=np.float64)
    cdef unsigned char[::1] free = np.ones(n, dtype=np.uint8)
    cdef cnp.int64_t[::1] picked = picked_arr
    cdef double[::1] radii = radii_arr
    cdef Py_ssize_t i, s, best
    cdef double d, best_d, rad
    with nogil:
        for i in range(n):
            mind2[i] = _sqdist(x, i, first)
        mind2[first] = 0.0
        free[first] = 0
        picked[0] = first
        for s in range(1, count):
            best = -1
            best_d = -1.0
            rad = 0.0
            for i in range(n):
                d = mind2[i]
                if d > rad:
                    rad = d
                if free[i] and d > best_d:
                    best_d = d
                    best = i
            radii[s - 1] = sqrt(rad)
            for i in range(n):
                if free[i] and mind2[i] >= best_d - TIE_EPS:
                    best = i
                    break
            picked[s] = best
            free[best] = 0
            for i in range(n):
                if free[i]:
                    d = _sqdist(x, i, best)
                    if d < mind2[i]:
                        mind2[i] = d
            mind2[best] = 0.0
        rad = 0.0
        for i in range(n):
            if mind2[i] > rad:
                rad = mind2[i]
        radii[count - 1] = sqrt(rad)
    return picked_arr, radii_arr


def adjacent_dedup(const double[:, ::1] x, double threshold):
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] stack = out
    cdef Py_ssize_t top = 0, i
    with nogil:
        for i in range(n):
            while top > 0 and _dot(x, stack[top - 1], x, i) > threshold:
                top -= 1
            stack[top] = i
            top += 1
    return out[:top].copy()


def capacity_evict(const double[:, ::1] x, Py_ssize_t capacity):
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    if capacity >= n:
        return np.arange(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] slot_arr = np.arange(capacity, dtype=np.int64)
    cdef cnp.int64_t[::1] slot_node = slot_arr
    # contiguous copy of the bank rows keeps the scan cache friendly
    cdef double[:, ::1] bank = np.array(x[:capacity], dtype=np.float64)
    cdef Py_ssize_t i, j, k, victim
    cdef double sim, best
    with nogil:
        for i in range(capacity, n):
            victim = 0
            best = _dot(bank, 0, x, i)
            for j in range(1, capacity):
                sim = _dot(bank, j, x, i)
                if sim > best or (sim == best and slot_node[j] < slot_node[victim]):
                    best = sim
                    victim = j
            slot_node[victim] = i
            for k in range(d):
                bank[victim, k] = x[i, k]
    return np.sort(slot_arr)
