# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled float64 kernels for the three-point stencil update.

Both kernels evaluate ``p*u[s+1] + (1-2p)*u[s] + p*u[s-1]`` in exactly that
order so results agree bit for bit with :mod:`mesoheat._kernels_py`.
"""
import numpy as np


def ring_evolve(const double[::1] u, double p, Py_ssize_t steps):
    cdef Py_ssize_t m = u.shape[0]
    cdef Py_ssize_t r, s
    cdef double c = 1.0 - 2.0 * p
    a_arr = np.array(u, dtype=np.float64)
    b_arr = np.empty(m, dtype=np.float64)
    if steps == 0 or m == 0:
        return a_arr
    cdef double[::1] av = a_arr
    cdef double[::1] bv = b_arr
    cdef double* a = &av[0]
    cdef double* b = &bv[0]
    cdef double* tmp
    with nogil:
        for r in range(steps):
            b[0] = p * a[1] + c * a[0] + p * a[m - 1]
            for s in range(1, m - 1):
                b[s] = p * a[s + 1] + c * a[s] + p * a[s - 1]
            b[m - 1] = p * a[0] + c * a[m - 1] + p * a[m - 2]
            tmp = a
            a = b
            b = tmp
    return a_arr if steps % 2 == 0 else b_arr


def line_evolve(const double[::1] u, double p, Py_ssize_t steps):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t total = n + 2 * steps
    cdef Py_ssize_t r, j, lo, hi
    cdef double c = 1.0 - 2.0 * p
    # one guard cell on each side so the stencil never reads out of bounds
    a_arr = np.zeros(total + 2, dtype=np.float64)
    b_arr = np.zeros(total + 2, dtype=np.float64)
    cdef double[::1] av = a_arr
    cdef double[::1] bv = b_arr
    cdef double* a = &av[0]
    cdef double* b = &bv[0]
    cdef double* tmp
    for j in range(n):
        a[steps + 1 + j] = u[j]
    lo = steps + 1
    hi = steps + 1 + n
    with nogil:
        for r in range(steps):
            lo -= 1
            hi += 1
            for j in range(lo, hi):
                b[j] = p * a[j + 1] + c * a[j] + p * a[j - 1]
            tmp = a
            a = b
            b = tmp
    out = a_arr if steps % 2 == 0 else b_arr
    return out[1:total + 1].copy()
