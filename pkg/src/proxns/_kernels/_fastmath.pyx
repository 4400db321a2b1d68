# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels for the sampler inner loops.

Same call surface as ``_numpy_impl``; all arrays are C-contiguous
float64 / complex128.
"""

import numpy as np

from libc.math cimport fabs, sqrt


def soft_threshold_real(double[::1] v, double theta):
    cdef Py_ssize_t i, n = v.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double av
    for i in range(n):
        av = fabs(v[i])
        out[i] = 0.0 if av <= theta else v[i] * (av - theta) / av
    return out_arr


def soft_threshold_complex(double complex[::1] v, double theta):
    cdef Py_ssize_t i, n = v.shape[0]
    out_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef double av
    for i in range(n):
        av = sqrt(v[i].real * v[i].real + v[i].imag * v[i].imag)
        out[i] = 0.0 if av <= theta else v[i] * ((av - theta) / av)
    return out_arr


def lincomb3(double a, double[::1] x, double b, double[::1] p,
             double c, double[::1] q):
    cdef Py_ssize_t i, n = x.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        out[i] = a * x[i] + b * p[i] + c * q[i]
    return out_arr


def add_scaled(double[::1] x, double s, double[::1] w):
    cdef Py_ssize_t i, n = x.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        out[i] = x[i] + s * w[i]
    return out_arr


def ball_project_real(double[::1] z, double[::1] center, double radius):
    cdef Py_ssize_t i, n = z.shape[0]
    cdef double nrm = 0.0, d, scale
    for i in range(n):
        d = z[i] - center[i]
        nrm += d * d
    nrm = sqrt(nrm)
    if nrm <= radius:
        return np.asarray(z).copy()
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    scale = radius / nrm
    for i in range(n):
        out[i] = center[i] + (z[i] - center[i]) * scale
    return out_arr


def ball_project_complex(double complex[::1] z, double complex[::1] center,
                         double radius):
    cdef Py_ssize_t i, n = z.shape[0]
    cdef double nrm = 0.0, scale
    cdef double complex d
    for i in range(n):
        d = z[i] - center[i]
        nrm += d.real * d.real + d.imag * d.imag
    nrm = sqrt(nrm)
    if nrm <= radius:
        return np.asarray(z).copy()
    out_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    scale = radius / nrm
    for i in range(n):
        out[i] = center[i] + (z[i] - center[i]) * scale
    return out_arr


def dwt1_level(double[::1] x, double[::1] h, double[::1] g):
    cdef Py_ssize_t n = x.shape[0], L = h.shape[0]
    cdef Py_ssize_t half = n // 2, k, i, j
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double sa, sd
    for k in range(half):
        sa = 0.0
        sd = 0.0
        for i in range(L):
            j = 2 * k + i
            while j >= n:
                j -= n
            sa += h[i] * x[j]
            sd += g[i] * x[j]
        out[k] = sa
        out[half + k] = sd
    return out_arr


def idwt1_level(double[::1] c, double[::1] h, double[::1] g):
    cdef Py_ssize_t n = c.shape[0], L = h.shape[0]
    cdef Py_ssize_t half = n // 2, k, i, j
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double av, dv
    for k in range(half):
        av = c[k]
        dv = c[half + k]
        for i in range(L):
            j = 2 * k + i
            while j >= n:
                j -= n
            out[j] += av * h[i] + dv * g[i]
    return out_arr


def dwt2_level(double[:, ::1] a2, double[::1] h, double[::1] g):
    cdef Py_ssize_t m = a2.shape[0], n = a2.shape[1], L = h.shape[0]
    cdef Py_ssize_t halfm = m // 2, halfn = n // 2
    cdef Py_ssize_t r, cc, k, i, j
    cdef double sa, sd, hv, gv
    rows_arr = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] rows = rows_arr
    for r in range(m):
        for k in range(halfn):
            sa = 0.0
            sd = 0.0
            for i in range(L):
                j = 2 * k + i
                while j >= n:
                    j -= n
                sa += h[i] * a2[r, j]
                sd += g[i] * a2[r, j]
            rows[r, k] = sa
            rows[r, halfn + k] = sd
    out_arr = np.zeros((m, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for k in range(halfm):
        for i in range(L):
            j = 2 * k + i
            while j >= m:
                j -= m
            hv = h[i]
            gv = g[i]
            for cc in range(n):
                out[k, cc] += hv * rows[j, cc]
                out[halfm + k, cc] += gv * rows[j, cc]
    return out_arr


def idwt2_level(double[:, ::1] c2, double[::1] h, double[::1] g):
    cdef Py_ssize_t m = c2.shape[0], n = c2.shape[1], L = h.shape[0]
    cdef Py_ssize_t halfm = m // 2, halfn = n // 2
    cdef Py_ssize_t r, cc, k, i, j
    cdef double av, dv, hv, gv
    mid_arr = np.zeros((m, n), dtype=np.float64)
    cdef double[:, ::1] mid = mid_arr
    for k in range(halfm):
        for i in range(L):
            j = 2 * k + i
            while j >= m:
                j -= m
            hv = h[i]
            gv = g[i]
            for cc in range(n):
                mid[j, cc] += hv * c2[k, cc] + gv * c2[halfm + k, cc]
    out_arr = np.zeros((m, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for r in range(m):
        for k in range(halfn):
            av = mid[r, k]
            dv = mid[r, halfn + k]
            for i in range(L):
                j = 2 * k + i
                while j >= n:
                    j -= n
                out[r, j] += av * h[i] + dv * g[i]
    return out_arr
