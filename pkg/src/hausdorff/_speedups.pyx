# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_fallback.py`` for the reference semantics."""
import numpy as np

from libc.math cimport fabs, pow, INFINITY, isinf


def pairwise_sum(values):
    cdef double[::1] a = np.array(values, dtype=np.float64, copy=True).ravel()
    cdef Py_ssize_t n = a.shape[0], half, i
    if n == 0:
        return 0.0
    while n > 1:
        half = n // 2
        for i in range(half):
            a[i] = a[2 * i] + a[2 * i + 1]
        if n % 2:
            a[half] = a[n - 1]
            n = half + 1
        else:
            n = half
    return a[0]


cdef double _norm(double[::1] y, double p) noexcept nogil:
    cdef Py_ssize_t i, n = y.shape[0]
    cdef double big = 0.0, s = 0.0, v
    for i in range(n):
        v = fabs(y[i])
        if v > big:
            big = v
    if big == 0.0:
        return 0.0
    if isinf(p):
        return big
    if p == 1.0:
        for i in range(n):
            s += fabs(y[i])
        return s
    for i in range(n):
        s += pow(fabs(y[i]) / big, p)
    return big * pow(s, 1.0 / p)


cdef void _matvec(double[:, ::1] M, double[::1] f, double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double s
    for i in range(M.shape[0]):
        s = 0.0
        for j in range(M.shape[1]):
            s += M[i, j] * f[j]
        out[i] = s


cdef inline double _sign(double v) noexcept nogil:
    if v > 0.0:
        return 1.0
    if v < 0.0:
        return -1.0
    return 0.0


cdef void _norm_gradient(double[::1] y, double p, double[::1] s) noexcept nogil:
    cdef Py_ssize_t i, n = y.shape[0], imax = 0
    cdef double big = 0.0, v
    for i in range(n):
        v = fabs(y[i])
        if v > big:
            big = v
            imax = i
    if isinf(p):
        for i in range(n):
            s[i] = 0.0
        if n > 0:
            s[imax] = 1.0 if y[imax] >= 0 else -1.0
        return
    if p == 1.0:
        for i in range(n):
            s[i] = _sign(y[i])
        return
    for i in range(n):
        if big == 0.0:
            s[i] = 0.0
        else:
            s[i] = _sign(y[i]) * pow(fabs(y[i]) / big, p - 1.0)


cdef void _dual_direction(double[::1] g, double q, double[::1] d) noexcept nogil:
    cdef Py_ssize_t i, n = g.shape[0], imax = 0
    cdef double big = 0.0, v, nd
    for i in range(n):
        d[i] = 0.0
        v = fabs(g[i])
        if v > big:
            big = v
            imax = i
    if big == 0.0:
        return
    if q == 1.0:
        d[imax] = 1.0 if g[imax] >= 0 else -1.0
        return
    if isinf(q):
        for i in range(n):
            d[i] = 1.0 if g[i] >= 0 else -1.0
        return
    for i in range(n):
        d[i] = _sign(g[i]) * pow(fabs(g[i]) / big, 1.0 / (q - 1.0))
    nd = _norm(d, q)
    for i in range(n):
        d[i] /= nd


def ascent_qp(M, double p, double q, f0, int max_iter=1000, double tol=1e-9,
              int max_halvings=30):
    cdef double[:, ::1] A = np.ascontiguousarray(M, dtype=np.float64)
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1], i, j
    f_arr = np.array(f0, dtype=np.float64, copy=True)
    c_arr = np.empty(n)
    cdef double[::1] f = f_arr
    cdef double[::1] c = c_arr
    cdef double[::1] d = np.empty(n)
    cdef double[::1] g = np.empty(n)
    cdef double[::1] y = np.empty(m)
    cdef double[::1] s = np.empty(m)
    cdef double nf, F, Fc = 0.0, t, nc, rel, acc
    cdef int it, h
    cdef bint improved
    with nogil:
        nf = _norm(f, q)
        if nf == 0.0:
            F = 0.0
        else:
            for j in range(n):
                f[j] /= nf
            _matvec(A, f, y)
            F = _norm(y, p)
            for it in range(max_iter):
                _matvec(A, f, y)
                _norm_gradient(y, p, s)
                for j in range(n):
                    acc = 0.0
                    for i in range(m):
                        acc += A[i, j] * s[i]
                    g[j] = acc
                _dual_direction(g, q, d)
                t = 1.0
                improved = False
                for h in range(max_halvings):
                    for j in range(n):
                        c[j] = f[j] + t * (d[j] - f[j])
                    nc = _norm(c, q)
                    if nc > 0.0:
                        for j in range(n):
                            c[j] /= nc
                        _matvec(A, c, y)
                        Fc = _norm(y, p)
                        if Fc > F:
                            improved = True
                            break
                    t *= 0.5
                if not improved:
                    break
                rel = (Fc - F) / Fc
                for j in range(n):
                    f[j] = c[j]
                F = Fc
                if rel < tol:
                    break
    return F, f_arr
