"""Pure-Python/NumPy versions of the hot kernels.

These mirror ``_speedups.pyx`` operation for operation.  ``pairwise_sum``
is bit-identical between the two; ``ascent_qp`` agrees to rounding only,
because NumPy matrix-vector products use BLAS summation order.
"""
import math

import numpy as np


def pairwise_sum(values):
    """Sum with a fixed ascending tree: adjacent pairs per level, odd tail carried."""
    a = np.array(values, dtype=np.float64, copy=True).ravel()
    n = a.shape[0]
    if n == 0:
        return 0.0
    while n > 1:
        half = n // 2
        a[:half] = a[0:2 * half:2] + a[1:2 * half:2]
        if n % 2:
            a[half] = a[n - 1]
            n = half + 1
        else:
            n = half
    return float(a[0])


def vector_norm(y, p):
    ay = np.abs(y)
    big = ay.max() if ay.size else 0.0
    if big == 0.0:
        return 0.0
    if math.isinf(p):
        return float(big)
    if p == 1.0:
        return float(ay.sum())
    return float(big * np.sum((ay / big) ** p) ** (1.0 / p))


def _norm_gradient(y, p):
    ay = np.abs(y)
    if math.isinf(p):
        s = np.zeros_like(y)
        i = int(np.argmax(ay))
        s[i] = 1.0 if y[i] >= 0 else -1.0
        return s
    if p == 1.0:
        return np.sign(y)
    big = ay.max()
    if big == 0.0:
        return np.zeros_like(y)
    return np.sign(y) * (ay / big) ** (p - 1.0)


def _dual_direction(g, q):
    ag = np.abs(g)
    d = np.zeros_like(g)
    big = ag.max() if ag.size else 0.0
    if big == 0.0:
        return d
    if q == 1.0:
        j = int(np.argmax(ag))
        d[j] = 1.0 if g[j] >= 0 else -1.0
        return d
    if math.isinf(q):
        return np.where(g >= 0, 1.0, -1.0)
    d = np.sign(g) * (ag / big) ** (1.0 / (q - 1.0))
    return d / vector_norm(d, q)


def ascent_qp(M, p, q, f0, max_iter=1000, tol=1e-9, max_halvings=30):
    """Monotone ascent of ``|M f|_p`` on the unit sphere of ``|.|_q``.

    Each step moves toward the maximiser of the linearised objective over
    the q-ball, with a backtracking line search halving from 1.0.
    Returns ``(value, f)``; the value is always attained by ``f``.
    """
    M = np.ascontiguousarray(M, dtype=np.float64)
    f = np.array(f0, dtype=np.float64, copy=True)
    nf = vector_norm(f, q)
    if nf == 0.0:
        return 0.0, f
    f /= nf
    F = vector_norm(M @ f, p)
    for _ in range(max_iter):
        y = M @ f
        g = M.T @ _norm_gradient(y, p)
        d = _dual_direction(g, q)
        t = 1.0
        improved = False
        for _ in range(max_halvings):
            c = f + t * (d - f)
            nc = vector_norm(c, q)
            if nc > 0.0:
                c = c / nc
                Fc = vector_norm(M @ c, p)
                if Fc > F:
                    improved = True
                    break
            t *= 0.5
        if not improved:
            break
        rel = (Fc - F) / Fc
        f, F = c, Fc
        if rel < tol:
            break
    return F, f


def pairwise_sum_rows(values):
    """Row-wise ``pairwise_sum`` along the last axis (same tree per row)."""
    a = np.array(values, dtype=np.float64, copy=True)
    n = a.shape[-1]
    if n == 0:
        return np.zeros(a.shape[:-1])
    while n > 1:
        half = n // 2
        a[..., :half] = a[..., 0:2 * half:2] + a[..., 1:2 * half:2]
        if n % 2:
            a[..., half] = a[..., n - 1]
            n = half + 1
        else:
            n = half
    return a[..., 0].copy()
