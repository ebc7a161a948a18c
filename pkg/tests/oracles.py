"""Independent reference values, written without importing the package.

Everything here is plain Python (plus NumPy's dense linear algebra for
matrix norms) so that a bug in the library cannot leak into its oracle.
"""
import math
from fractions import Fraction

import numpy as np


def tree_sum(xs):
    """Sum adjacent pairs level by level, carrying an odd tail unchanged."""
    xs = [float(x) for x in xs]
    if not xs:
        return 0.0
    while len(xs) > 1:
        nxt = [xs[i] + xs[i + 1] for i in range(0, len(xs) - 1, 2)]
        if len(xs) % 2:
            nxt.append(xs[-1])
        xs = nxt
    return xs[0]


def dyadic_hausdorff_sum(p=2, d=2, ks=range(-3, 4)):
    """sum_k 2^-|k| |det(2^k I_d)|^(-1/p), terms taken in increasing k."""
    terms = [2.0 ** -abs(k) * (2.0 ** (k * d)) ** (-1.0 / p) for k in sorted(ks)]
    return tree_sum(terms)


def dyadic_hausdorff_exact(p=2, d=2, ks=range(-3, 4)):
    """Same sum in rational arithmetic (valid when d*k/p is an integer for all k)."""
    total = Fraction(0)
    for k in ks:
        e = Fraction(k * d, p)
        assert e.denominator == 1
        total += Fraction(1, 2 ** abs(k)) * Fraction(2) ** (-int(e))
    return total


def cesaro_norm(p):
    return p / (p - 1.0)


def truncated_cesaro_value(eps, alpha=1.25):
    """int_eps^1 u^-alpha du for alpha != 1."""
    return (eps ** (1 - alpha) - 1.0) / (alpha - 1.0)


def norm_1(M):
    return float(np.abs(M).sum(axis=0).max())


def norm_inf(M):
    return float(np.abs(M).sum(axis=1).max())


def norm_2(M):
    return float(np.linalg.svd(M, compute_uv=False)[0])


def cyclic_matrix(n, multipliers, weights):
    """Brute-force matrix of f -> sum_k w_k f(k x mod n) (rows x, columns y)."""
    M = [[0.0] * n for _ in range(n)]
    for k, w in zip(multipliers, weights):
        for x in range(n):
            M[x][(k * x) % n] += w
    return M


def lp(vec, p, masses=None):
    masses = masses or [1.0] * len(vec)
    if math.isinf(p):
        return max(abs(v) for v, m in zip(vec, masses) if m > 0)
    return sum(m * abs(v) ** p for v, m in zip(vec, masses)) ** (1.0 / p)
