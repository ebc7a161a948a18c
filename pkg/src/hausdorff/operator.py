"""Evaluation of ``(H f)(x) = int_Omega Phi(u, x) f(A(u)(x)) dmu(u)``.

Functions on S' are plain vectorised callables, optionally wrapped in
:class:`SupportedFunction` to declare a support outside which they vanish.
A declared support lets dilation families restrict the u-integral to the
parameters that actually see the support, which keeps jumps at the support
edge out of the quadrature panels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._backend import pairwise_sum_rows
from .errors import NonFiniteSample, NotFiniteDiscrete, OutOfCarrier
from .kernel import Exponents, Kernel
from .maps import MapFamily
from .measure import _EPS, Interval, MeasureSpace, QuadratureSpec, _check_tolerance

__all__ = ["SupportedFunction", "OperatorInstance", "apply", "apply_grid", "to_matrix",
           "weighted_matrix"]


class SupportedFunction:
    """A callable that is zero outside ``support`` (an interval ``(lo, hi)`` or a box)."""

    def __init__(self, fn: Callable, support=None, description: str = ""):
        self.fn = fn
        self.support = None if support is None else (np.asarray(support[0], dtype=float),
                                                     np.asarray(support[1], dtype=float))
        self.description = description

    def inside(self, y):
        if self.support is None:
            return np.ones(np.shape(y)[: np.ndim(y) - (self.support_dim > 1)], dtype=bool)
        lo, hi = self.support
        y = np.asarray(y, dtype=float)
        if lo.ndim == 0:
            return (y >= lo) & (y <= hi)
        return np.all((y >= lo) & (y <= hi), axis=-1)

    @property
    def support_dim(self):
        return 1 if self.support is None or self.support[0].ndim == 0 else self.support[0].size

    def __call__(self, y):
        if self.support is None:
            return self.fn(y)
        y = np.asarray(y)
        mask = self.inside(y)
        out = np.zeros(mask.shape, dtype=float)
        if np.any(mask):
            vals = np.asarray(self.fn(y[mask]))
            if np.iscomplexobj(vals):
                out = out.astype(complex)
            out[mask] = vals
        return out

    def __repr__(self):
        return f"SupportedFunction({self.description or self.fn!r}, support={self.support})"


@dataclass(frozen=True)
class OperatorInstance:
    """The bundle ``(Omega, mu)``, ``(S', nu')``, ``(S, nu)``, ``A``, ``Phi``, ``(p, q)``.

    The operator maps functions on ``source`` (S') to functions on
    ``target`` (S), so the family must go from ``target`` to ``source``.
    """

    omega: MeasureSpace
    source: MeasureSpace
    target: MeasureSpace
    family: MapFamily
    kernel: Kernel
    exponents: Exponents

    def __post_init__(self):
        if self.family.domain_space != self.target:
            raise ValueError("family.domain_space must be the target space S")
        if self.family.codomain_space != self.source:
            raise ValueError("family.codomain_space must be the source space S'")
        if not isinstance(self.exponents, Exponents):
            object.__setattr__(self, "exponents", Exponents(*self.exponents))
        self.kernel.validate(_probe(self.omega), _probe(self.target))

    @property
    def finite_discrete(self):
        return self.omega.is_discrete and self.source.is_discrete and self.target.is_discrete


def _probe(space, k=7):
    if space.is_discrete:
        pts = space.points()
        if len(pts) <= 64:
            return pts
        return pts[np.linspace(0, len(pts) - 1, k).astype(int)]
    nodes, _ = space.rule(QuadratureSpec(node_budget=32, truncation=(1e-3, 1e3)))
    return nodes[np.linspace(0, len(nodes) - 1, k).astype(int)]


def _as_function(f):
    return f if isinstance(f, SupportedFunction) else SupportedFunction(f)


def _eval_terms(op, f, U, X):
    """``Phi(U, X) * f(A(U) X)`` with U shaped (Nx, Nu) and X (Nx, 1[, d])."""
    Y = op.family.apply(U, X)
    if not np.all(op.source.contains(Y)):
        raise OutOfCarrier(
            "A(u)(x) leaves the source carrier; enlarge the carrier or declare f = 0 outside"
        )
    phi = np.asarray(op.kernel.evaluate(U, X), dtype=float)
    fv = np.asarray(f(Y))
    terms = phi * fv
    if not np.all(np.isfinite(terms)):
        raise NonFiniteSample("kernel or f is not finite at a quadrature node")
    return np.broadcast_to(terms, U.shape)


def _row_sum(terms, w):
    if np.iscomplexobj(terms):
        return pairwise_sum_rows(terms.real * w) + 1j * pairwise_sum_rows(terms.imag * w)
    return pairwise_sum_rows(terms * w)


def _omega_bounds(op):
    c = op.omega.carrier
    return (c.lo, c.hi) if isinstance(c, Interval) else (None, None)


def _windows(op, f, X):
    """Per-x parameter windows ``[a, b]`` from the declared support, or None."""
    if f.support is None or f.support[0].ndim != 0 or X.ndim != 1:
        return None
    lo, hi = _omega_bounds(op)
    if lo is None:
        return None
    win = op.family.parameter_window(X, float(f.support[0]), float(f.support[1]))
    if win is None:
        return None
    a = np.maximum(np.nan_to_num(win[0], nan=lo), lo)
    b = np.minimum(np.nan_to_num(win[1], nan=hi), hi)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        return None
    return a, b


def _continuous_values(op, f, X, quad, budget):
    lo, hi = _omega_bounds(op)
    win = _windows(op, f, X)
    if win is not None:
        t, tw = MeasureSpace.interval(0.0, 1.0).rule(quad, budget=budget)
        a, b = win
        span = np.clip(b - a, 0.0, None)
        U = a[:, None] + span[:, None] * t[None, :]
        W = span[:, None] * tw[None, :]
    else:
        u, w = op.omega.rule(quad, budget=budget)
        U = np.broadcast_to(u, (len(X),) + u.shape)
        W = np.broadcast_to(w, (len(X),) + w.shape)
    Xb = X[:, None] if X.ndim == 1 else X[:, None, :]
    if U.ndim == 3:  # vector parameters are not supported
        raise ValueError("continuous Omega must be an interval")
    terms = _eval_terms(op, f, U, Xb)
    vals = _row_sum(terms, W)
    scale = pairwise_sum_rows(np.abs(terms) * np.abs(W))
    return vals, scale


_CHUNK = 1 << 21


def apply_grid(op: OperatorInstance, f, grid, quad: Optional[QuadratureSpec] = None,
               full_output: bool = False, strict: bool = True):
    """``(H f)(x)`` for every ``x`` in ``grid`` (deterministic order).

    Discrete Omega gives exact finite sums.  Continuous Omega is integrated
    at two budgets; the difference is the per-point error estimate and must
    meet ``quad.target_rel_tol`` when ``strict``.
    """
    quad = quad or QuadratureSpec()
    f = _as_function(f)
    X = np.asarray(grid)
    if X.size == 0:
        empty = np.zeros(0)
        return (empty, empty) if full_output else empty
    if X.ndim == 0:
        X = X[None]
    if op.omega.is_discrete:
        u = op.omega.points()
        w = op.omega.point_masses()
        if len(u) == 0:
            vals = np.zeros(len(X))
            return (vals, np.zeros(len(X))) if full_output else vals
        U = np.broadcast_to(u, (len(X), len(u)))
        Xb = X[:, None] if X.ndim == 1 else X[:, None, :]
        vals = _row_sum(_eval_terms(op, f, U, Xb), w)
        return (vals, np.zeros(len(X))) if full_output else vals

    full = quad.budget_for(op.omega.carrier)
    half = max(quad.gauss_order, full // 2)
    rows = max(1, _CHUNK // full)
    out = []
    errs = []
    for i in range(0, len(X), rows):
        Xi = X[i:i + rows]
        v1, scale = _continuous_values(op, f, Xi, quad, full)
        v2, _ = _continuous_values(op, f, Xi, quad, half)
        diff = np.abs(v1 - v2)
        floor = 64 * _EPS * scale
        if strict:
            bad = (diff > quad.target_rel_tol * np.abs(v1)) & (diff > floor)
            if np.any(bad):
                j = int(np.argmax(bad))
                _check_tolerance(v1[j], diff[j], floor[j], quad, f"apply at x={Xi[j]!r}")
        out.append(v1)
        errs.append(np.maximum(diff, floor))
    vals = np.concatenate(out)
    return (vals, np.concatenate(errs)) if full_output else vals


def apply(op: OperatorInstance, f, x, quad: Optional[QuadratureSpec] = None,
          full_output: bool = False, strict: bool = True):
    """``(H f)(x)`` at a single point of the target carrier."""
    x = np.asarray(x)
    grid = x[None] if x.ndim <= 1 and (x.ndim == 0 or op.target.dim > 1) else x
    vals, errs = apply_grid(op, f, grid, quad, full_output=True, strict=strict)
    v = vals[0]
    v = complex(v) if np.iscomplexobj(vals) else float(v)
    return (v, float(errs[0])) if full_output else v


def to_matrix(op: OperatorInstance) -> np.ndarray:
    """Matrix ``M[x, x'] = sum_{u: A(u)x = x'} Phi(u, x) mu({u})`` in carrier order."""
    if not op.finite_discrete:
        raise NotFiniteDiscrete("to_matrix needs finite discrete Omega, S and S'")
    xs = op.target.points()
    nrow, ncol = len(op.target.carrier), len(op.source.carrier)
    M = np.zeros((nrow, ncol))
    rows = np.arange(nrow)
    us = op.omega.points()
    mus = op.omega.point_masses()
    for u, mu in zip(us.tolist(), mus.tolist()):
        ys = op.family.apply(u, xs)
        cols = np.asarray(op.source.carrier.index_of(ys))
        phi = np.broadcast_to(op.kernel.grid(np.array([u]), xs)[0], (nrow,))
        np.add.at(M, (rows, cols), phi * mu)
    return M


def weighted_matrix(op: OperatorInstance, M: Optional[np.ndarray] = None) -> np.ndarray:
    """Matrix whose counting-measure ``q -> p`` norm equals the ``L^q(nu') -> L^p(nu)`` norm.

    ``diag(nu^{1/p}) M diag(nu'^{-1/q})`` with ``1/inf = 0``.
    """
    M = to_matrix(op) if M is None else M
    p, q = op.exponents.pf, op.exponents.qf
    wt = op.target.point_masses()
    ws = op.source.point_masses()
    left = np.ones_like(wt) if math.isinf(p) else wt ** (1.0 / p)
    right = np.ones_like(ws) if math.isinf(q) else ws ** (-1.0 / q)
    return left[:, None] * M * right[None, :]
