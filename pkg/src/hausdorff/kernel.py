"""Kernels, exponent pairs and the mixed norms that bound the operator.

For exponents ``p <= q`` let ``r = q / (q - p)`` (``r = inf`` when
``p = q``, ``r = 1`` when ``q = inf``).  The bound on the L^q -> L^p norm
is the mixed norm

    (a) q finite, q > p   int_Omega |Phi(u, .)|_{L^{pr}(nu)} m(u)^{-1/q} dmu(u)
    (b) q = inf > p       int_Omega |Phi(u, .)|_{L^p(nu)} dmu(u)
    (c) p = q = inf       ess sup_x int_Omega |Phi(u, x)| dmu(u)
    (d) p = q < inf       int_Omega |Phi(u, .)|_{L^inf(nu)} m(u)^{-1/p} dmu(u)

Exponents are held as exact fractions so the conjugacy identities hold
without rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

from ._backend import pairwise_sum_rows
from .errors import Divergent, InadmissibleExponents, ToleranceNotMet
from .measure import (
    Interval, MeasureSpace, QuadratureSpec, _EPS, _check_tolerance, weighted_sum,
)

__all__ = [
    "Exponents", "Kernel", "conjugacy_r", "mixed_norm", "one_var_norm",
    "REGIME_Q_GT_P", "REGIME_Q_INF", "REGIME_INF_INF", "REGIME_P_EQ_Q",
]

INF = math.inf
ExtReal = Union[Fraction, float]

REGIME_Q_GT_P = "q>p"
REGIME_Q_INF = "q=inf>p"
REGIME_INF_INF = "p=q=inf"
REGIME_P_EQ_Q = "p=q<inf"


def ext_real(v) -> ExtReal:
    """Parse an extended real: ``inf``/``"inf"`` or an exact Fraction."""
    if isinstance(v, str):
        s = v.strip()
        if s == "inf":
            return INF
        return Fraction(s)
    if isinstance(v, Fraction):
        return v
    v = float(v)
    if math.isinf(v):
        if v < 0:
            raise ValueError("-inf is not an admissible exponent")
        return INF
    if math.isnan(v):
        raise ValueError("exponent is NaN")
    return Fraction(v)


def recip(v: ExtReal) -> ExtReal:
    return Fraction(0) if v == INF else 1 / v


def fmt_ext(v: ExtReal) -> str:
    if v == INF:
        return "inf"
    if v.denominator == 1:
        return str(v.numerator)
    return repr(float(v)) if Fraction(float(v)) == v else str(v)


@dataclass(frozen=True)
class Exponents:
    """An admissible pair: ``inf > q >= p >= 1``, ``q = inf > p >= 1`` or ``p = q = inf``."""

    p: ExtReal
    q: ExtReal

    def __post_init__(self):
        p, q = ext_real(self.p), ext_real(self.q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        ok = (q != INF and p != INF and q >= p >= 1) or (q == INF and p != INF and p >= 1) \
            or (p == INF and q == INF)
        if not ok:
            raise InadmissibleExponents(
                f"(p, q) = ({fmt_ext(p)}, {fmt_ext(q)}) is not admissible: need "
                "inf > q >= p >= 1, or q = inf > p >= 1, or p = q = inf"
            )

    @property
    def pf(self) -> float:
        return float(self.p)

    @property
    def qf(self) -> float:
        return float(self.q)

    @property
    def regime(self) -> str:
        if self.q == INF:
            return REGIME_INF_INF if self.p == INF else REGIME_Q_INF
        return REGIME_P_EQ_Q if self.p == self.q else REGIME_Q_GT_P

    def __str__(self):
        return f"(p={fmt_ext(self.p)}, q={fmt_ext(self.q)})"


def conjugacy_r(e: Exponents):
    """Return ``(r, r')`` with ``1/r + 1/r' = 1`` (exact; ``inf`` where due).

    ``q = inf`` gives ``r = 1`` (this override also covers ``p = q = inf``),
    ``p = q`` finite gives ``r = inf``, otherwise ``r = q / (q - p)``.
    """
    p, q = e.p, e.q
    if q == INF:
        r = Fraction(1)
    elif p == q:
        r = INF
    else:
        r = q / (q - p)
    if r == INF:
        r_prime = Fraction(1)
    elif r == 1:
        r_prime = INF
    else:
        r_prime = r / (r - 1)
    return r, r_prime


class Kernel:
    """``Phi(u, x)`` as a vectorised callable.

    ``evaluate(u, x)`` receives broadcast-compatible arrays: ``u`` of shape
    ``(Nu, 1)`` and ``x`` of shape ``(1, Nx)`` (or ``(1, Nx, d)`` for
    vector points) and returns something broadcastable to ``(Nu, Nx)``.
    """

    def __init__(self, evaluate: Callable, one_variable: bool = False,
                 nonnegative: bool = False, description: str = "", probe=None):
        self.evaluate = evaluate
        self.one_variable = bool(one_variable)
        self.nonnegative = bool(nonnegative)
        self.description = description
        if probe is not None:
            self.validate(*probe)

    @classmethod
    def one_var(cls, phi: Callable, nonnegative=False, description=""):
        return cls(lambda u, x: phi(u), one_variable=True, nonnegative=nonnegative,
                   description=description)

    @classmethod
    def constant(cls, c: float):
        c = float(c)
        return cls(lambda u, x: np.full(np.shape(u), c), one_variable=True,
                   nonnegative=c >= 0, description=f"{c!r}")

    @classmethod
    def weights(cls, omega: MeasureSpace, values, description=""):
        """One-variable kernel given by its values at the points of a discrete Omega."""
        vals = np.asarray(values, dtype=float)
        if vals.shape != (len(omega.carrier),):
            raise ValueError("one weight per point of Omega")

        def phi(u):
            return vals[omega.carrier.index_of(u)]

        return cls.one_var(phi, nonnegative=bool(np.all(vals >= 0)),
                           description=description or f"weights {vals.tolist()}")

    @classmethod
    def table(cls, omega: MeasureSpace, target: MeasureSpace, values, description=""):
        """Two-variable kernel on finite discrete spaces from a ``(|Omega|, |S|)`` table."""
        tab = np.asarray(values, dtype=float)
        if tab.shape != (len(omega.carrier), len(target.carrier)):
            raise ValueError(f"table must have shape {(len(omega.carrier), len(target.carrier))}")

        def ev(u, x):
            return tab[omega.carrier.index_of(u), target.carrier.index_of(x)]

        return cls(ev, one_variable=False, nonnegative=bool(np.all(tab >= 0)),
                   description=description or "table")

    def __call__(self, u, x):
        return self.evaluate(u, x)

    def grid(self, u, x):
        """Values on the product grid ``u x x`` as an ``(len(u), len(x))`` array."""
        u = np.asarray(u)
        x = np.asarray(x)
        uu = u[:, None]
        xx = x[None, :] if x.ndim == 1 else x[None, :, :]
        out = np.asarray(self.evaluate(uu, xx), dtype=float)
        return np.broadcast_to(out, (len(u), len(x)))

    def scaled(self, c: float):
        c = float(c)
        ev = self.evaluate
        return Kernel(lambda u, x: c * np.asarray(ev(u, x), dtype=float),
                      self.one_variable, self.nonnegative and c >= 0,
                      f"{c!r}*({self.description})")

    def validate(self, u_samples, x_samples):
        """Spot-check the declared flags on a probe grid; raise ValueError on failure."""
        vals = self.grid(np.asarray(u_samples), np.asarray(x_samples))
        if self.nonnegative and np.any(vals < 0):
            raise ValueError(f"kernel {self.description!r} declared nonnegative but is negative")
        if self.one_variable and vals.shape[1] > 1 and np.any(vals != vals[:, :1]):
            raise ValueError(f"kernel {self.description!r} declared one-variable but depends on x")

    def __repr__(self):
        return f"Kernel({self.description!r}, one_variable={self.one_variable})"


# --------------------------------------------------------------------------
# mixed norms

def _factor_fn(m):
    if m is None:
        return lambda u: np.ones(np.shape(u))
    if hasattr(m, "agreement_factor"):
        fam = m

        def fn(u):
            u = np.asarray(u)
            if fam.finite_discrete:
                return np.array([fam.agreement_factor(v) for v in u.tolist()], dtype=float)
            return np.asarray(fam.agreement_factor(u), dtype=float)
        return fn
    if callable(m):
        return lambda u: np.broadcast_to(np.asarray(m(u), dtype=float), np.shape(u))
    c = float(m)
    return lambda u: np.full(np.shape(u), c)


def _m_power(mvals, expo):
    """``m ** (-1/expo)`` with ``m^{-1/inf} = 1``."""
    if expo == INF:
        return np.ones_like(mvals)
    return mvals ** (-1.0 / float(expo))


def _budget(space, quad, scale):
    full = quad.budget_for(space.carrier)
    return full if scale == 1 else max(quad.gauss_order, full // 2)


def _rows_norm(vals, w, s):
    """Row-wise L^s norms of ``|vals|`` against weights ``w`` (s may be inf)."""
    a = np.abs(vals)
    big = a.max(axis=1) if a.shape[1] else np.zeros(a.shape[0])
    if s == INF:
        return big
    out = np.zeros(a.shape[0])
    nz = big > 0
    if np.any(nz):
        scaled = (a[nz] / big[nz, None]) ** float(s)
        out[nz] = big[nz] * pairwise_sum_rows(scaled * w) ** (1.0 / float(s))
    return out


_CHUNK = 1 << 22


def _inner_norms(kernel, u_nodes, s_space, quad, scale, expo):
    """``|Phi(u, .)|_{L^expo(nu)}`` for each outer node."""
    x_nodes, x_w = s_space.rule(quad, budget=_budget(s_space, quad, scale))
    rows = max(1, _CHUNK // max(1, len(x_nodes)))
    out = np.empty(len(u_nodes))
    for i in range(0, len(u_nodes), rows):
        vals = kernel.grid(u_nodes[i:i + rows], x_nodes)
        out[i:i + rows] = _rows_norm(vals, x_w, expo)
    return out


def _one_var_inner(kernel, u_nodes, s_space, expo):
    phi = np.abs(np.asarray(kernel.grid(u_nodes, _probe_point(s_space)))[:, 0])
    if expo == INF:
        return phi
    mass = s_space.total_mass()
    if math.isinf(mass):
        return np.where(phi == 0, 0.0, np.inf)
    return phi * mass ** (1.0 / float(expo))


def _probe_point(space):
    if space.is_discrete:
        return space.points()[:1]
    c = space.carrier
    if isinstance(c, Interval):
        lo = c.lo if math.isfinite(c.lo) else (c.hi - 1 if math.isfinite(c.hi) else 0.0)
        hi = c.hi if math.isfinite(c.hi) else lo + 2
        return np.array([0.5 * (lo + hi)])
    lo = np.where(np.isfinite(c.lo), c.lo, 0.0)
    hi = np.where(np.isfinite(c.hi), c.hi, lo + 2)
    return (0.5 * (lo + hi))[None, :]


def _divergence_sequence(omega, quad, outer_value):
    """Values of the outer integral on truncations shrinking toward the singular end(s)."""
    c = omega.carrier
    values = []
    for j in range(1, 5):
        if isinstance(c, Interval) and c.bounded:
            L = c.hi - c.lo
            delta = L * 10.0 ** (-2 * j)
            lo, hi = c.lo, c.hi
            if quad.singular_end in ("lo", "both"):
                lo = lo + delta
            if quad.singular_end in ("hi", "both"):
                hi = hi - delta
            sub = MeasureSpace.interval(lo, hi)
            q = quad
        elif quad.truncation is not None:
            eps, cap = quad.truncation
            sub = omega
            q = quad.replace(truncation=(eps * 10.0 ** (-2 * j), cap * 10.0 ** (2 * j)))
        else:
            return None
        values.append(outer_value(sub, q))
    return values


def monotone_growth(values, threshold=0.10):
    """True when every successive value exceeds its predecessor by at least ``threshold``."""
    if values is None or len(values) < 2:
        return False
    return all(b >= a * (1 + threshold) and b > 0 for a, b in zip(values, values[1:]))


def _outer(omega, quad, integrand, what, strict=True, full_output=False):
    """Integrate ``integrand(u_nodes, omega_space, quad, scale)`` over Omega with error control."""
    u, w = omega.rule(quad, budget=_budget(omega, quad, 1))
    vals = integrand(u, omega, quad, 1)
    if np.any(np.isinf(vals)):
        raise Divergent(f"{what}: integrand is infinite on a set of positive measure")
    value = weighted_sum(w, vals)
    if omega.is_discrete:
        diff = 0.0
        floor = 0.0
    else:
        u2, w2 = omega.rule(quad, budget=_budget(omega, quad, 2))
        coarse = weighted_sum(w2, integrand(u2, omega, quad, 2))
        floor = 64 * _EPS * weighted_sum(np.abs(w), np.abs(vals))
        diff = abs(value - coarse)
        # the inner norms are recomputed at the coarse budget too, so the
        # difference reflects both levels of the nested quadrature
        if strict:
            try:
                _check_tolerance(value, diff, floor, quad, what)
            except ToleranceNotMet:
                def outer_value(sub, q):
                    uu, ww = sub.rule(q, budget=_budget(sub, q, 1))
                    return weighted_sum(ww, integrand(uu, sub, q, 1))
                seq = _divergence_sequence(omega, quad, outer_value)
                if monotone_growth(seq):
                    raise Divergent(
                        f"{what}: truncated values {['%.6g' % v for v in seq]} grow without "
                        "settling; the mixed norm is taken to be infinite", values=seq)
                raise
    err = max(diff, floor)
    return (value, err) if full_output else value


def mixed_norm(k: Kernel, omega: MeasureSpace, s: MeasureSpace, m, e: Exponents,
               quad: Optional[QuadratureSpec] = None, strict: bool = True,
               full_output: bool = False, omega_quad: Optional[QuadratureSpec] = None):
    """Mixed norm of ``k`` for the regime of ``e``.

    ``m`` is the agreement factor: a MapFamily, a callable ``u -> m(u)``, a
    constant, or None for ``m = 1``.  ``omega_quad`` overrides ``quad`` for
    the outer integral.  Raises Divergent when the outer integral grows
    without bound under refinement.
    """
    quad = quad or QuadratureSpec()
    oquad = omega_quad or quad
    mfn = _factor_fn(m)
    regime = e.regime
    r, _ = conjugacy_r(e)

    if regime == REGIME_INF_INF:
        return _sup_norm(k, omega, s, quad, oquad, strict, full_output)

    if regime == REGIME_Q_GT_P:
        inner_exp, weight_exp = e.p * r, e.q
    elif regime == REGIME_Q_INF:
        inner_exp, weight_exp = e.p, INF
    else:
        inner_exp, weight_exp = INF, e.p

    def integrand(u, _omega, _q, scale):
        if k.one_variable:
            inner = _one_var_inner(k, u, s, inner_exp)
        else:
            inner = _inner_norms(k, u, s, quad, scale, inner_exp)
        return inner * _m_power(mfn(u), weight_exp)

    return _outer(omega, oquad, integrand, f"mixed norm {e}", strict, full_output)


def _sup_norm(k, omega, s, quad, oquad, strict, full_output):
    """``sup_x int |Phi(u, x)| dmu(u)`` over the nodes (or points) of ``s``."""
    if k.one_variable:
        def integrand(u, _o, _q, scale):
            return np.abs(k.grid(u, _probe_point(s))[:, 0])
        return _outer(omega, oquad, integrand, "mixed norm (p=q=inf)", strict, full_output)

    x_nodes, _ = s.rule(quad)
    results = []
    for scale in (1, 2) if not omega.is_discrete else (1,):
        u, w = omega.rule(oquad, budget=_budget(omega, oquad, scale))
        rows = max(1, _CHUNK // max(1, len(u)))
        col = np.empty(len(x_nodes))
        for i in range(0, len(x_nodes), rows):
            vals = np.abs(k.grid(u, x_nodes[i:i + rows])).T
            col[i:i + rows] = pairwise_sum_rows(vals * w)
        results.append(col)
    best = int(np.argmax(results[0]))
    value = float(results[0][best])
    err = 0.0
    if len(results) == 2:
        diff = float(np.max(np.abs(results[0] - results[1])))
        floor = 64 * _EPS * value
        if strict:
            _check_tolerance(value, diff, floor, oquad, "mixed norm (p=q=inf)")
        err = max(diff, floor)
    return (value, err) if full_output else value


def one_var_norm(k: Kernel, omega: MeasureSpace, m, p, quad: Optional[QuadratureSpec] = None,
                 strict: bool = True, full_output: bool = False):
    """``int |phi(u)| m(u)^{-1/p} dmu(u)``; the plain L^1(mu) norm when ``p = inf``."""
    if not k.one_variable:
        raise ValueError("one_var_norm needs a one-variable kernel")
    quad = quad or QuadratureSpec()
    p = ext_real(p)
    if p != INF and p < 1:
        raise ValueError("one_var_norm needs p >= 1")
    mfn = _factor_fn(m)

    def integrand(u, _o, _q, _scale):
        phi = np.abs(k.grid(np.asarray(u), np.zeros(1))[:, 0])
        return phi * _m_power(mfn(u), p)

    return _outer(omega, quad, integrand, f"one-variable norm (p={fmt_ext(p)})", strict, full_output)
