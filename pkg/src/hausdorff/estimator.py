"""Empirical lower bounds on operator norms.

Every value returned here is attained by an explicit witness, so it is a
lower bound on the true norm up to the quadrature error of its evaluation.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import erf
from scipy.stats import qmc

from ._backend import ascent_qp, vector_norm
from .errors import EmptyFamily, HausdorffError, NoConvergence
from .kernel import ext_real, monotone_growth
from .measure import Interval, Lebesgue, MeasureSpace, QuadratureSpec, integrate, lp_norm
from .operator import OperatorInstance, SupportedFunction, apply_grid, to_matrix, weighted_matrix

log = logging.getLogger(__name__)

__all__ = ["LowerBound", "DivergenceReport", "TestFamily", "TruncatedPower", "StepFunction",
           "GaussianBump", "GridVector", "empirical_norm_matrix", "ascent_norm", "witness_ratio",
           "empirical_norm_operator", "empirical_norm_continuous", "divergence_probe"]


@dataclass(frozen=True)
class LowerBound:
    value: float
    witness: tuple
    family: str = "matrix"
    exact: bool = False
    error: float = 0.0
    evaluations: int = 0


@dataclass(frozen=True)
class DivergenceReport:
    eps: tuple
    values: tuple
    monotone_growth: bool
    x: float = 0.0
    notes: tuple = field(default_factory=tuple)


# --------------------------------------------------------------------------
# matrices
def _p(v):
    v = ext_real(v)
    return math.inf if v == math.inf else float(v)


def _dual(q):
    if math.isinf(q):
        return 1.0
    if q == 1.0:
        return math.inf
    return q / (q - 1.0)


def witness_ratio(M, f, p, q=None) -> float:
    """``|M f|_p / |f|_q``."""
    p = _p(p)
    q = p if q is None else _p(q)
    nf = vector_norm(np.asarray(f, dtype=float), q)
    if nf == 0.0:
        return 0.0
    return vector_norm(np.asarray(M, dtype=float) @ np.asarray(f, dtype=float), p) / nf


def _spectral(M, tol=1e-12, max_iter=100_000):
    """Largest singular value by power iteration on ``M^T M`` from the all-ones vector."""
    n = M.shape[1]
    v = np.ones(n) / math.sqrt(n)
    G = M.T @ M
    lam = float(v @ G @ v)
    if lam == 0.0:
        # ones is in the kernel of M; fall back to the heaviest column
        v = np.zeros(n)
        v[int(np.argmax(np.sum(M * M, axis=0)))] = 1.0
        lam = float(v @ G @ v)
        if lam == 0.0:
            return 0.0, v
    for _ in range(max_iter):
        w = G @ v
        v = w / np.linalg.norm(w)
        new = float(v @ G @ v)
        if abs(new - lam) <= tol * new:
            return math.sqrt(new), v
        lam = new
    raise NoConvergence(f"power iteration did not reach rel tol {tol:g} in {max_iter} steps")


def ascent_norm(M, p, q=None, restarts: int = 16, seed: int = 0):
    """Best ``(value, f)`` of the ``q -> p`` ascent over seeded restarts.

    Restart 0 starts from the all-ones vector, the rest from Gaussian draws.
    Ties go to the lowest restart index.
    """
    M = np.asarray(M, dtype=float)
    p = _p(p)
    q = p if q is None else _p(q)
    n = M.shape[1]
    rng = np.random.default_rng(seed)
    starts = [np.ones(n)] + [rng.standard_normal(n) for _ in range(max(0, restarts - 1))]
    best = (-1.0, None)
    for f0 in starts:
        val, f = ascent_qp(M, p, q, f0)
        if val > best[0]:
            best = (float(val), np.asarray(f))
    return best


def empirical_norm_matrix(M, p, q=None, restarts: int = 16, seed: int = 0) -> LowerBound:
    """``q -> p`` norm of ``M`` (counting measures), exact where a closed form exists.

    Closed forms: ``q = 1`` (largest column p-norm), ``p = inf`` (largest
    row q'-norm; this covers the max row sum at p = q = inf) and
    ``p = q = 2`` (power iteration).  Other pairs use the ascent, which
    returns a lower bound.
    """
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    p = _p(p)
    q = p if q is None else _p(q)
    if M.size == 0:
        return LowerBound(0.0, tuple(np.zeros(M.shape[1]).tolist()), exact=True)
    if q == 1.0:
        cols = [vector_norm(M[:, j], p) for j in range(M.shape[1])]
        j = int(np.argmax(cols))
        f = np.zeros(M.shape[1])
        f[j] = 1.0
        return LowerBound(float(cols[j]), tuple(f.tolist()), exact=True)
    if math.isinf(p):
        qd = _dual(q)
        rows = [vector_norm(M[i], qd) for i in range(M.shape[0])]
        i = int(np.argmax(rows))
        f = _row_witness(M[i], q)
        return LowerBound(float(rows[i]), tuple(f.tolist()), exact=True)
    if p == 2.0 and q == 2.0:
        val, f = _spectral(M)
        return LowerBound(val, tuple(f.tolist()), exact=True)
    val, f = ascent_norm(M, p, q, restarts, seed)
    return LowerBound(val, tuple(f.tolist()))


def _row_witness(row, q):
    """Unit-q vector attaining ``<row, f> = |row|_{q'}``."""
    a = np.abs(row)
    if not np.any(a):
        return np.zeros_like(row)
    if math.isinf(q):
        return np.where(row >= 0, 1.0, -1.0)
    f = np.sign(row) * (a / a.max()) ** (1.0 / (q - 1.0))
    return f / vector_norm(f, q)


def empirical_norm_operator(op: OperatorInstance, restarts: int = 16, seed: int = 0) -> LowerBound:
    """Norm of a finite discrete operator from its weighted matrix."""
    return empirical_norm_matrix(weighted_matrix(op), op.exponents.pf, op.exponents.qf,
                                 restarts, seed)


# --------------------------------------------------------------------------
# test-function families
class TestFamily:
    """Parametric witnesses.  Subclasses set ``bounds`` and implement ``make``."""

    __test__ = False  # keep pytest from collecting this as a test class
    name = "family"
    linear = False
    bounds: tuple = ()

    def make(self, params) -> SupportedFunction:
        raise NotImplementedError

    def source_norm(self, params, space: MeasureSpace, q, quad: QuadratureSpec) -> float:
        f = self.make(params)
        return lp_norm(space, f, q, _with_breaks(quad, f, space))

    def center(self):
        return tuple(0.5 * (a + b) for a, b in self.bounds)

    def check(self, space, q, quad):
        nrm = self.source_norm(self.center(), space, q, quad)
        if not (math.isfinite(nrm) and nrm > 0):
            raise ValueError(f"{self.name}: member has norm {nrm} in L^{q}")


def _lebesgue_interval(space):
    return isinstance(space.carrier, Interval) and isinstance(space.measure, Lebesgue)


class TruncatedPower(TestFamily):
    """``f(t) = t^{-alpha}`` on ``support``, zero elsewhere; ``alpha`` ranges over ``alpha``."""

    name = "truncated-power"

    def __init__(self, alpha=(0.0, 0.48), support=(1e-60, 1.0)):
        a, b = map(float, support)
        if not 0 < a < b:
            raise ValueError("TruncatedPower support must be (a, b] with 0 < a < b")
        self.bounds = ((float(alpha[0]), float(alpha[1])),)
        self.support = (a, b)

    def make(self, params):
        alpha = float(params[0])
        return SupportedFunction(lambda t: np.power(t, -alpha), self.support,
                                 f"t^-{alpha!r} on {self.support}")

    def source_norm(self, params, space, q, quad):
        if not _lebesgue_interval(space):
            return super().source_norm(params, space, q, quad)
        alpha = float(params[0])
        a, b = self.support
        if math.isinf(q):
            return max(a ** -alpha, b ** -alpha)
        k = 1.0 - alpha * q
        if k == 0.0:
            return math.log(b / a) ** (1.0 / q)
        return ((b ** k - a ** k) / k) ** (1.0 / q)


class GaussianBump(TestFamily):
    """``exp(-(t - c)^2 / (2 w^2))`` cut off at ``c +- 8 w`` and at the carrier."""

    name = "gaussian-bump"

    def __init__(self, center=(0.0, 1.0), width=(0.05, 1.0), carrier=(-math.inf, math.inf)):
        if width[0] <= 0:
            raise ValueError("GaussianBump widths must be positive")
        self.bounds = ((float(center[0]), float(center[1])), (float(width[0]), float(width[1])))
        self.carrier = tuple(map(float, carrier))

    def _support(self, c, w):
        return max(c - 8 * w, self.carrier[0]), min(c + 8 * w, self.carrier[1])

    def make(self, params):
        c, w = map(float, params)
        return SupportedFunction(lambda t: np.exp(-0.5 * ((t - c) / w) ** 2), self._support(c, w),
                                 f"bump(c={c!r}, w={w!r})")

    def source_norm(self, params, space, q, quad):
        if not _lebesgue_interval(space):
            return super().source_norm(params, space, q, quad)
        c, w = map(float, params)
        a, b = self._support(c, w)
        if math.isinf(q):
            nearest = min(max(c, a), b)
            return math.exp(-0.5 * ((nearest - c) / w) ** 2)
        s = math.sqrt(q / 2.0) / w
        mass = w * math.sqrt(math.pi / (2.0 * q)) * float(erf((b - c) * s) - erf((a - c) * s))
        return mass ** (1.0 / q)


class StepFunction(TestFamily):
    """Piecewise constants on the cells of a grid, with free levels.

    In one dimension the cells are ``[b_i, b_{i+1})``.  With ``dim > 1``
    they are the products of those intervals, and ``H f`` is sampled at
    cell centres with cell volumes as weights.  That sampling is exact
    whenever the operator maps cell-constant functions to cell-constant
    functions, as diagonal dilations by powers of a common ratio do on a
    geometric grid with that ratio.
    """

    name = "step-function"
    linear = True

    def __init__(self, breakpoints, level_bounds=(-1.0, 1.0), dim=1):
        bp = tuple(float(b) for b in breakpoints)
        if len(bp) < 2 or any(b <= a for a, b in zip(bp, bp[1:])):
            raise ValueError("StepFunction breakpoints must be strictly increasing (>= 2)")
        self.breakpoints = bp
        self.dim = int(dim)
        edges = list(zip(bp, bp[1:]))
        self.cells = [tuple(c) for c in itertools.product(edges, repeat=self.dim)]
        self.bounds = tuple((float(level_bounds[0]), float(level_bounds[1])) for _ in self.cells)

    def _indicator(self, cell):
        lo = np.array([a for a, _ in cell])
        hi = np.array([b for _, b in cell])
        if self.dim == 1:
            return SupportedFunction(lambda t: np.ones(np.shape(t)), (lo[0], hi[0]),
                                     f"1[{lo[0]!r},{hi[0]!r})")

        def fn(y):
            y = np.asarray(y, dtype=float)
            return np.all((y >= lo) & (y < hi), axis=-1).astype(float)
        return SupportedFunction(fn, None, f"1{cell}")

    def basis(self):
        return [self._indicator(c) for c in self.cells]

    def cell_rule(self):
        centres = np.array([[0.5 * (a + b) for a, b in c] for c in self.cells])
        volumes = np.array([math.prod(b - a for a, b in c) for c in self.cells])
        return (centres[:, 0] if self.dim == 1 else centres), volumes

    def make(self, params):
        bp = np.asarray(self.breakpoints)
        lv = np.asarray(params, dtype=float).reshape((len(bp) - 1,) * self.dim)

        def fn(t):
            t = np.asarray(t, dtype=float)
            if self.dim == 1:
                t = t[..., None]
            idx = np.searchsorted(bp, t, side="right") - 1
            inside = np.all((idx >= 0) & (idx < len(bp) - 1), axis=-1)
            idx = np.clip(idx, 0, len(bp) - 2)
            return np.where(inside, lv[tuple(np.moveaxis(idx, -1, 0))], 0.0)
        return SupportedFunction(fn, None, "step")

    def basis_norms(self, space, q, quad):
        if isinstance(space.measure, Lebesgue):
            _, volumes = self.cell_rule()
            return np.ones_like(volumes) if math.isinf(q) else volumes ** (1.0 / q)
        return np.array([lp_norm(space, g, q, _with_breaks(quad, g, space)) for g in self.basis()])


class GridVector(TestFamily):
    """Arbitrary functions on a finite discrete source space."""

    name = "grid-vector"
    linear = True

    def __init__(self, space: MeasureSpace, bounds=(-1.0, 1.0)):
        if not space.is_discrete:
            raise ValueError("GridVector needs a discrete space")
        self.space = space
        self.bounds = tuple((float(bounds[0]), float(bounds[1])) for _ in range(len(space.carrier)))

    def basis(self):
        pts = self.space.points()
        out = []
        for pt in pts:
            def fn(y, pt=pt):
                y = np.asarray(y)
                eq = y == pt if y.ndim == np.ndim(pt) or np.ndim(pt) == 0 else np.all(y == pt, -1)
                return eq.astype(float)
            out.append(fn)
        return out

    def make(self, params):
        vals = np.asarray(params, dtype=float)
        idx_of = self.space.carrier.index_of
        return SupportedFunction(lambda y: vals[idx_of(y)], None, "grid-vector")

    def basis_norms(self, space, q, quad):
        w = self.space.point_masses()
        return np.ones_like(w) if math.isinf(q) else w ** (1.0 / q)

    def source_norm(self, params, space, q, quad):
        w = self.space.point_masses()
        a = np.abs(np.asarray(params, dtype=float))
        if math.isinf(q):
            return float(a.max())
        return float(np.sum(w * a ** q) ** (1.0 / q))


def _with_breaks(quad, f, space=None):
    """Add the support ends of ``f`` as breakpoints, skipping ones that sit on a carrier end."""
    if not isinstance(f, SupportedFunction) or f.support is None or f.support[0].ndim != 0:
        return quad
    extra = [float(f.support[0]), float(f.support[1])]
    c = getattr(space, "carrier", None)
    if isinstance(c, Interval) and c.bounded:
        near = 1e-9 * (c.hi - c.lo)
        extra = [b for b in extra if c.lo + near < b < c.hi - near]
    return quad.replace(breakpoints=tuple(quad.breakpoints) + tuple(extra))


# --------------------------------------------------------------------------
# continuous optimisation
# target norms want many log panels; the u-integral wants aggressive grading
TARGET_QUAD = QuadratureSpec(node_budget=1024, truncation=(1e-60, 1e12))
OMEGA_QUAD = QuadratureSpec(node_budget=1024, ratio=0.2)


def _ratio(op, fam, params, quad, oquad):
    f = fam.make(params)
    den = fam.source_norm(params, op.source, op.exponents.qf, quad)
    if den == 0.0:
        return 0.0, 0.0
    tq = _with_breaks(quad, f, op.target)
    num, err = lp_norm(op.target, lambda xs: apply_grid(op, f, xs, oquad), op.exponents.pf, tq,
                       full_output=True)
    return num / den, err / den


def _linear_family(op, fam, quad, oquad, restarts, seed):
    p, q = op.exponents.pf, op.exponents.qf
    if isinstance(fam, GridVector) and op.finite_discrete and fam.space == op.source:
        B = weighted_matrix(op, to_matrix(op))
    else:
        basis = fam.basis()
        if getattr(fam, "dim", 1) > 1:
            nodes, weights = fam.cell_rule()
        else:
            nodes, weights = op.target.rule(quad)
        if op.target.is_discrete:
            weights = op.target.point_masses()
        cols = [apply_grid(op, g, nodes, oquad) for g in basis]
        G = np.stack(cols, axis=1)
        left = np.ones_like(weights) if math.isinf(p) else np.asarray(weights) ** (1.0 / p)
        B = left[:, None] * G / fam.basis_norms(op.source, q, quad)[None, :]
    lb = empirical_norm_matrix(B, p, q, restarts, seed)
    norms = fam.basis_norms(op.source, q, quad)
    params = np.asarray(lb.witness) / norms
    return lb.value, tuple(params.tolist()), len(fam.bounds)


def _coordinate_ascent(evaluate, start, fstart, bounds, budget):
    """Compass search: accepted moves are repeated with a doubled step, failures halve it."""
    x = list(start)
    fx = fstart
    used = 0
    steps = [0.25 * (b - a) for a, b in bounds]
    while used < budget and any(s > 1e-4 * max(b - a, 1e-300) for s, (a, b) in zip(steps, bounds)):
        moved = False
        for i, (a, b) in enumerate(bounds):
            for sgn in (1.0, -1.0):
                step = steps[i]
                while used < budget:
                    y = list(x)
                    y[i] = min(b, max(a, x[i] + sgn * step))
                    if y[i] == x[i]:
                        break
                    fy = evaluate(y)
                    used += 1
                    if not fy > fx:
                        break
                    x, fx, moved = y, fy, True
                    step *= 2.0
                if moved:
                    break
        if not moved:
            steps = [0.5 * s for s in steps]
    return fx, tuple(x), used


def _nonlinear_family(op, fam, quad, oquad, budget, seed):
    cache = {}

    def evaluate(params):
        key = tuple(float(v) for v in params)
        if key not in cache:
            try:
                cache[key] = _ratio(op, fam, key, quad, oquad)[0]
            except HausdorffError as exc:
                log.warning("%s at %s skipped: %s", fam.name, key, exc)
                cache[key] = -math.inf
        return cache[key]

    dim = len(fam.bounds)
    lo = np.array([a for a, _ in fam.bounds])
    hi = np.array([b for _, b in fam.bounds])
    n_sweep = max(1, budget // 4)
    sweep = qmc.Halton(d=dim, scramble=True, seed=seed).random(n_sweep)
    pts = [tuple((lo + s * (hi - lo)).tolist()) for s in sweep]
    pts = [fam.center()] + pts
    scores = [evaluate(pt) for pt in pts]
    used = len(pts)
    order = sorted(range(len(pts)), key=lambda i: (-scores[i], i))
    best = (scores[order[0]], pts[order[0]])
    starts = [i for i in order[:3] if math.isfinite(scores[i])]
    # the best start gets the whole remaining budget; later starts use what is left
    for i in starts:
        if used >= budget:
            break
        val, x, n = _coordinate_ascent(evaluate, pts[i], scores[i], fam.bounds, budget - used)
        used += n
        if val > best[0]:
            best = (val, x)
    return best[0], best[1], used


def empirical_norm_continuous(op: OperatorInstance, families: Sequence[TestFamily],
                              budget: int = 64, seed: int = 0,
                              quad: Optional[QuadratureSpec] = None,
                              omega_quad: Optional[QuadratureSpec] = None,
                              restarts: int = 16) -> LowerBound:
    """Largest ``|H f|_{L^p} / |f|_{L^q}`` found over the given families.

    Nonlinear families get a scrambled-Halton sweep followed by coordinate
    ascent from the three best sweep points.  Linear families (steps, grid
    vectors) reduce to a weighted matrix whose ``q -> p`` norm is the exact
    supremum over the family; that matrix norm is computed as in
    :func:`empirical_norm_matrix`.  ``budget`` counts ratio evaluations per
    nonlinear family.  ``quad`` controls the target norm and ``omega_quad``
    the evaluation of ``H f``.
    """
    if not families:
        raise EmptyFamily("no test-function families given")
    quad = quad or TARGET_QUAD
    oquad = omega_quad or OMEGA_QUAD
    best = None
    total = 0
    for idx, fam in enumerate(families):
        try:
            if fam.linear:
                val, params, n = _linear_family(op, fam, quad, oquad, restarts, seed)
            else:
                val, params, n = _nonlinear_family(op, fam, quad, oquad, budget, seed)
        except HausdorffError as exc:
            log.warning("family %s skipped: %s", fam.name, exc)
            continue
        total += n
        if best is None or val > best[0]:
            best = (val, params, fam)
    if best is None or not math.isfinite(best[0]):
        raise EmptyFamily("every candidate failed to evaluate")
    val, params, fam = best
    err = 0.0
    if not fam.linear:
        try:
            val, err = _ratio(op, fam, params, quad, oquad)
        except HausdorffError:
            pass
    return LowerBound(float(val), tuple(params), fam.name, error=float(err), evaluations=total)


# --------------------------------------------------------------------------
def divergence_probe(op: OperatorInstance, f, x, eps_sequence,
                     quad: Optional[QuadratureSpec] = None) -> DivergenceReport:
    """Truncated values ``int_{lo+eps}^{hi} Phi(u, x) f(A(u) x) dmu(u)`` for each ``eps``."""
    c = op.omega.carrier
    if not (isinstance(c, Interval) and c.bounded):
        raise ValueError("divergence_probe needs a bounded interval Omega")
    eps = [float(e) for e in eps_sequence]
    if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps_sequence must be positive and strictly decreasing")
    quad = quad or QuadratureSpec()
    xa = np.asarray(x, dtype=float)

    def integrand(u):
        xx = xa[None] if xa.ndim == 0 else xa[None, :]
        y = op.family.apply(u[:, None], xx)
        vals = np.asarray(op.kernel.evaluate(u[:, None], xx), dtype=float) * np.asarray(f(y))
        return vals.reshape(len(u), -1)[:, 0]

    values = []
    notes = []
    for e in eps:
        sub = MeasureSpace(Interval(c.lo + e, c.hi), op.omega.measure)
        v, err = integrate(sub, integrand, quad, full_output=True, strict=False)
        values.append(float(v))
        if err > quad.target_rel_tol * abs(v):
            notes.append(f"eps={e:g}: quadrature error {err:.2e} above tolerance")
    return DivergenceReport(tuple(eps), tuple(values), monotone_growth(values),
                            float(xa) if xa.ndim == 0 else tuple(xa.tolist()), tuple(notes))
