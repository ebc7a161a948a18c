"""Measure spaces, quadrature rules and L^p norms.

Continuous carriers (intervals, boxes) are integrated with composite
Gauss-Legendre rules.  Panels are graded geometrically toward a singular
endpoint, or log-spaced over a mandatory truncation window when the carrier
is unbounded.  Every continuous integral is computed at two budgets and the
difference is reported as the error estimate.

Discrete carriers are summed exactly (in floating point) with the fixed
pairwise tree of :func:`hausdorff._backend.pairwise_sum`, so results do not
depend on scheduling.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Tuple, Union

import numpy as np

from ._backend import pairwise_sum
from .errors import NonFiniteSample, ToleranceNotMet

__all__ = [
    "Interval", "Box", "CountableIndex", "FiniteGroupCarrier",
    "Lebesgue", "Counting", "WeightedCounting", "NormalizedHaar",
    "MeasureSpace", "QuadratureSpec", "integrate", "lp_norm",
]

_EPS = np.finfo(float).eps


# --------------------------------------------------------------------------
# carriers

@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    allow_open_endpoints: bool = True

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"Interval requires lo < hi, got [{self.lo}, {self.hi}]")

    dim = 1
    discrete = False

    @property
    def bounded(self):
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        lo_ok = x > self.lo if self.allow_open_endpoints else x >= self.lo
        hi_ok = x <= self.hi if math.isfinite(self.hi) else np.isfinite(x)
        return lo_ok & hi_ok


@dataclass(frozen=True)
class Box:
    lo: Tuple[float, ...]
    hi: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if len(self.lo) != len(self.hi) or not self.lo:
            raise ValueError("Box bounds must be non-empty and of equal length")
        if not all(a < b for a, b in zip(self.lo, self.hi)):
            raise ValueError("Box requires lo < hi componentwise")

    discrete = False

    @property
    def dim(self):
        return len(self.lo)

    @property
    def bounded(self):
        return all(map(math.isfinite, self.lo + self.hi))

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((x >= lo) & (x <= hi), axis=-1)


@dataclass(frozen=True)
class CountableIndex:
    """A finite, strictly increasing list of integer indices."""

    indices: Tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("CountableIndex indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)

    dim = 1
    discrete = True

    def __len__(self):
        return len(self.indices)

    def points(self):
        return np.asarray(self.indices, dtype=np.int64)

    def index_of(self, pts):
        pts = np.asarray(pts)
        arr = self.points()
        if pts.size == 0:
            return np.zeros(pts.shape, dtype=np.intp)
        pos = np.searchsorted(arr, pts)
        pos = np.clip(pos, 0, max(len(arr) - 1, 0))
        if arr.size == 0 or np.any(arr[pos] != pts):
            raise KeyError("point not in CountableIndex")
        return pos

    def contains(self, pts):
        return np.isin(np.asarray(pts), self.points())


@dataclass(frozen=True)
class FiniteGroupCarrier:
    """The finite abelian group (Z_n)^rank; points are ints (rank 1) or rows."""

    order: int
    rank: int = 1

    def __post_init__(self):
        if self.order < 1 or self.rank < 1:
            raise ValueError("FiniteGroupCarrier needs order >= 1 and rank >= 1")

    discrete = True

    @property
    def dim(self):
        return self.rank

    def __len__(self):
        return self.order ** self.rank

    def points(self):
        n, d = self.order, self.rank
        if d == 1:
            return np.arange(n, dtype=np.int64)
        grids = np.indices((n,) * d).reshape(d, -1).T
        return np.ascontiguousarray(grids, dtype=np.int64)

    def index_of(self, pts):
        pts = np.asarray(pts, dtype=np.int64)
        if np.any((pts < 0) | (pts >= self.order)):
            raise KeyError("point not in group carrier")
        if self.rank == 1:
            return pts
        return np.ravel_multi_index(tuple(np.moveaxis(pts, -1, 0)), (self.order,) * self.rank)

    def contains(self, pts):
        pts = np.asarray(pts)
        ok = (pts >= 0) & (pts < self.order)
        return ok if self.rank == 1 else np.all(ok, axis=-1)


Carrier = Union[Interval, Box, CountableIndex, FiniteGroupCarrier]


# --------------------------------------------------------------------------
# measure kinds

@dataclass(frozen=True)
class Lebesgue:
    pass


@dataclass(frozen=True)
class Counting:
    pass


@dataclass(frozen=True)
class WeightedCounting:
    weights: Tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if not all(math.isfinite(v) and v > 0 for v in w):
            raise ValueError("WeightedCounting weights must be positive and finite")
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class NormalizedHaar:
    pass


MeasureKind = Union[Lebesgue, Counting, WeightedCounting, NormalizedHaar]


@dataclass(frozen=True)
class MeasureSpace:
    carrier: Carrier
    measure: MeasureKind = field(default_factory=Lebesgue)
    sigma_finite: bool = True

    def __post_init__(self):
        c, m = self.carrier, self.measure
        if isinstance(c, (Interval, Box)):
            if not isinstance(m, Lebesgue):
                raise ValueError("continuous carriers carry Lebesgue measure")
        elif isinstance(m, Lebesgue):
            raise ValueError("discrete carriers need a counting-type measure")
        elif isinstance(m, NormalizedHaar) and not isinstance(c, FiniteGroupCarrier):
            raise ValueError("normalized Haar measure needs a finite group carrier")
        elif isinstance(m, WeightedCounting) and len(m.weights) != len(c):
            raise ValueError(f"expected {len(c)} weights, got {len(m.weights)}")

    # convenience constructors
    @classmethod
    def interval(cls, lo, hi, allow_open_endpoints=True):
        return cls(Interval(float(lo), float(hi), allow_open_endpoints))

    @classmethod
    def box(cls, lo, hi):
        return cls(Box(tuple(lo), tuple(hi)))

    @classmethod
    def index(cls, indices, weights=None):
        measure = Counting() if weights is None else WeightedCounting(tuple(weights))
        return cls(CountableIndex(tuple(indices)), measure)

    @classmethod
    def group(cls, order, rank=1, measure="haar", weights=None):
        kind = {"haar": NormalizedHaar(), "counting": Counting()}.get(measure)
        if measure == "weighted":
            kind = WeightedCounting(tuple(weights))
        if kind is None:
            raise ValueError(f"unknown group measure {measure!r}")
        return cls(FiniteGroupCarrier(order, rank), kind)

    @property
    def is_discrete(self):
        return self.carrier.discrete

    @property
    def dim(self):
        return self.carrier.dim

    def points(self):
        if not self.is_discrete:
            raise TypeError("continuous carriers have no point list")
        return self.carrier.points()

    def point_masses(self, exact=False):
        """Masses of the points, in carrier order.

        With ``exact=True`` a list of :class:`fractions.Fraction` is returned
        (weights are converted exactly from their binary values).
        """
        n = len(self.carrier)
        m = self.measure
        if exact:
            if isinstance(m, NormalizedHaar):
                return [Fraction(1, n)] * n
            if isinstance(m, WeightedCounting):
                return [Fraction(w) for w in m.weights]
            return [Fraction(1)] * n
        if isinstance(m, NormalizedHaar):
            return np.full(n, 1.0 / n)
        if isinstance(m, WeightedCounting):
            return np.asarray(m.weights, dtype=float)
        return np.ones(n)

    def total_mass(self):
        c = self.carrier
        if self.is_discrete:
            return pairwise_sum(self.point_masses())
        if isinstance(c, Interval):
            return c.hi - c.lo
        return float(np.prod(np.subtract(c.hi, c.lo)))

    def contains(self, pts):
        return self.carrier.contains(pts)

    def rule(self, quad=None, budget=None):
        """Nodes and weights: quadrature rule (continuous) or points and masses."""
        if self.is_discrete:
            return self.points(), self.point_masses()
        quad = quad or QuadratureSpec()
        c = self.carrier
        if isinstance(c, Interval):
            return _interval_rule(c.lo, c.hi, quad.key(), budget or quad.budget_for(c))
        per_axis = budget or quad.budget_for(c)
        return _box_rule(c.lo, c.hi, quad.key(), per_axis)


# --------------------------------------------------------------------------
# quadrature

@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature controls.

    ``node_budget`` defaults to 4096 nodes on intervals and 256 per axis on
    boxes.  ``grading`` is ``"geometric"`` (panels shrinking by ``ratio``
    toward ``singular_end``) or ``"uniform"``.  ``truncation`` is
    ``(eps_low, cap_high)`` and is required on unbounded carriers, which are
    covered by log-spaced panels over the window.  ``breakpoints`` split
    intervals at known kinks.
    """

    node_budget: Optional[int] = None
    grading: str = "geometric"
    ratio: float = 0.5
    truncation: Optional[Tuple[float, float]] = None
    target_rel_tol: float = 1e-6
    breakpoints: Tuple[float, ...] = ()
    singular_end: str = "lo"
    gauss_order: int = 16

    def __post_init__(self):
        if self.gauss_order < 1:
            raise ValueError("gauss_order must be positive")
        if self.node_budget is not None and self.node_budget < 2 * self.gauss_order:
            # below this the half budget is the same rule and the error estimate is void
            raise ValueError(f"node_budget must be at least 2 * gauss_order = {2 * self.gauss_order}")
        if self.grading not in ("geometric", "uniform"):
            raise ValueError(f"unknown grading {self.grading!r}")
        if not 0.0 < self.ratio < 1.0:
            raise ValueError("geometric ratio must lie in (0, 1)")
        if self.truncation is not None:
            eps, cap = self.truncation
            if not (eps > 0 and cap > eps):
                raise ValueError("truncation needs 0 < eps_low < cap_high")
            object.__setattr__(self, "truncation", (float(eps), float(cap)))
        if self.target_rel_tol <= 0:
            raise ValueError("target_rel_tol must be positive")
        if self.singular_end not in ("lo", "hi", "both", "none"):
            raise ValueError(f"unknown singular_end {self.singular_end!r}")
        object.__setattr__(self, "breakpoints", tuple(sorted(float(b) for b in self.breakpoints)))

    def budget_for(self, carrier):
        if self.node_budget is not None:
            return self.node_budget
        return 256 if isinstance(carrier, Box) else 4096

    def key(self):
        return (self.grading, self.ratio, self.truncation, self.breakpoints,
                self.singular_end, self.gauss_order)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@lru_cache(maxsize=32)
def _gauss(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _panels_rule(edges, order):
    """Composite Gauss-Legendre on consecutive ``edges``."""
    x, w = _gauss(order)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * x
    weights = half * w
    return nodes.ravel(), weights.ravel()


def _geometric_edges(a, b, panels, ratio, toward):
    L = b - a
    floor = max(1e-280, 64 * _EPS * max(abs(a), abs(b))) / L
    kcap = max(1, int(math.log(floor) / math.log(ratio)))
    levels = max(1, min(panels, kcap))
    sub = max(1, panels // levels)
    ks = np.arange(levels)
    # level boundaries as fractions of L, descending from 1
    frac = np.concatenate([ratio ** ks, [0.0]])
    fine = []
    for k in range(levels):
        hi_f, lo_f = frac[k], frac[k + 1]
        fine.append(np.linspace(hi_f, lo_f, sub + 1)[:-1])
    fine.append([0.0])
    f = np.concatenate(fine)[::-1]
    if toward == "lo":
        return a + L * f
    return (b - L * f)[::-1]


def _segment_rule(a, b, panels, quad, sing_lo, sing_hi):
    g = quad.gauss_order
    if quad.grading == "uniform" or not (sing_lo or sing_hi):
        edges = np.linspace(a, b, panels + 1)
        return _panels_rule(edges, g)
    if sing_lo and sing_hi:
        mid = 0.5 * (a + b)
        n1 = max(1, panels // 2)
        x1, w1 = _segment_rule(a, mid, n1, quad, True, False)
        x2, w2 = _segment_rule(mid, b, max(1, panels - n1), quad, False, True)
        return np.concatenate([x1, x2]), np.concatenate([w1, w2])
    edges = _geometric_edges(a, b, panels, quad.ratio, "lo" if sing_lo else "hi")
    return _panels_rule(edges, g)


def _log_rule(a, b, panels, order):
    """Gauss-Legendre in s = log(x) over [a, b], 0 < a < b."""
    edges = np.linspace(math.log(a), math.log(b), panels + 1)
    s, ws = _panels_rule(edges, order)
    x = np.exp(s)
    return x, ws * x


def _split(lo, hi, cuts):
    pts = [lo] + [c for c in cuts if lo < c < hi] + [hi]
    return list(zip(pts[:-1], pts[1:]))


@lru_cache(maxsize=256)
def _interval_rule(lo, hi, key, budget):
    grading, ratio, truncation, breakpoints, singular_end, order = key
    quad = QuadratureSpec(grading=grading, ratio=ratio, truncation=truncation,
                          breakpoints=breakpoints, singular_end=singular_end,
                          gauss_order=order)
    total_panels = max(1, budget // order)
    parts = []
    if math.isfinite(lo) and math.isfinite(hi):
        segs = _split(lo, hi, breakpoints)
        per = max(1, total_panels // len(segs))
        # every segment is graded: a breakpoint usually marks where a
        # singular or truncated feature starts
        for a, b in segs:
            s_lo = singular_end in ("lo", "both")
            s_hi = singular_end in ("hi", "both")
            parts.append(_segment_rule(a, b, per, quad, s_lo, s_hi))
    else:
        if truncation is None:
            raise ValueError("unbounded carrier requires a truncation window (eps_low, cap_high)")
        eps, cap = truncation
        if lo >= 0 and math.isinf(hi):
            halves = [(max(lo, eps), cap, 1.0)]
        elif hi <= 0 and math.isinf(lo):
            halves = [(max(-hi, eps), cap, -1.0)]
        elif math.isinf(lo) and math.isinf(hi):
            halves = [(eps, cap, -1.0), (eps, cap, 1.0)]
        else:
            raise ValueError("unbounded carriers must not straddle 0 with a finite end")
        per_half = max(1, total_panels // len(halves))
        for a, b, sign in halves:
            cuts = sorted(sign * c for c in breakpoints)
            segs = _split(a, b, [c for c in cuts if c > 0])
            per = max(1, per_half // len(segs))
            for sa, sb in segs:
                x, w = _log_rule(sa, sb, per, order)
                parts.append((sign * x, w))
    nodes = np.concatenate([p[0] for p in parts])
    weights = np.concatenate([p[1] for p in parts])
    order_idx = np.argsort(nodes, kind="stable")
    nodes, weights = nodes[order_idx], weights[order_idx]
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=64)
def _box_rule(lo, hi, key, per_axis):
    axes = [_interval_rule(a, b, key, per_axis) for a, b in zip(lo, hi)]
    grids = np.meshgrid(*[ax[0] for ax in axes], indexing="ij")
    wgrids = np.meshgrid(*[ax[1] for ax in axes], indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.prod(np.stack([w.ravel() for w in wgrids], axis=-1), axis=-1)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _evaluate(fn, nodes):
    vals = np.asarray(fn(nodes), dtype=float)
    if vals.shape != (len(nodes),):
        vals = np.broadcast_to(vals, (len(nodes),)).astype(float)
    if not np.all(np.isfinite(vals)):
        bad = nodes[~np.isfinite(vals)][:3]
        raise NonFiniteSample(f"integrand is not finite at nodes {bad.tolist()}")
    return vals


def weighted_sum(weights, values):
    return pairwise_sum(np.multiply(weights, values))


def richardson_pair(fine, coarse, abs_scale):
    """Error estimate from two budgets, floored at accumulated rounding."""
    return max(abs(fine - coarse), 64 * _EPS * abs_scale)


def _check_tolerance(value, diff, floor, quad, what):
    if diff > quad.target_rel_tol * abs(value) and diff > floor:
        raise ToleranceNotMet(
            f"{what}: error estimate {diff:.3e} exceeds rel tol {quad.target_rel_tol:g} "
            f"of |value| = {abs(value):.6g}; rerun with a larger node_budget",
            value=value, error=diff,
        )


def _budgets(space, quad):
    full = quad.budget_for(space.carrier)
    return full, max(quad.gauss_order, full // 2)


def integrate(space: MeasureSpace, integrand: Callable, quad: Optional[QuadratureSpec] = None,
              full_output: bool = False, strict: bool = True):
    """Integrate ``integrand`` against the measure of ``space``.

    ``integrand`` is vectorised: it receives all nodes at once (shape ``(N,)``,
    or ``(N, d)`` on boxes and rank-d groups).  Discrete measures give the
    exact finite sum.  With ``full_output`` the pair ``(value, error)`` is
    returned.  ``strict=False`` returns the value even when the tolerance is
    missed.
    """
    quad = quad or QuadratureSpec()
    nodes, weights = space.rule(quad)
    vals = _evaluate(integrand, nodes)
    value = weighted_sum(weights, vals)
    if space.is_discrete:
        return (value, 0.0) if full_output else value
    _, half = _budgets(space, quad)
    n2, w2 = space.rule(quad, budget=half)
    coarse = weighted_sum(w2, _evaluate(integrand, n2))
    scale = weighted_sum(np.abs(weights), np.abs(vals))
    err = richardson_pair(value, coarse, scale)
    if strict:
        _check_tolerance(value, abs(value - coarse), 64 * _EPS * scale, quad, "integrate")
    return (value, err) if full_output else value


def norm_from_values(weights, vals, p):
    """L^p norm of sampled absolute values against ``weights`` (scaled by the max)."""
    big = float(vals.max()) if vals.size else 0.0
    if big == 0.0:
        return 0.0, 0.0
    if math.isinf(p):
        return big, 0.0
    s = weighted_sum(weights, (vals / big) ** p)
    return big * s ** (1.0 / p), s


def lp_norm(space: MeasureSpace, f: Callable, p: float, quad: Optional[QuadratureSpec] = None,
            full_output: bool = False, strict: bool = True):
    """``(int |f|^p)^(1/p)``; for ``p = inf`` the maximum of ``|f|`` over the nodes.

    On continuous carriers the sup is a grid maximum, which can only
    underestimate the essential supremum.
    """
    p = float(p)
    if not p >= 1.0:
        raise ValueError(f"lp_norm needs p >= 1 or p = inf, got {p}")
    quad = quad or QuadratureSpec()
    nodes, weights = space.rule(quad)
    vals = np.abs(_evaluate(f, nodes))
    value, s = norm_from_values(weights, vals, p)
    if space.is_discrete or math.isinf(p) or value == 0.0:
        return (value, 0.0) if full_output else value
    _, half = _budgets(space, quad)
    n2, w2 = space.rule(quad, budget=half)
    big = float(vals.max())
    s2 = weighted_sum(w2, (np.abs(_evaluate(f, n2)) / big) ** p)
    floor = 64 * _EPS * s
    if strict:
        _check_tolerance(s, abs(s - s2), floor, quad, "lp_norm")
    err_s = max(abs(s - s2), floor)
    err = big * (1.0 / p) * s ** (1.0 / p - 1.0) * err_s
    return (value, err) if full_output else value
