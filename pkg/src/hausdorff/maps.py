"""Parameterised map families ``A(u): S -> S'`` and their agreement factors.

The agreement factor ``m(u)`` is the constant in

    nu(A(u)^{-1} E) <= m(u)^{-1} nu'(E)     for every finite-measure E,

and the built-in families always return the smallest valid (exact
push-forward) constant, which gives the tightest norm bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import OutOfCarrier, PreimageUnavailable
from .measure import Box, FiniteGroupCarrier, Interval, MeasureSpace

__all__ = [
    "MapFamily", "ScalarDilation", "MatrixDilation", "CyclicAutomorphism", "CustomMap",
    "apply_map", "agreement_factor", "verify_agreement", "AgreementReport",
]


def _bounds(carrier):
    if isinstance(carrier, Interval):
        return np.array([carrier.lo]), np.array([carrier.hi])
    return np.asarray(carrier.lo), np.asarray(carrier.hi)


def _clipped_image_measure(lo, hi, img_a, img_b, factor):
    """``lambda(E cap A(S)) / factor`` for a box ``E`` and a box image ``A(S)``.

    Measuring in image coordinates keeps ``nu(A^-1 E)`` and ``nu'(E) / m``
    bit-identical whenever ``E`` lies inside the image.
    """
    lo, hi = np.atleast_1d(lo).astype(float), np.atleast_1d(hi).astype(float)
    a, b = np.minimum(img_a, img_b), np.maximum(img_a, img_b)
    lengths = np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)
    return float(np.prod(lengths)) / float(factor)


class MapFamily:
    """Base class.  Subclasses implement ``_apply`` (vectorised) and ``_factor``."""

    domain_space: MeasureSpace
    codomain_space: MeasureSpace

    @property
    def finite_discrete(self):
        return self.domain_space.is_discrete and self.codomain_space.is_discrete

    def apply(self, u, x):
        """``A(u)(x)`` with NumPy broadcasting between ``u`` and the leading axes of ``x``."""
        return self._apply(u, x)

    def agreement_factor(self, u):
        if self.finite_discrete:
            return float(self.exact_agreement_factor(u))
        return self._factor(u)

    def exact_agreement_factor(self, u):
        """Smallest valid ``m(u)`` on finite discrete spaces, as a Fraction.

        ``min over y in the image of w'(y) / nu(A(u)^{-1}{y})``.
        """
        dom, cod = self.domain_space, self.codomain_space
        xs = dom.points()
        ys = self._apply(u, xs)
        idx = cod.carrier.index_of(ys)
        w = dom.point_masses(exact=True)
        w2 = cod.point_masses(exact=True)
        pre = {}
        for i, j in zip(range(len(xs)), np.asarray(idx).tolist()):
            pre[j] = pre.get(j, Fraction(0)) + w[i]
        return min(w2[j] / mass for j, mass in pre.items())

    def _factor(self, u):
        raise NotImplementedError

    def parameter_window(self, x, lo, hi):
        """Parameters ``u`` with ``A(u)(x)`` inside ``[lo, hi]``, or None if unknown."""
        return None

    def preimage_measure(self, u, lo, hi):
        """Closed-form ``nu(A(u)^{-1}[lo, hi])`` for an axis-aligned box, or None."""
        return None

    def preimage_bounding_box(self, u, lo, hi):
        """A box containing ``A(u)^{-1}[lo, hi]`` (used for Monte-Carlo), or None."""
        return None


class ScalarDilation(MapFamily):
    """``A(u)(x) = u * x`` on an interval or box; ``m(u) = |u|^d``."""

    def __init__(self, domain_space, codomain_space=None, d=None):
        codomain_space = codomain_space or domain_space
        for sp in (domain_space, codomain_space):
            if not isinstance(sp.carrier, (Interval, Box)):
                raise ValueError("ScalarDilation acts on intervals or boxes")
        self.domain_space = domain_space
        self.codomain_space = codomain_space
        self.d = d or domain_space.dim
        if self.d != domain_space.dim:
            raise ValueError("dimension does not match the domain carrier")

    def _apply(self, u, x):
        u = np.asarray(u, dtype=float)
        x = np.asarray(x, dtype=float)
        if self.d > 1:
            u = u[..., None]
        return u * x

    def _factor(self, u):
        return np.abs(np.asarray(u, dtype=float)) ** self.d

    def parameter_window(self, x, lo, hi):
        if self.d != 1:
            return None
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            a = np.where(x > 0, lo / x, hi / x)
            b = np.where(x > 0, hi / x, lo / x)
        return a, b

    def preimage_measure(self, u, lo, hi):
        u = float(u)
        if u == 0.0:
            return None
        slo, shi = _bounds(self.domain_space.carrier)
        return _clipped_image_measure(lo, hi, u * slo, u * shi, float(self._factor(u)))


class MatrixDilation(MapFamily):
    """``A(k)(x) = A_k x`` indexed by ``k`` in a CountableIndex.

    On a box (R^d) ``m(k) = |det A_k|``.  On the group (Z_n)^d the product
    is reduced mod n; every ``det A_k`` must then be a unit mod n and the
    factor is found by enumeration.
    """

    def __init__(self, matrices, domain_space, codomain_space=None, indices=None):
        codomain_space = codomain_space or domain_space
        mats = np.array([np.atleast_2d(np.asarray(a, dtype=float)) for a in matrices])
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError("matrices must be square and of equal size")
        self.indices = tuple(range(len(mats))) if indices is None else tuple(int(i) for i in indices)
        if len(self.indices) != len(mats):
            raise ValueError("one index per matrix")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("matrix indices must be strictly increasing")
        self.matrices = mats
        self.domain_space = domain_space
        self.codomain_space = codomain_space
        self.dets = np.array([np.linalg.det(a) for a in mats])
        d = mats.shape[1]
        if domain_space.dim != d:
            raise ValueError("matrix size does not match the domain dimension")
        if isinstance(domain_space.carrier, FiniteGroupCarrier):
            n = domain_space.carrier.order
            if not np.all(mats == np.round(mats)):
                raise ValueError("matrices on (Z_n)^d need integer entries")
            self.modulus = n
            for k, a in zip(self.indices, mats):
                det = int(round(np.linalg.det(a)))
                if math.gcd(det % n, n) != 1:
                    raise ValueError(f"A_{k} has det {det}, not a unit mod {n}")
        else:
            self.modulus = None
            if np.any(self.dets == 0):
                raise ValueError("MatrixDilation requires |det A_k| > 0")

    def _gather(self, u):
        u = np.asarray(u)
        pos = np.searchsorted(self.indices, u)
        pos = np.clip(pos, 0, len(self.indices) - 1)
        if np.any(np.asarray(self.indices)[pos] != u):
            raise KeyError(f"unknown matrix index in {np.unique(u).tolist()}")
        return pos

    def _apply(self, u, x):
        mats = self.matrices[self._gather(u)]
        if self.modulus is not None:
            x = np.asarray(x, dtype=np.int64)
            if x.ndim == 1 and self.matrices.shape[1] == 1:
                x = x[..., None]
                y = np.einsum("...ij,...j->...i", mats.astype(np.int64), x)[..., 0]
            else:
                y = np.einsum("...ij,...j->...i", mats.astype(np.int64), x)
            return np.mod(y, self.modulus)
        x = np.asarray(x, dtype=float)
        # points of an interval are scalars, whatever the shape of the array holding them
        if self.matrices.shape[1] == 1 and (isinstance(self.domain_space.carrier, Interval)
                                            or x.ndim == 0 or x.shape[-1:] != (1,)):
            return mats[..., 0, 0] * x
        return np.einsum("...ij,...j->...i", mats, x)

    def _factor(self, u):
        return np.abs(self.dets[self._gather(u)])

    def _is_diagonal(self, k):
        a = self.matrices[k]
        return np.all(a == np.diag(np.diag(a)))

    def preimage_measure(self, u, lo, hi):
        k = int(self._gather(u))
        slo, shi = _bounds(self.domain_space.carrier)
        lo, hi = np.atleast_1d(lo).astype(float), np.atleast_1d(hi).astype(float)
        if self._is_diagonal(k):
            diag = np.diag(self.matrices[k])
            return _clipped_image_measure(lo, hi, diag * slo, diag * shi, abs(self.dets[k]))
        if np.all(np.isinf(slo)) and np.all(np.isinf(shi)):
            return float(np.prod(hi - lo) / abs(self.dets[k]))
        return None

    def preimage_bounding_box(self, u, lo, hi):
        k = int(self._gather(u))
        inv = np.linalg.inv(self.matrices[k])
        lo, hi = np.atleast_1d(lo).astype(float), np.atleast_1d(hi).astype(float)
        corners = np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(len(lo), -1).T
        pre = corners @ inv.T
        slo, shi = _bounds(self.domain_space.carrier)
        return np.maximum(pre.min(axis=0), slo), np.minimum(pre.max(axis=0), shi)


class CyclicAutomorphism(MapFamily):
    """``A(k)(x) = k x mod n`` for units ``k`` of Z_n; ``m = 1`` under normalized Haar."""

    def __init__(self, n, multipliers, domain_space=None, codomain_space=None):
        self.n = int(n)
        mult = tuple(sorted(int(k) for k in multipliers))
        for k in mult:
            if math.gcd(k % self.n, self.n) != 1:
                raise ValueError(f"multiplier {k} is not a unit mod {self.n}")
        self.multipliers = mult
        self.domain_space = domain_space or MeasureSpace.group(self.n)
        self.codomain_space = codomain_space or self.domain_space
        for sp in (self.domain_space, self.codomain_space):
            c = sp.carrier
            if not (isinstance(c, FiniteGroupCarrier) and c.order == self.n and c.rank == 1):
                raise ValueError(f"CyclicAutomorphism acts on Z_{self.n}")

    def _apply(self, u, x):
        return np.mod(np.asarray(u, dtype=np.int64) * np.asarray(x, dtype=np.int64), self.n)


class CustomMap(MapFamily):
    """User-defined family.

    ``apply(u, x)`` must be vectorised; ``factor(u) > 0`` is the caller's
    agreement constant (measurability of ``u -> A(u)`` and validity of the
    constant are the caller's obligation).  Optional hooks enable exact
    agreement checks and support-aware quadrature.
    """

    def __init__(self, apply, factor, domain_space, codomain_space=None,
                 preimage_measure=None, parameter_window=None, preimage_bounding_box=None):
        self._fn = apply
        self._m = factor
        self.domain_space = domain_space
        self.codomain_space = codomain_space or domain_space
        self._pre = preimage_measure
        self._win = parameter_window
        self._bbox = preimage_bounding_box

    def _apply(self, u, x):
        return self._fn(u, x)

    def _factor(self, u):
        m = np.asarray(self._m(u), dtype=float)
        if np.any(~(m > 0)):
            raise ValueError("custom agreement factor must be positive")
        return m

    def agreement_factor(self, u):
        if self.finite_discrete and self._m is None:
            return float(self.exact_agreement_factor(u))
        return self._factor(u)

    def parameter_window(self, x, lo, hi):
        return None if self._win is None else self._win(x, lo, hi)

    def preimage_measure(self, u, lo, hi):
        return None if self._pre is None else self._pre(u, lo, hi)

    def preimage_bounding_box(self, u, lo, hi):
        return None if self._bbox is None else self._bbox(u, lo, hi)


# --------------------------------------------------------------------------
# module-level operations

def apply_map(family: MapFamily, u, x):
    """``A(u)(x)``; raises OutOfCarrier if the image leaves the codomain."""
    y = family.apply(u, x)
    inside = family.codomain_space.contains(y)
    if not np.all(inside):
        raise OutOfCarrier(
            "A(u)(x) leaves the codomain carrier; enlarge the carrier or declare f = 0 outside"
        )
    return y


def agreement_factor(family: MapFamily, u):
    m = family.agreement_factor(u)
    return float(m) if np.ndim(m) == 0 else m


@dataclass(frozen=True)
class AgreementReport:
    max_violation: float         # max over sets of nu(A^-1 E) - m^-1 nu'(E)
    integral_max_violation: float   # same for int g(A x) dnu - m^-1 int g dnu'
    samples: int
    tolerance: float             # largest per-trial allowance (3 sigma or 2 ulp)
    within_tolerance: bool
    method: str                  # "exact", "exact-rational" or "monte-carlo"


_MC_SAMPLES = 20000


def _window(carrier):
    lo, hi = _bounds(carrier)
    lo, hi = lo.astype(float).copy(), hi.astype(float).copy()
    for i in range(len(lo)):
        if math.isinf(lo[i]) and math.isinf(hi[i]):
            lo[i], hi[i] = -4.0, 4.0
        elif math.isinf(hi[i]):
            hi[i] = lo[i] + 8.0
        elif math.isinf(lo[i]):
            lo[i] = hi[i] - 8.0
    return lo, hi


def _ulps(v, k=2):
    return k * np.spacing(max(abs(v), np.finfo(float).tiny))


def verify_agreement(family: MapFamily, u, trials: int = 100, seed: int = 0) -> AgreementReport:
    """Empirically check the weak-agreement inequality and its integral form.

    Random axis-aligned boxes (continuous) or random subsets (discrete) play
    the role of E; random non-negative simple functions play g.  Discrete
    spaces are checked in exact rational arithmetic.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    if family.finite_discrete:
        return _verify_discrete(family, u, trials, rng)
    return _verify_continuous(family, u, trials, rng)


def _verify_discrete(family, u, trials, rng):
    dom, cod = family.domain_space, family.codomain_space
    m = family.exact_agreement_factor(u) if not isinstance(family, CustomMap) or family._m is None \
        else Fraction(float(family._m(u)))
    w = dom.point_masses(exact=True)
    w2 = cod.point_masses(exact=True)
    img = np.asarray(cod.carrier.index_of(family.apply(u, dom.points()))).tolist()
    ncod = len(w2)
    worst_set = worst_g = None
    for _ in range(trials):
        member = rng.random(ncod) < 0.5
        lhs = sum((w[i] for i, j in enumerate(img) if member[j]), Fraction(0))
        rhs = sum((w2[j] for j in range(ncod) if member[j]), Fraction(0)) / m
        v = lhs - rhs
        worst_set = v if worst_set is None else max(worst_set, v)
        # simple function: a few nonnegative levels on random subsets
        g = [Fraction(0)] * ncod
        for _ in range(rng.integers(1, 4)):
            c = Fraction(float(rng.random()))
            sel = rng.random(ncod) < 0.5
            g = [gi + c if s else gi for gi, s in zip(g, sel)]
        lhs = sum((w[i] * g[j] for i, j in enumerate(img)), Fraction(0))
        rhs = sum((w2[j] * g[j] for j in range(ncod)), Fraction(0)) / m
        v = lhs - rhs
        worst_g = v if worst_g is None else max(worst_g, v)
    ok = worst_set <= 0 and worst_g <= 0
    return AgreementReport(float(worst_set), float(worst_g), trials, 0.0, ok, "exact-rational")


def _random_box(rng, lo, hi):
    a = rng.uniform(lo, hi)
    b = rng.uniform(lo, hi)
    return np.minimum(a, b), np.maximum(a, b)


def _verify_continuous(family, u, trials, rng):
    m = float(np.asarray(family.agreement_factor(u)))
    lo_w, hi_w = _window(family.codomain_space.carrier)
    worst_set = worst_g = -math.inf
    max_tol = 0.0
    ok = True
    method = "exact"
    for _ in range(trials):
        nboxes = int(rng.integers(1, 4))
        boxes = [_random_box(rng, lo_w, hi_w) for _ in range(nboxes + 1)]
        coeffs = rng.random(nboxes)
        # first box alone: the set inequality; the rest: a simple function
        set_box = boxes[0]
        g_boxes = boxes[1:]
        pre = family.preimage_measure(u, *set_box)
        vol = float(np.prod(set_box[1] - set_box[0]))
        if pre is not None:
            lhs, sig = pre, 0.0
        else:
            lhs, sig = _mc_preimage(family, u, [set_box], [1.0], rng)
            method = "monte-carlo"
        rhs = vol / m
        tol = 3 * sig if sig > 0 else _ulps(max(lhs, rhs))
        worst_set = max(worst_set, lhs - rhs)
        ok &= (lhs - rhs) <= tol
        max_tol = max(max_tol, tol)

        pres = [family.preimage_measure(u, *b) for b in g_boxes]
        rhs = sum(c * float(np.prod(b[1] - b[0])) for c, b in zip(coeffs, g_boxes)) / m
        if all(p is not None for p in pres):
            lhs, sig = float(sum(c * p for c, p in zip(coeffs, pres))), 0.0
        else:
            lhs, sig = _mc_preimage(family, u, g_boxes, coeffs, rng)
            method = "monte-carlo"
        tol = 3 * sig if sig > 0 else _ulps(max(lhs, rhs), 2 * nboxes + 2)
        worst_g = max(worst_g, lhs - rhs)
        ok &= (lhs - rhs) <= tol
        max_tol = max(max_tol, tol)
    return AgreementReport(worst_set, worst_g, trials, max_tol, bool(ok), method)


def _mc_preimage(family, u, boxes, coeffs, rng):
    """Monte-Carlo estimate of ``int g(A(u)x) dnu(x)`` for ``g = sum c_j 1_{E_j}``."""
    bbs = [family.preimage_bounding_box(u, *b) for b in boxes]
    if any(bb is None for bb in bbs):
        raise PreimageUnavailable(
            "family supplies neither a closed-form preimage measure nor a preimage bounding box"
        )
    lo = np.min([bb[0] for bb in bbs], axis=0)
    hi = np.max([bb[1] for bb in bbs], axis=0)
    extent = np.clip(hi - lo, 0.0, None)
    vol = float(np.prod(extent))
    if vol == 0.0:
        return 0.0, 0.0
    x = rng.uniform(lo, hi, size=(_MC_SAMPLES, len(lo)))
    pts = x[:, 0] if isinstance(family.domain_space.carrier, Interval) else x
    y = np.asarray(family.apply(u, pts), dtype=float).reshape(_MC_SAMPLES, -1)
    g = np.zeros(_MC_SAMPLES)
    for c, (a, b) in zip(coeffs, boxes):
        g += c * np.all((y >= a) & (y <= b), axis=1)
    est = vol * g.mean()
    sig = vol * g.std(ddof=1) / math.sqrt(_MC_SAMPLES)
    return float(est), float(max(sig, 0.0))
