"""Upper bounds on the ``L^q(nu') -> L^p(nu)`` norm of a Hausdorff operator."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import Divergent, HypothesesViolated, SingularMatrix
from .kernel import (REGIME_INF_INF, REGIME_Q_GT_P, REGIME_Q_INF, Exponents, Kernel,
                     ext_real, mixed_norm)
from .maps import CustomMap, CyclicAutomorphism, MatrixDilation
from .measure import (FiniteGroupCarrier, MeasureSpace, NormalizedHaar, QuadratureSpec,
                      weighted_sum)
from .operator import OperatorInstance, _probe

__all__ = ["BoundResult", "theoretical_bound", "discrete_hausdorff_bound",
           "exact_norm_compact_group"]

_FORMULAS = {
    REGIME_Q_GT_P: "int |Phi(u,.)|_{L^{p r}(nu)} m(u)^(-1/q) dmu(u),  r = q/(q-p)",
    REGIME_Q_INF: "int |Phi(u,.)|_{L^p(nu)} dmu(u)",
    REGIME_INF_INF: "sup_x int |Phi(u,x)| dmu(u)",
}
_FORMULA_EQ = "int |Phi(u,.)|_{L^inf(nu)} m(u)^(-1/p) dmu(u)"


@dataclass(frozen=True)
class BoundResult:
    value: float
    regime: str
    formula: str
    divergent: bool = False
    error: float = 0.0
    note: str = ""

    def __str__(self):
        if self.divergent:
            return f"divergent ({self.regime}): {self.note}"
        return f"{self.value!r} ({self.regime})"


def _majorant_kernel(op, majorant):
    maj = Kernel.one_var(lambda u: np.abs(np.asarray(majorant(u), dtype=float)),
                         nonnegative=True, description="majorant")
    u = _probe(op.omega)
    x = _probe(op.target)
    phi = np.abs(op.kernel.grid(u, x))
    bound = maj.grid(u, x)
    if np.any(phi > bound * (1 + 1e-12)):
        raise HypothesesViolated("declared majorant is smaller than |Phi| on the probe grid")
    return maj


def theoretical_bound(op: OperatorInstance, quad: Optional[QuadratureSpec] = None,
                      majorant: Optional[Callable] = None) -> BoundResult:
    """Mixed-norm bound for the exponent regime of ``op``.

    A divergent mixed norm is reported as a result with ``divergent=True``
    and ``value=inf``: no bound is claimed, but nothing is raised.
    ``majorant`` is an optional ``phi(u) >= |Phi(u, x)|`` that replaces the
    kernel after a probe-grid check.
    """
    e = op.exponents
    kernel = op.kernel if majorant is None else _majorant_kernel(op, majorant)
    formula = _FORMULAS.get(e.regime, _FORMULA_EQ)
    if majorant is not None:
        formula += "  [with declared majorant]"
    try:
        value, err = mixed_norm(kernel, op.omega, op.target, op.family, e, quad,
                                full_output=True)
    except Divergent as exc:
        return BoundResult(math.inf, e.regime, formula, divergent=True, error=math.inf,
                           note=f"finiteness hypothesis fails, no bound claimed: {exc}")
    return BoundResult(float(value), e.regime, formula, error=float(err))


def discrete_hausdorff_bound(phi: Mapping[int, float], matrices, p) -> float:
    """``sum_k |phi(k)| |det A_k|^{-1/p}`` over the finite index set of ``phi``.

    ``matrices`` is a mapping ``k -> A_k`` or a sequence aligned with
    ``sorted(phi)``.  Summation runs in increasing ``k`` through the same
    path as :func:`theoretical_bound`, so the two agree exactly.
    """
    keys = sorted(int(k) for k in phi)
    if isinstance(matrices, Mapping):
        mats = [np.atleast_2d(np.asarray(matrices[k], dtype=float)) for k in keys]
    else:
        mats = [np.atleast_2d(np.asarray(a, dtype=float)) for a in matrices]
        if len(mats) != len(keys):
            raise ValueError("one matrix per index of phi")
    for k, a in zip(keys, mats):
        if a.shape[0] != a.shape[1] or np.linalg.det(a) == 0:
            raise SingularMatrix(f"A_{k} is singular or not square")
    op = discrete_hausdorff_operator(phi, dict(zip(keys, mats)), p)
    return theoretical_bound(op).value


def discrete_hausdorff_operator(phi: Mapping[int, float], matrices: Mapping[int, Sequence],
                                p, q=None) -> OperatorInstance:
    """``(H f)(x) = sum_k phi(k) f(A_k x)`` on ``R^d`` with Lebesgue measure."""
    keys = sorted(int(k) for k in phi)
    mats = [np.atleast_2d(np.asarray(matrices[k], dtype=float)) for k in keys]
    d = mats[0].shape[0]
    space = MeasureSpace.box([-math.inf] * d, [math.inf] * d) if d > 1 else \
        MeasureSpace.interval(-math.inf, math.inf)
    omega = MeasureSpace.index(keys)
    fam = MatrixDilation(mats, space, indices=keys)
    kern = Kernel.weights(omega, [phi[k] for k in keys], description="phi")
    p = ext_real(p)
    return OperatorInstance(omega, space, space, fam, kern, Exponents(p, p if q is None else q))


def _is_group_automorphism(fam, params, n, rank):
    if isinstance(fam, CyclicAutomorphism):
        return True
    if isinstance(fam, MatrixDilation) and fam.modulus == n:
        return True  # determinant already checked to be a unit mod n
    if not isinstance(fam, CustomMap):
        return False
    pts = fam.domain_space.points()
    for u in params:
        img = np.asarray(fam.apply(u, pts)).reshape(len(pts), -1) % n
        if len({tuple(r) for r in img.tolist()}) != len(pts):
            return False
        # additivity on generators is enough for a group homomorphism
        gens = np.eye(rank, dtype=np.int64) if rank > 1 else np.array([1])
        for g in gens:
            lhs = np.asarray(fam.apply(u, (pts + g) % n)).reshape(len(pts), -1) % n
            rhs = (img + np.asarray(fam.apply(u, g)).reshape(1, -1)) % n
            if not np.array_equal(lhs, rhs):
                return False
    return True


def exact_norm_compact_group(op: OperatorInstance) -> float:
    """``|Phi|_{L^1(mu)}``, the exact norm for automorphisms of a finite group.

    Requires ``S = S'`` a finite group under normalized Haar measure, ``Phi``
    one-variable and nonnegative, and ``A(u)`` automorphisms.  Raises
    HypothesesViolated otherwise.
    """
    src, tgt = op.source, op.target
    if src != tgt or not isinstance(src.carrier, FiniteGroupCarrier):
        raise HypothesesViolated("source and target must be the same finite group")
    if not isinstance(src.measure, NormalizedHaar):
        raise HypothesesViolated("the group must carry normalized Haar measure")
    if not op.omega.is_discrete:
        raise HypothesesViolated("Omega must be discrete")
    c = src.carrier
    fam = op.family
    if not _is_group_automorphism(fam, op.omega.points().tolist(), c.order, c.rank):
        raise HypothesesViolated("A(u) must be automorphisms of the group")
    vals = op.kernel.grid(op.omega.points(), src.points())
    if np.any(vals < 0):
        raise HypothesesViolated("Phi changes sign")
    if np.any(vals != vals[:, :1]):
        raise HypothesesViolated("Phi depends on x")
    return weighted_sum(op.omega.point_masses(), vals[:, 0])
