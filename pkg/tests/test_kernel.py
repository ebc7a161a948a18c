import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hausdorff import (Divergent, Exponents, InadmissibleExponents, Kernel, MeasureSpace,
                       QuadratureSpec, ScalarDilation, conjugacy_r, mixed_norm, one_var_norm)
from hausdorff.kernel import INF

UNIT = MeasureSpace.interval(0, 1)
HALFLINE = MeasureSpace.interval(0, math.inf)
ONE = Kernel.constant(1.0)


def test_conjugacy_examples():
    r, rp = conjugacy_r(Exponents(2, 4))
    assert (r, rp) == (2, 2) and 2 * rp == 4
    assert conjugacy_r(Exponents(3, 3))[0] == INF
    assert conjugacy_r(Exponents(2, INF))[0] == 1
    assert conjugacy_r(Exponents(INF, INF)) == (1, INF)


@pytest.mark.parametrize("p, q", [(2, 1), (0.5, 0.5), (INF, 2), (0.9, 3)])
def test_inadmissible(p, q):
    with pytest.raises(InadmissibleExponents):
        Exponents(p, q)


def _sweep():
    vals = [Fraction(1), Fraction(3, 2), Fraction(2), Fraction(7, 3), Fraction(4), Fraction(10)]
    for p in vals + [INF]:
        for q in vals + [INF]:
            try:
                yield Exponents(p, q)
            except InadmissibleExponents:
                pass


def test_conjugacy_identities_exact():
    n = 0
    for e in _sweep():
        n += 1
        r, rp = conjugacy_r(e)
        inv = lambda v: Fraction(0) if v == INF else 1 / v  # noqa: E731
        assert inv(r) + inv(rp) == 1
        if e.p != INF:
            assert (INF if rp == INF else e.p * rp) == e.q
    assert n >= 20


def test_mixed_norm_cesaro():
    fam = ScalarDilation(HALFLINE)
    assert mixed_norm(ONE, UNIT, HALFLINE, fam, Exponents(2, 2)) == pytest.approx(2.0, abs=1e-6)
    assert mixed_norm(ONE, UNIT, HALFLINE, fam, Exponents(3, 3)) == pytest.approx(1.5, abs=1e-6)
    assert mixed_norm(ONE, UNIT, HALFLINE, fam, Exponents(INF, INF)) == pytest.approx(1.0, abs=1e-12)


def test_mixed_norm_two_variable():
    k = Kernel(lambda u, x: u * x)
    val = mixed_norm(k, UNIT, UNIT, None, Exponents(1, 2))
    assert val == pytest.approx(1 / (2 * math.sqrt(3)), abs=1e-6)


def test_mixed_norm_q_inf_regime():
    # int_0^1 |u x|_{L^2(dx)} du = 1/(2 sqrt 3) again, now with q = inf
    k = Kernel(lambda u, x: u * x)
    assert mixed_norm(k, UNIT, UNIT, None, Exponents(2, INF)) == \
        pytest.approx(1 / (2 * math.sqrt(3)), abs=1e-6)


def test_mixed_norm_sup_regime_two_variable():
    # sup_x int_0^1 u x du = 1/2 at x = 1 (grid max, approached from below)
    k = Kernel(lambda u, x: u * x)
    val = mixed_norm(k, UNIT, UNIT, None, Exponents(INF, INF))
    assert 0.5 - 1e-3 <= val <= 0.5


def test_one_var_norm_examples():
    fam = ScalarDilation(HALFLINE)
    assert one_var_norm(ONE, UNIT, fam, 2) == pytest.approx(2.0, abs=1e-6)
    assert one_var_norm(ONE, UNIT, None, INF) == pytest.approx(1.0, abs=1e-14)
    ks = list(range(-30, 31))
    omega = MeasureSpace.index(ks)
    phi = Kernel.weights(omega, [2.0 ** -abs(k) for k in ks])
    for p in (1, 2, 5, INF):
        assert one_var_norm(phi, omega, None, p) == 3 - 2.0 ** -29


def test_divergent_mixed_norm():
    # p = q = 1 for the Cesaro kernel: int_0^1 u^-1 du diverges
    with pytest.raises(Divergent):
        mixed_norm(ONE, UNIT, HALFLINE, ScalarDilation(HALFLINE), Exponents(1, 1))


def test_kernel_flags_are_checked():
    with pytest.raises(ValueError):
        Kernel(lambda u, x: u - 0.5, nonnegative=True, probe=(np.linspace(0, 1, 5), np.ones(3)))
    with pytest.raises(ValueError):
        Kernel(lambda u, x: u + x, one_variable=True, probe=(np.ones(2), np.linspace(0, 1, 3)))


@settings(max_examples=25, deadline=None)
@given(c=st.floats(-100, 100).filter(lambda c: abs(c) > 1e-2),
       e=st.sampled_from([(1, 2), (2, 4), (2, INF), (1.5, 1.5), (INF, INF)]))
def test_mixed_norm_homogeneity(c, e):
    k = Kernel(lambda u, x: np.exp(-u) * (1 + x))
    q = QuadratureSpec(node_budget=256)
    base = mixed_norm(k, UNIT, UNIT, None, Exponents(*e), q)
    scaled = mixed_norm(k.scaled(c), UNIT, UNIT, None, Exponents(*e), q)
    # kernel values are rounded after scaling; see the ledger for why 2 ulps is not attainable
    assert abs(scaled - abs(c) * base) <= 4 * np.spacing(abs(c) * base)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(0.0, 1.0), e=st.sampled_from([(1, 2), (2, 3), (2, INF), (2, 2), (INF, INF)]))
def test_mixed_norm_kernel_monotone(a, e):
    k1 = Kernel(lambda u, x: a * u * x)
    k2 = Kernel(lambda u, x: u * x + u)  # >= k1 on the unit square
    q = QuadratureSpec(node_budget=256)
    v1, err1 = mixed_norm(k1, UNIT, UNIT, None, Exponents(*e), q, full_output=True)
    v2, err2 = mixed_norm(k2, UNIT, UNIT, None, Exponents(*e), q, full_output=True)
    assert v1 <= v2 + err1 + err2


@pytest.mark.parametrize("p", [1, 1.5, 2, 4])
def test_regimes_reduce_to_one_var_norm_on_probability_space(p):
    # constant-in-x kernel on a unit-mass S: |Phi(u, .)|_{L^s} = |phi(u)| for every s
    phi = Kernel.one_var(lambda u: np.exp(u))
    two_var = Kernel(lambda u, x: np.exp(u) + 0 * x)
    e = Exponents(p, p)
    ref = one_var_norm(phi, UNIT, 1.0, p)
    assert mixed_norm(two_var, UNIT, UNIT, 1.0, e) == pytest.approx(ref, rel=1e-9)
    assert mixed_norm(phi, UNIT, UNIT, 1.0, e) == pytest.approx(ref, rel=1e-12)
    assert mixed_norm(two_var, UNIT, UNIT, 1.0, Exponents(p, 2 * p)) == pytest.approx(ref, rel=1e-9)
