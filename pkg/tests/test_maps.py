import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hausdorff import (CustomMap, CyclicAutomorphism, MatrixDilation, MeasureSpace, OutOfCarrier,
                       PreimageUnavailable, ScalarDilation, agreement_factor, apply_map,
                       verify_agreement)

HALFLINE = MeasureSpace.interval(0, math.inf)
PLANE = MeasureSpace.box([-math.inf] * 2, [math.inf] * 2)


def test_apply_map_examples():
    assert apply_map(ScalarDilation(HALFLINE), 0.5, 2.0) == 1.0
    assert apply_map(CyclicAutomorphism(5, [2]), 2, 4) == 3
    np.testing.assert_array_equal(apply_map(MatrixDilation([2 * np.eye(2)], PLANE), 0, [1.0, 1.0]),
                                  [2.0, 2.0])


def test_out_of_carrier():
    unit = MeasureSpace.interval(0, 1)
    wide = MeasureSpace.interval(0, 4)
    fam = ScalarDilation(wide, unit)
    assert apply_map(fam, 0.25, 2.0) == 0.5
    with pytest.raises(OutOfCarrier):
        apply_map(fam, 1.0, 2.0)


def test_agreement_factor_examples():
    assert agreement_factor(ScalarDilation(HALFLINE), 0.25) == 0.25
    assert agreement_factor(ScalarDilation(PLANE), -0.5) == 0.25
    assert agreement_factor(CyclicAutomorphism(12, [5]), 5) == 1.0
    assert agreement_factor(MatrixDilation([[[2, 0], [0, 3]]], PLANE), 0) == 6.0


def test_agreement_factor_exact_on_weighted_groups():
    # counting measure on the target, twice the mass on the source: m = 2
    g1 = MeasureSpace.group(5, measure="counting")
    g2 = MeasureSpace.group(5, measure="weighted", weights=[2.0] * 5)
    assert CyclicAutomorphism(5, [2], g1, g2).agreement_factor(2) == 2.0


def test_constructor_checks():
    with pytest.raises(ValueError):
        MatrixDilation([[[1, 1], [1, 1]]], PLANE)
    with pytest.raises(ValueError):
        CyclicAutomorphism(12, [4])
    with pytest.raises(ValueError):
        MatrixDilation([[[2, 0], [0, 1]]], MeasureSpace.group(4, 2))  # det 2 not a unit mod 4
    with pytest.raises(ValueError):
        CustomMap(lambda u, x: x, lambda u: -1.0, HALFLINE).agreement_factor(1.0)


def test_verify_agreement_examples():
    rep = verify_agreement(ScalarDilation(HALFLINE), 2.0, trials=50)
    assert rep.within_tolerance and rep.method == "exact"
    assert ScalarDilation(HALFLINE).preimage_measure(2.0, 0.0, 1.0) == 0.5

    fam = CyclicAutomorphism(5, [2])
    rep = verify_agreement(fam, 2, trials=50)
    assert rep.within_tolerance and rep.method == "exact-rational"
    # preimage of {1, 3} under x -> 2x is {3, 4}
    pre = [x for x in range(5) if fam.apply(2, x) in (1, 3)]
    assert pre == [3, 4]
    assert rep.max_violation <= 0.0

    md = MatrixDilation([2 * np.eye(2)], PLANE)
    assert md.preimage_measure(0, [0.0, 0.0], [1.0, 1.0]) == 0.25
    assert verify_agreement(md, 0, trials=50).within_tolerance


def test_verify_agreement_detects_a_bad_factor():
    # claim m = 4 for u -> 2x on the half line; the truth is 2
    bad = CustomMap(lambda u, x: u * x, lambda u: 2.0 * u, HALFLINE,
                    preimage_measure=lambda u, lo, hi: float(np.prod(np.subtract(hi, lo))) / u)
    rep = verify_agreement(bad, 2.0, trials=20)
    assert not rep.within_tolerance
    assert rep.max_violation > 0


def test_custom_without_preimage():
    fam = CustomMap(lambda u, x: u * x, lambda u: u, HALFLINE)
    with pytest.raises(PreimageUnavailable):
        verify_agreement(fam, 2.0, trials=1)


def test_monte_carlo_path():
    sq = MeasureSpace.box([0.0, 0.0], [1.0, 1.0])
    fam = MatrixDilation([[[1.0, 0.5], [0.2, 1.5]]], sq, PLANE)
    rep = verify_agreement(fam, 0, trials=20, seed=3)
    assert rep.method == "monte-carlo" and rep.within_tolerance and rep.tolerance > 0


def test_verify_agreement_reproducible():
    fam = MatrixDilation([[[1.0, 0.5], [0.2, 1.5]]], MeasureSpace.box([0.0, 0.0], [1.0, 1.0]), PLANE)
    assert verify_agreement(fam, 0, 10, seed=9) == verify_agreement(fam, 0, 10, seed=9)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(2, 40), data=st.data())
def test_cyclic_composition(n, data):
    units = [k for k in range(1, n) if math.gcd(k, n) == 1]
    k1 = data.draw(st.sampled_from(units))
    k2 = data.draw(st.sampled_from(units))
    fam = CyclicAutomorphism(n, sorted({k1, k2, (k1 * k2) % n}))
    xs = np.arange(n)
    np.testing.assert_array_equal(apply_map(fam, k1, apply_map(fam, k2, xs)),
                                  apply_map(fam, (k1 * k2) % n, xs))


def test_matrix_dilation_on_group_is_a_bijection():
    g = MeasureSpace.group(5, 2)
    fam = MatrixDilation([[[1, 2], [3, 4]]], g)  # det -2, a unit mod 5
    img = fam.apply(0, g.points())
    assert len({tuple(r) for r in np.asarray(img).tolist()}) == 25
    assert fam.agreement_factor(0) == 1.0
