import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from hausdorff import (CyclicAutomorphism, EmptyFamily, Exponents, GaussianBump, GridVector, Kernel,
                       MatrixDilation, MeasureSpace, NoConvergence, ScalarDilation, StepFunction,
                       TruncatedPower, divergence_probe, empirical_norm_continuous, empirical_norm_matrix,
                       empirical_norm_operator, theoretical_bound, to_matrix)
from hausdorff.estimator import _spectral, ascent_norm, witness_ratio
from hausdorff.kernel import INF
from hausdorff.operator import OperatorInstance, weighted_matrix

UNIT = MeasureSpace.interval(0, 1)
HALFLINE = MeasureSpace.interval(0, math.inf)


def cesaro(p=2, omega=UNIT, source=HALFLINE, kernel=None):
    return OperatorInstance(omega, source, source, ScalarDilation(source),
                            kernel or Kernel.constant(1.0), Exponents(p, p))


def z5(measure="haar", weights=(0.3, 0.7), p=2, q=None):
    g = MeasureSpace.group(5, measure=measure)
    omega = MeasureSpace.index([1, 2])
    return OperatorInstance(omega, g, g, CyclicAutomorphism(5, [1, 2], g),
                            Kernel.weights(omega, weights), Exponents(p, p if q is None else q))


# matrices -------------------------------------------------------------------
@pytest.mark.parametrize("p", [1, 1.5, 2, 3, INF])
def test_identity(p):
    lb = empirical_norm_matrix(np.eye(4), p)
    assert lb.value == pytest.approx(1.0, abs=1e-12)
    assert witness_ratio(np.eye(4), lb.witness, p) == pytest.approx(lb.value, rel=1e-12)


def test_rank_one():
    lb = empirical_norm_matrix([[0.0, 2.0], [0.0, 0.0]], 2)
    assert lb.value == 2.0 and lb.exact


def test_z5_row_sums():
    assert empirical_norm_operator(z5(p=INF)).value == pytest.approx(1.0, abs=1e-15)
    assert empirical_norm_matrix(to_matrix(z5()), INF).value == pytest.approx(1.0, abs=1e-15)


def test_closed_forms_against_oracles():
    rng = np.random.default_rng(0)
    for _ in range(20):
        M = rng.normal(size=(4, 6))
        assert empirical_norm_matrix(M, 1).value == oracles.norm_1(M)
        assert empirical_norm_matrix(M, INF).value == pytest.approx(oracles.norm_inf(M), rel=1e-15)
        assert empirical_norm_matrix(M, 2).value == pytest.approx(oracles.norm_2(M), rel=1e-9)


def test_mixed_pairs_use_closed_forms():
    rng = np.random.default_rng(4)
    M = rng.normal(size=(3, 5))
    lb = empirical_norm_matrix(M, 3, 1)
    assert lb.exact and lb.value == max(oracles.lp(M[:, j], 3) for j in range(5))
    lb = empirical_norm_matrix(M, INF, 3)
    assert lb.exact
    assert lb.value == pytest.approx(max(oracles.lp(r, 1.5) for r in M), rel=1e-12)
    assert witness_ratio(M, lb.witness, INF, 3) == pytest.approx(lb.value, rel=1e-12)


def test_general_p_is_a_lower_bound_attained_by_its_witness():
    rng = np.random.default_rng(5)
    for _ in range(20):
        M = rng.normal(size=(5, 5))
        lb = empirical_norm_matrix(M, 3, 4)
        assert not lb.exact
        assert witness_ratio(M, lb.witness, 3, 4) == pytest.approx(lb.value, rel=1e-12)


def test_power_iteration_no_convergence():
    rng = np.random.default_rng(2)
    with pytest.raises(NoConvergence):
        _spectral(rng.normal(size=(6, 6)), max_iter=1)


def test_ascent_tie_break_prefers_first_restart():
    # identity: every start attains 1, so restart 0 (all ones) must win
    val, f = ascent_norm(np.eye(3), 3, restarts=8, seed=1)
    assert val == pytest.approx(1.0)
    assert np.allclose(np.abs(f), np.abs(f[0]))


def test_reproducible_lower_bound():
    rng = np.random.default_rng(8)
    M = rng.normal(size=(5, 5))
    assert empirical_norm_matrix(M, 3, 4, seed=11) == empirical_norm_matrix(M, 3, 4, seed=11)


# continuous -----------------------------------------------------------------
def test_cesaro_truncated_power_example():
    fam = TruncatedPower(alpha=(0.0, 0.45), support=(1e-60, 1.0))
    lb = empirical_norm_continuous(cesaro(), [fam], budget=8, seed=0)
    assert lb.value >= 1 / (1 - 0.5 + 0.05) - 1e-6
    assert lb.value <= 2.0


def test_zero_output_gives_zero():
    op = cesaro(kernel=Kernel.constant(0.0))
    lb = empirical_norm_continuous(op, [GaussianBump((1.0, 2.0), (0.1, 0.5), (0.0, math.inf))],
                                   budget=4)
    assert lb.value == 0.0


def test_empty_family():
    with pytest.raises(EmptyFamily):
        empirical_norm_continuous(cesaro(), [])


def test_gridvector_matches_matrix():
    op = z5()
    lb = empirical_norm_continuous(op, [GridVector(op.source)])
    assert lb.value == pytest.approx(empirical_norm_operator(op).value, abs=1e-9)


def test_step_functions_on_the_dyadic_grid():
    # sum_k 2^-|k| f(2^k x) on R: steps on a 2-adic grid are mapped to steps
    cuts = [2.0 ** j for j in range(-6, 7)]
    ks = range(-2, 3)
    line = MeasureSpace.interval(0, math.inf)
    omega = MeasureSpace.index(list(ks))
    fam = MatrixDilation([[[2.0 ** k]] for k in ks], line, indices=list(ks))
    op = OperatorInstance(omega, line, line, fam, Kernel.weights(omega, [2.0 ** -abs(k) for k in ks]),
                          Exponents(2, 2))
    lb = empirical_norm_continuous(op, [StepFunction(cuts)])
    bound = theoretical_bound(op).value
    assert 0 < lb.value <= bound


def test_cesaro_eps_monotone():
    values = []
    for eps in (0.2, 0.1, 0.05, 0.02):
        fam = TruncatedPower(alpha=(0.0, 0.5 - eps), support=(1e-60, 1.0))
        values.append(empirical_norm_continuous(cesaro(), [fam], budget=8, seed=0).value)
    assert all(b >= a - 1e-6 for a, b in zip(values, values[1:]))
    assert values[-1] >= 1.95 and values[-1] <= 2.0


def test_continuous_reproducible():
    fam = GaussianBump((0.1, 0.9), (0.02, 0.5), (0.0, 1.0))
    op = OperatorInstance(UNIT, UNIT, UNIT, ScalarDilation(UNIT),
                          Kernel(lambda u, x: u ** -0.25 * (1 + x), nonnegative=True), Exponents(2, 4))
    a = empirical_norm_continuous(op, [fam], budget=6, seed=3)
    b = empirical_norm_continuous(op, [fam], budget=6, seed=3)
    assert a == b


def _random_discrete(seed, p, q):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    units = [k for k in range(1, n) if math.gcd(k, n) == 1]
    mult = sorted(set(int(k) for k in rng.choice(units, size=min(3, len(units)))))
    src = MeasureSpace.group(n, measure="weighted", weights=rng.uniform(0.3, 2.0, n))
    tgt = MeasureSpace.group(n, measure="weighted", weights=rng.uniform(0.3, 2.0, n))
    omega = MeasureSpace.index(mult, rng.uniform(0.2, 1.0, len(mult)))
    return OperatorInstance(omega, src, tgt, CyclicAutomorphism(n, mult, tgt, src),
                            Kernel.table(omega, tgt, rng.normal(size=(len(mult), n))), Exponents(p, q))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000),
       e=st.sampled_from([(1, 1), (2, 2), (INF, INF), (1.5, 3), (2, INF), (3, 3)]))
def test_lower_bound_validity(seed, e):
    op = _random_discrete(seed, *e)
    grid = empirical_norm_continuous(op, [GridVector(op.source)], seed=seed).value
    mat = empirical_norm_operator(op, seed=seed).value
    bound = theoretical_bound(op).value
    assert grid <= mat + 1e-9
    assert max(grid, mat) <= bound + 1e-9 * max(1.0, bound)
    M = weighted_matrix(op)
    assert mat <= np.abs(M).sum() + 1e-12


# divergence -------------------------------------------------------------------
def test_divergence_examples():
    op = cesaro(1, source=UNIT)
    rep = divergence_probe(op, lambda t: t ** -1.25, 1.0, [1e-2, 1e-4, 1e-6])
    for e, v in zip(rep.eps, rep.values):
        assert v == pytest.approx(oracles.truncated_cesaro_value(e), rel=1e-9)
    assert rep.monotone_growth

    rep = divergence_probe(op, lambda t: t ** -0.5, 1.0, [1e-2, 1e-4, 1e-6, 1e-8])
    assert rep.values[-1] == pytest.approx(2.0, abs=1e-3) and not rep.monotone_growth

    rep = divergence_probe(op, lambda t: np.ones_like(t), 1.0, [1e-2, 1e-4, 1e-6])
    np.testing.assert_allclose(rep.values, [1 - 1e-2, 1 - 1e-4, 1 - 1e-6], rtol=1e-13)
    assert not rep.monotone_growth


def test_divergence_probe_rejects_bad_sequences():
    op = cesaro(1, source=UNIT)
    with pytest.raises(ValueError):
        divergence_probe(op, lambda t: t, 1.0, [1e-4, 1e-2])
    with pytest.raises(ValueError):
        divergence_probe(cesaro(omega=HALFLINE), lambda t: t, 1.0, [0.1])
