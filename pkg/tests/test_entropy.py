import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ttnsbounds.dense import SchmidtSpectrum
from ttnsbounds.errors import (AlphaOutOfRange, BadDistribution, BadEps, BadRange, Infeasible,
                               NoValidAlpha, NonpositiveAlpha)
from ttnsbounds.entropy import (EdgeDistribution, bond_dim_lower_bound, bond_dim_upper_bound,
                                entropy_upper_via_spread, error_lower_bound,
                                error_lower_bound_literal, error_upper_bound, extremal_spread,
                                majorizes, majorizing_extremal, optimize_alpha, renyi_entropy,
                                upper_alpha_threshold, upper_alpha_validity)

LN2 = 0.6931471805599453
GHZ_EDGE = EdgeDistribution(None, [0.5, 0.5], 2)

probabilities = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=12).filter(
    lambda xs: sum(xs) > 1e-3).map(lambda xs: np.array(xs) / sum(xs))


@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0, 2.0, 7.0])
def test_renyi_trivial(alpha):
    assert renyi_entropy([0.5, 0.5], alpha) == pytest.approx(LN2, abs=1e-15)
    assert renyi_entropy([1.0], alpha) == 0.0


def test_renyi_examples():
    # -ln 0.82 from a 40-digit evaluation: 0.19845093872383825...
    assert renyi_entropy([0.9, 0.1], 2) == pytest.approx(0.19845093872383825, abs=1e-15)
    # 2 ln(sqrt .7 + sqrt .2 + sqrt .1) = 0.94013398953978592...
    assert renyi_entropy([0.7, 0.2, 0.1], 0.5) == pytest.approx(0.9401339895397859, abs=1e-14)
    assert renyi_entropy([0.5, 0.5, 0.0], 0.25) == pytest.approx(LN2, abs=1e-15)


def test_renyi_errors():
    with pytest.raises(NonpositiveAlpha):
        renyi_entropy([1.0], 0)
    with pytest.raises(BadDistribution):
        renyi_entropy([0.5, 0.4], 2)
    with pytest.raises(BadDistribution):
        renyi_entropy([1.2, -0.2], 2)
    with pytest.raises(BadDistribution):
        EdgeDistribution(None, [0.5, 0.3, 0.2], 2)


@settings(max_examples=100, deadline=None)
@given(probabilities)
def test_renyi_non_increasing_in_alpha(p):
    values = [renyi_entropy(p, a) for a in (0.25, 0.5, 0.9, 1.0, 1.1, 2.0, 4.0)]
    for a, b in zip(values, values[1:]):
        assert b <= a + 1e-12
    assert values[0] <= math.log(np.count_nonzero(p)) + 1e-12


@settings(max_examples=100, deadline=None)
@given(probabilities, st.integers(0, 2**32 - 1))
def test_schur_concavity(p, seed):
    # averaging with a doubly stochastic mix yields a majorized distribution
    rng = np.random.default_rng(seed)
    k = len(p)
    perm = rng.permutation(k)
    t = rng.uniform()
    q = t * p + (1 - t) * p[perm]
    assert majorizes(p, q)
    for alpha in (0.5, 1.0, 2.0, 4.0):
        assert renyi_entropy(p, alpha) <= renyi_entropy(q, alpha) + 1e-12


def test_extremal_spread_examples():
    np.testing.assert_allclose(extremal_spread(2, 0.1, 4), [0.45, 0.45, 0.05, 0.05], atol=1e-16)
    np.testing.assert_allclose(extremal_spread(3, 0.0, 5), [1 / 3] * 3 + [0, 0])
    np.testing.assert_allclose(extremal_spread(1, 0.5, 2), [0.5, 0.5])
    with pytest.raises(BadRange):
        extremal_spread(4, 0.1, 4)
    with pytest.raises(BadRange):
        extremal_spread(1, 1.0, 4)


def _competitor(rng, m, delta, d):
    head = rng.dirichlet(np.ones(m)) * (1 - delta)
    tail = rng.dirichlet(np.ones(d - m)) * delta
    # keep the head above the tail so the profile is (M, delta)
    if tail.max() > head.min():
        return None
    return np.sort(np.concatenate([head, tail]))[::-1]


@pytest.mark.parametrize("m,delta,d", [(1, 0.05, 4), (2, 0.1, 4), (3, 0.2, 8), (4, 0.02, 16)])
def test_spread_is_majorized_by_competitors(rng, m, delta, d):
    rho = extremal_spread(m, delta, d)
    seen = 0
    while seen < 200:
        q = _competitor(rng, m, delta, d)
        if q is None:
            continue
        seen += 1
        assert majorizes(q, rho)


def test_spread_chain_ghz():
    chain = entropy_upper_via_spread(GHZ_EDGE, 1, 2.0)
    assert chain.entropy == pytest.approx(LN2, abs=1e-15)
    assert chain.spread_entropy == pytest.approx(LN2, abs=1e-15)
    assert chain.bound == pytest.approx(1.3862943611198906, abs=1e-15)
    assert chain.delta == 0.5 and chain.holds
    with pytest.raises(AlphaOutOfRange):
        entropy_upper_via_spread(GHZ_EDGE, 1, 1.0)


@settings(max_examples=60, deadline=None)
@given(probabilities, st.integers(1, 6), st.sampled_from([1.5, 2.0, 3.0]))
def test_spread_chain_random(p, m, alpha):
    dist = EdgeDistribution(None, p, len(p) + 2)
    chain = entropy_upper_via_spread(dist, m, alpha)
    assert chain.holds, chain


def test_error_lower_bound_examples():
    assert error_lower_bound(math.log(3), 3, 2.0) == pytest.approx(0.0, abs=1e-15)
    assert error_lower_bound(LN2, 1, 2.0) == pytest.approx(0.2928932188134524, abs=1e-15)
    assert error_lower_bound(0.1, 4, 2.0) == 0.0
    with pytest.raises(AlphaOutOfRange):
        error_lower_bound(LN2, 1, 1.0)
    # the M / S variant differs from the e^S form
    assert error_lower_bound_literal(LN2, 1, 2.0) != pytest.approx(0.2928932188134524)


def test_error_upper_bound_examples():
    ev = error_upper_bound(LN2, 2, 0.5, 0.0)
    assert ev.valid and ev.value == pytest.approx(2.0, abs=1e-15)
    s = renyi_entropy([0.7, 0.2, 0.1], 0.5)
    ev = error_upper_bound(s, 2, 0.5, 0.1)
    # e^{S_1/2} = (sqrt .7 + sqrt .2 + sqrt .1)^2 = 2.5603244520423254...
    assert ev.valid and ev.value == pytest.approx(2.560324452042325, abs=1e-14)
    assert upper_alpha_threshold(0.1, 2) == pytest.approx(0.2 / 0.9)
    bad = error_upper_bound(s, 2, 0.2, 0.1)
    assert not bad.valid and bad.value is None
    assert not upper_alpha_validity(0.5, 0.0, 1)[0]
    assert upper_alpha_threshold(0.5, 1) is None


def test_bond_dim_bounds():
    assert bond_dim_upper_bound(LN2, 0.01, 0.5) == pytest.approx(201.0, rel=1e-14)
    assert bond_dim_upper_bound(LN2, 1 - 1e-15, 0.5) == pytest.approx(3.0, rel=1e-12)
    # GHZ, delta = 0.5, alpha = 2: 2 * 0.25 = 0.5 <= 1
    assert bond_dim_lower_bound(LN2, 0.5, 2.0) == pytest.approx(0.5, rel=1e-14)
    with pytest.raises(AlphaOutOfRange):
        bond_dim_upper_bound(LN2, 0.1, 1.5)
    with pytest.raises(BadEps):
        bond_dim_upper_bound(LN2, 0.0, 0.5)
    with pytest.raises(AlphaOutOfRange):
        bond_dim_lower_bound(LN2, 0.1, 0.5)


def test_majorizing_extremal_examples():
    np.testing.assert_allclose(majorizing_extremal(2, 0.2, 0.2), [0.6, 0.2, 0.2], atol=1e-15)
    np.testing.assert_allclose(majorizing_extremal(3, 0.0, 0.1), [0.8, 0.1, 0.1], atol=1e-15)
    rho = majorizing_extremal(3, 0.25, 0.1)
    np.testing.assert_allclose(rho, [0.55, 0.1, 0.1, 0.1, 0.1, 0.05], atol=1e-15)
    assert rho.sum() == pytest.approx(1.0)
    with pytest.raises(Infeasible):
        majorizing_extremal(4, 0.3, 0.2)


def _admissible(m, eps, p):
    return 1 - eps - (m - 1) * p >= p


def test_majorizing_extremal_meets_entropy_floor():
    checked = 0
    for m in (2, 3, 4, 6):
        for eps in (0.01, 0.05, 0.1, 0.2):
            for p in np.linspace(0.01, 0.4, 14):
                if not _admissible(m, eps, p) or eps / p > 200:
                    continue
                rho = majorizing_extremal(m, eps, float(p))
                assert rho.sum() == pytest.approx(1.0, abs=1e-12)
                assert np.all(np.diff(rho) <= 1e-15)
                assert float(np.sum(rho[m:])) == pytest.approx(eps, abs=1e-12)
                assert rho[m - 1] == pytest.approx(p)
                thr = upper_alpha_threshold(eps, m)
                for alpha in np.linspace(thr, 0.99, 9):
                    floor = (math.log((m - 1) ** (1 - alpha) * eps**alpha)) / (1 - alpha)
                    assert renyi_entropy(rho, alpha) >= floor - 1e-12
                    checked += 1
    assert checked > 500


def test_optimize_alpha_lower():
    best = optimize_alpha(GHZ_EDGE, 1, "lower", [1.5, 2, 8])
    assert best.alpha == 8.0
    # 1 - 2^{-7/8} = 0.45474613366737117...
    assert best.value == pytest.approx(0.45474613366737117, abs=1e-15)
    tie = optimize_alpha(EdgeDistribution(None, [0.5, 0.5], 4), 2, "lower", [4, 1.5, 2])
    assert tie.alpha == 1.5 and tie.value == 0.0


def test_optimize_alpha_upper():
    dist = EdgeDistribution(None, [0.7, 0.2, 0.1], 4)
    best = optimize_alpha(dist, 2, "upper", [0.3, 0.5, 0.9])
    values = [error_upper_bound(renyi_entropy(dist, a), 2, a, 0.1).value for a in (0.3, 0.5, 0.9)]
    assert best.value == min(values)
    assert best.value >= 0.1
    with pytest.raises(NoValidAlpha):
        optimize_alpha(dist, 2, "upper", [0.05, 0.1])
    with pytest.raises(NoValidAlpha):
        optimize_alpha(dist, 2, "lower", [0.5])


def test_from_spectrum_normalizes():
    spec = SchmidtSpectrum(3, np.array([0.6, 0.6]))
    dist = EdgeDistribution.from_spectrum(spec, 4)
    np.testing.assert_allclose(dist.probs, [0.5, 0.5])
    assert dist.edge == 3 and dist.truncation_error(1) == pytest.approx(0.5)
