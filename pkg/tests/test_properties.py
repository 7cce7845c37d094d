import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammaln

from cycleweights import FamilyParams, build_weights, compute_norms
from cycleweights.exact import dist_K, dist_L1, dist_Rj, expected_K, factorial_moment
from cycleweights.weights import Family

import oracle

log_weights = st.lists(st.floats(-4.0, 4.0, allow_nan=False), min_size=1, max_size=7)


def custom_norms(lw):
    return compute_norms(build_weights(FamilyParams(Family.CUSTOM, custom_log_weights=lw), len(lw)))


@settings(max_examples=60, deadline=None)
@given(log_weights)
def test_h_matches_enumeration(lw):
    norms = custom_norms(lw)
    n = len(lw)
    _, h = oracle.enumerate_law(n, lambda j: math.exp(lw[j - 1]))
    assert math.isclose(norms.h(n), h, rel_tol=1e-11)


@settings(max_examples=60, deadline=None)
@given(log_weights)
def test_cycle_count_identities(lw):
    norms = custom_norms(lw)
    n = len(lw)
    # sum_j j E(R_j) = n and sum_j E(R_j) = E(K)
    means = [factorial_moment(norms, n, {j: 1}) for j in range(1, n + 1)]
    assert math.isclose(math.fsum(j * m for j, m in enumerate(means, 1)), n, rel_tol=1e-11)
    assert math.isclose(math.fsum(means), expected_K(norms, n), rel_tol=1e-11)
    assert math.isclose(dist_K(norms, n).mean(), expected_K(norms, n), rel_tol=1e-11)
    # E(L1) = sum_j j^2 E(R_j) / n
    assert math.isclose(dist_L1(norms, n).mean(), math.fsum(j * j * m for j, m in enumerate(means, 1)) / n,
                        rel_tol=1e-11)


@settings(max_examples=40, deadline=None)
@given(log_weights, st.integers(1, 7))
def test_rj_law_normalized_with_right_mean(lw, j):
    n = len(lw)
    j = min(j, n)
    norms = custom_norms(lw)
    pmf = dist_Rj(norms, n, j)
    assert abs(pmf.prob.sum() - 1) < 1e-12
    assert math.isclose(pmf.mean(), factorial_moment(norms, n, {j: 1}), rel_tol=1e-10, abs_tol=1e-300)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 0.999))
def test_params_json_roundtrip(theta, gamma):
    for p in (FamilyParams(Family.EWENS, theta=theta), FamilyParams(Family.SUBEXP_GROWTH, gamma=gamma)):
        assert FamilyParams.from_json(p.to_json()) == p


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 5.0), st.integers(2, 200))
def test_ewens_L1_closed_form(theta, n):
    # constant weights: h_m = Gamma(theta+m)/(Gamma(theta) m!)
    norms = compute_norms(build_weights(FamilyParams(Family.EWENS, theta=theta), n))
    j = np.arange(1, n + 1)
    logh = lambda m: gammaln(theta + m) - gammaln(theta) - gammaln(m + 1)
    expected = math.log(theta) + logh(n - j) - math.log(n) - logh(n)
    assert np.allclose(dist_L1(norms, n).log_prob, expected, atol=1e-9)
