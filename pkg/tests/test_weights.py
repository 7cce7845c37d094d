import json
import math

import numpy as np
import pytest
from scipy.special import binom

from cycleweights import ConfigError, FamilyParams, build_weights, extract_subexp_coeffs, family_params
from cycleweights.weights import PRESETS, Family, SubExpParams


def series_exp(c, M):
    """Power series of exp(f) from the coefficients of f (plain float arithmetic)."""
    out = np.zeros(M)
    out[0] = math.exp(c[0])
    for m in range(1, M):
        out[m] = sum(k * c[k] * out[m - k] for k in range(1, m + 1)) / m
    return out


def test_subexp_coefficients_match_direct_series():
    g = 1 / 3
    p = SubExpParams.from_gamma(g)
    M = 40
    i = np.arange(M)
    f = p.a * binom(i + p.b - 1, i)  # (1-z)^-b coefficients times a
    f[0] = p.a
    pre = p.A * binom(i + p.c - 1, i)
    direct = np.convolve(pre, series_exp(f, M))[:M]
    w = extract_subexp_coeffs(FamilyParams(Family.SUBEXP_GROWTH, gamma=g), M)
    assert np.allclose(np.exp(w.log_theta[1:]), direct, rtol=1e-11)


def test_subexp_derived_constants():
    p = SubExpParams.from_gamma(1 / 3)
    assert p.b == pytest.approx(0.5)
    assert p.a == pytest.approx((2 / 3) * (1 / 3) ** 0.5)
    assert p.c == pytest.approx(1.25)
    with pytest.raises(ConfigError):
        FamilyParams(Family.EWENS, theta=1.0).subexp


def test_subexp_needs_two_terms():
    with pytest.raises(ConfigError):
        extract_subexp_coeffs(PRESETS["subexp-growth"], 1)


@pytest.mark.parametrize("name,n,expected", [
    ("uniform", 7, 0.0),
    ("ewens", 7, math.log(2.0)),
    ("asymptotic-ewens", 4, math.log(2.25)),
    ("algebraic", 5, math.log(6.0)),  # Gamma(7)/5! = 6
    ("superexp-growth", 4, 8.0),
    ("subexp-decay-power", 3, -2 * math.log(3)),
    ("subexp-decay-stretched", 9, -3.0),
    ("superexp-decay", 3, -9.0),
])
def test_closed_form_weights(name, n, expected):
    assert build_weights(PRESETS[name], 10).log_theta[n] == pytest.approx(expected, abs=1e-13)


def test_weight_table_is_read_only():
    w = build_weights(PRESETS["ewens"], 5)
    assert len(w) == 5 and w.log_theta[0] == -math.inf
    assert w.theta(3) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        w.log_theta[1] = 0.0


@pytest.mark.parametrize("kwargs", [
    dict(family=Family.EWENS),
    dict(family=Family.EWENS, theta=-1.0),
    dict(family=Family.EWENS, theta=math.inf),
    dict(family=Family.SUBEXP_GROWTH, gamma=1.0),
    dict(family=Family.SUPEREXP_GROWTH, gamma=1.0),
    dict(family=Family.SUPEREXP_DECAY, gamma=0.5),
    dict(family=Family.ALGEBRAIC, gamma=True),
    dict(family=Family.ALGEBRAIC, gamma="1"),
    dict(family=Family.CUSTOM),
    dict(family=Family.CUSTOM, custom_log_weights=[0.0, math.nan]),
])
def test_invalid_params(kwargs):
    with pytest.raises(ConfigError):
        FamilyParams(**kwargs)


def test_custom_too_short():
    with pytest.raises(ConfigError):
        build_weights(FamilyParams(Family.CUSTOM, custom_log_weights=[0.0]), 3)


def test_bad_N():
    for N in (0, -1, 2.5, True):
        with pytest.raises(ConfigError):
            build_weights(PRESETS["uniform"], N)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_json_roundtrip(name):
    p = PRESETS[name]
    assert FamilyParams.from_json(p.to_json()) == p


def test_custom_json_encodes_zero_weight_as_null():
    p = FamilyParams(Family.CUSTOM, custom_log_weights=[0.0, -math.inf, 1.5])
    d = json.loads(p.to_json())
    assert d["custom_log_weights"] == [0.0, None, 1.5]
    assert FamilyParams.from_dict(d) == p


def test_from_dict_rejects_unknown():
    with pytest.raises(ConfigError):
        FamilyParams.from_dict({"family": "Ewens", "theta": 1.0, "beta": 2})
    with pytest.raises(ConfigError):
        FamilyParams.from_dict({"family": "Nope"})
    with pytest.raises(ConfigError):
        FamilyParams.from_dict({"theta": 1.0})
    with pytest.raises(ConfigError):
        FamilyParams.from_dict({"family": "Ewens", "theta": "two"})
    with pytest.raises(ConfigError):
        FamilyParams.from_dict({"family": "Custom", "custom_log_weights": ["x"]})


def test_family_params_presets_and_overrides():
    assert family_params("ewens").theta == 2.0
    assert family_params("Ewens", theta=3.0).theta == 3.0
    assert family_params("subexp-growth", gamma=0.25).gamma == 0.25
    with pytest.raises(ConfigError):
        family_params("bogus")
