import json
import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import spence

from cycleweights import (ConfigError, FamilyParams, LawKind, TruncationError, UnsupportedLimit,
                          build_weights, eval_cdf, gem_sample, lambda_eval, pd_sample, predict)
from cycleweights.limits import (algebraic_K_constant, gamma_rate, poisson_logpmf,
                                 subexp_concentration, superexp_decay_ERj_prediction)
from cycleweights.weights import PRESETS, Family


def test_gamma_cdf_against_quadrature():
    law = predict(PRESETS["algebraic"], "L1")
    assert law.kind is LawKind.GAMMA
    shape, rate = law.params["shape"], law.params["rate"]
    assert (shape, rate) == (2.0, 1.0)
    for s in (0.1, 1.0, 3.0):
        dens = lambda t: rate ** shape * t ** (shape - 1) * math.exp(-rate * t) / math.gamma(shape)
        assert eval_cdf(law, s) == pytest.approx(integrate.quad(dens, 0, s)[0], rel=1e-12)
    assert eval_cdf(law, math.inf) == 1.0


def test_gamma_rate_and_K_constant():
    assert gamma_rate(1.0) == pytest.approx(1.0)
    assert gamma_rate(2.0) == pytest.approx(2.0 ** (1 / 3))
    assert algebraic_K_constant(1.0) == pytest.approx(1.0)
    assert algebraic_K_constant(2.0) == pytest.approx((1 / 4) ** (1 / 3))


def test_beta_cdf_and_support():
    law = predict(PRESETS["ewens"], "L1")
    assert eval_cdf(law, 0.5) == pytest.approx(0.75)
    assert eval_cdf(law, 1.0) == 1.0
    with pytest.raises(ConfigError):
        eval_cdf(law, 1.5)
    assert predict(PRESETS["uniform"], "L1").params["theta"] == 1.0


def test_poisson_laws():
    law = predict(PRESETS["ewens"], "R3")
    assert law.kind is LawKind.POISSON and law.params["mean"] == pytest.approx(2 / 3)
    assert eval_cdf(law, 0) == pytest.approx(math.exp(-2 / 3))
    assert predict(PRESETS["asymptotic-ewens"], ("Rj", 1)).params["mean"] == pytest.approx(3.0)
    k = predict(PRESETS["subexp-decay-power"], "K", N=20_000)
    assert k.kind is LawKind.POISSON_SHIFTED
    assert k.params["mean"] == pytest.approx(1.2020569, abs=2e-9)  # zeta(3) less a tail ~ 1/(2N^2)
    with pytest.raises(ConfigError):
        eval_cdf(k, 0.5)
    assert poisson_logpmf(0.0, np.array([0, 1])).tolist() == [0.0, -math.inf]


def test_superexp_growth_point_masses():
    p = PRESETS["superexp-growth"]
    assert predict(p, "L1").kind is LawKind.POINT_MASS_AT_N
    assert predict(p, "R2").params["mean"] == 0.0
    assert eval_cdf(predict(p, "L1"), 0.99) == 0.0


def test_subexp_growth_constant():
    assert subexp_concentration(1 / 3) == pytest.approx(27 / 8)
    # B is where a^2 x - x^(1/3) + 1 attains its minimum value 0
    a = PRESETS["subexp-growth"].subexp.a
    assert a ** 2 == pytest.approx(4 / 27)
    xs = np.linspace(0.5, 10, 200_001)
    f = a ** 2 * xs - xs ** (1 / 3) + 1
    assert xs[np.argmin(f)] == pytest.approx(27 / 8, abs=1e-4)
    assert f.min() == pytest.approx(0.0, abs=1e-9)
    law = predict(PRESETS["subexp-growth"], "L1")
    assert law.params["B"] == pytest.approx(27 / 8)


def test_tail_law_normalized():
    law = predict(PRESETS["subexp-decay-power"], "L1", N=2000)
    assert law.kind is LawKind.TAIL
    assert math.fsum(law.table) == pytest.approx(1.0, abs=1e-12)
    assert eval_cdf(law, 3) == pytest.approx(math.fsum(law.table[:4]))


@pytest.mark.parametrize("name,stat", [("subexp-growth", "K"), ("superexp-decay", "K"),
                                        ("algebraic", "LargestCycles")])
def test_blank_cells_unsupported(name, stat):
    with pytest.raises(UnsupportedLimit):
        predict(PRESETS[name], stat)


def test_custom_unsupported():
    p = FamilyParams(Family.CUSTOM, custom_log_weights=[0.0] * 5)
    for stat in ("L1", "K", "R1"):
        with pytest.raises(UnsupportedLimit):
            predict(p, stat)


def test_law_json():
    d = json.loads(predict(PRESETS["algebraic"], "L1").to_json())
    assert d["law"] == "GammaLaw" and set(d) == {"law", "params", "rescale"}


def test_gem_properties():
    rng = np.random.default_rng(7)
    x = np.array([gem_sample(2.0, 200, rng) for _ in range(4000)])
    assert np.all(x > 0) and np.all(x.sum(axis=1) < 1 + 1e-12)
    assert x.sum(axis=1).min() > 1 - 1e-9
    # E(first piece) = 1/(1+theta), E(second) = theta/(1+theta)^2
    assert x[:, 0].mean() == pytest.approx(1 / 3, abs=0.015)
    assert x[:, 1].mean() == pytest.approx(2 / 9, abs=0.015)
    pd = pd_sample(2.0, 50, rng)
    assert np.all(np.diff(pd) <= 0)
    with pytest.raises(ConfigError):
        gem_sample(0.0, 3, rng)


def test_lambda_asymptotic_ewens_dilogarithm():
    w = build_weights(PRESETS["asymptotic-ewens"], 20_000)
    for x in (1.5, 3.0, 20.0):
        s = 1 - 1 / x
        assert lambda_eval(w, 2.0, x) == pytest.approx(math.exp(spence(1 - s)), rel=1e-10)
    assert lambda_eval(w, 2.0, 1.0) == 1.0


def test_lambda_constant_weights_is_one():
    w = build_weights(PRESETS["ewens"], 100)
    assert lambda_eval(w, 2.0, 50.0) == 1.0


def test_lambda_truncation():
    w = build_weights(PRESETS["asymptotic-ewens"], 100)
    with pytest.raises(TruncationError):
        lambda_eval(w, 2.0, 1e6)
    with pytest.raises(ConfigError):
        lambda_eval(w, 2.0, 0.5)


def test_superexp_decay_prediction():
    assert superexp_decay_ERj_prediction(2.0, math.e ** 4, 1) == pytest.approx(4.0)
    assert predict(PRESETS["superexp-decay"], "R2").params["coefficient"] == pytest.approx(4.0)
    with pytest.raises(ConfigError):
        superexp_decay_ERj_prediction(1.0, 10, 1)
