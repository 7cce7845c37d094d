"""Limit laws and limiting constants for each weight regime."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import ConfigError, TruncationError, UnsupportedLimit
from .weights import Family, FamilyParams, WeightTable, build_weights

LAMBDA_TAIL_TOL = 1e-14
LAMBDA_TAIL_RUN = 20


class LawKind(str, enum.Enum):
    POINT_MASS_AT_N = "PointMassAtN"
    LOG_POWER_CONCENTRATION = "LogPowerConcentration"
    GAMMA = "GammaLaw"
    BETA = "BetaLaw"
    POISSON = "PoissonLaw"
    POISSON_SHIFTED = "PoissonShifted"
    GEM = "GEMLaw"
    TAIL = "TailLaw"
    EXPECTATION_SCALING = "ExpectationScaling"


@dataclass(frozen=True)
class LimitLaw:
    """A limiting distribution (or constant) together with the rescaling that reaches it.

    ``params`` holds plain reals; TailLaw additionally carries the limiting pmf
    of ``n - L1`` in ``table`` (probabilities for m = 0, 1, ...).
    """

    kind: LawKind
    params: dict
    rescale: str
    table: Optional[tuple] = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {"law": self.kind.value, "params": dict(sorted(self.params.items())), "rescale": self.rescale}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


Statistic = Union[str, tuple]


def gamma_rate(gamma: float) -> float:
    """Rate a = Gamma(gamma+1)^(1/(gamma+1)) of the algebraic-regime Gamma limit."""
    return math.exp(math.lgamma(gamma + 1.0) / (gamma + 1.0))


def algebraic_K_constant(gamma: float) -> float:
    """lim n^(-gamma/(gamma+1)) E_n(K) = (Gamma(gamma)/gamma^gamma)^(1/(gamma+1))."""
    return math.exp((math.lgamma(gamma) - gamma * math.log(gamma)) / (gamma + 1.0))


def subexp_concentration(gamma: float) -> float:
    """B = (1-gamma)^(-1/gamma): limit of L1/(log n)^(1/gamma)."""
    return (1.0 - gamma) ** (-1.0 / gamma)


def _parse_statistic(statistic: Statistic) -> tuple[str, int]:
    if isinstance(statistic, tuple):
        name, j = statistic
        return str(name), int(j)
    s = str(statistic)
    if s.startswith("R") and s[1:].isdigit():
        return "Rj", int(s[1:])
    return s, 0


def _poisson_means(params: FamilyParams, N: int) -> np.ndarray:
    w = build_weights(params, N)
    j = np.arange(1, N + 1)
    return np.exp(w.log_theta[1:] - np.log(j))


def predict(params: FamilyParams, statistic: Statistic, N: int = 20_000) -> LimitLaw:
    """Limit law of ``statistic`` ('L1', 'K', ('Rj', j) or 'R3', 'LargestCycles').

    ``N`` bounds the truncated sums that define some constants (the Poisson
    mean of K - 1 and the tail law of n - L1 in the decaying regimes).
    """
    fam = params.family
    name, j = _parse_statistic(statistic)
    g = params.gamma
    ewens_theta = {Family.UNIFORM: 1.0}.get(fam, params.theta)

    if name == "Rj":
        if j < 1:
            raise ConfigError("R_j needs j >= 1")
        if fam is Family.CUSTOM:
            raise UnsupportedLimit("no limit law for Custom weights")
        if fam is Family.SUPEREXP_GROWTH:
            return LimitLaw(LawKind.POISSON, {"mean": 0.0, "j": j}, f"R{j}")
        if fam is Family.SUPEREXP_DECAY:
            coef = j * g * (1.0 / (g - 1.0)) ** ((g - 1.0) / g)
            return LimitLaw(LawKind.EXPECTATION_SCALING,
                            {"constant": 1.0, "gamma": g, "j": j, "coefficient": coef},
                            f"ln E_n(R{j}) / ({j} gamma (ln n/(gamma-1))^((gamma-1)/gamma))")
        w = build_weights(params, max(j, 2))
        return LimitLaw(LawKind.POISSON, {"mean": math.exp(w.log_theta[j]) / j, "j": j}, f"R{j}")

    if name == "L1":
        if fam is Family.SUPEREXP_GROWTH:
            return LimitLaw(LawKind.POINT_MASS_AT_N, {"gamma": g}, "L1/n")
        if fam is Family.SUBEXP_GROWTH:
            return LimitLaw(LawKind.LOG_POWER_CONCENTRATION,
                            {"B": subexp_concentration(g), "gamma": g, "power": 1.0 / g, "log_factor": 1.0},
                            "L1/(ln n)^(1/gamma)")
        if fam is Family.ALGEBRAIC:
            return LimitLaw(LawKind.GAMMA, {"shape": g + 1.0, "rate": gamma_rate(g), "gamma": g},
                            "L1/n^(1/(gamma+1))")
        if fam in (Family.UNIFORM, Family.EWENS, Family.ASYMPTOTIC_EWENS):
            return LimitLaw(LawKind.BETA, {"alpha": 1.0, "theta": ewens_theta}, "L1/n")
        if fam in (Family.SUBEXP_DECAY_POWER, Family.SUBEXP_DECAY_STRETCHED):
            return _tail_law(params, N)
        if fam is Family.SUPEREXP_DECAY:
            return LimitLaw(LawKind.LOG_POWER_CONCENTRATION,
                            {"B": 1.0, "gamma": g, "power": 1.0 / g, "log_factor": 1.0 / (g - 1.0)},
                            "L1/((ln n)/(gamma-1))^(1/gamma)")
        raise UnsupportedLimit(f"no L1 limit for {fam.value}")

    if name == "K":
        if fam is Family.SUPEREXP_GROWTH:
            return LimitLaw(LawKind.POISSON_SHIFTED, {"mean": 0.0}, "K")
        if fam is Family.ALGEBRAIC:
            return LimitLaw(LawKind.EXPECTATION_SCALING,
                            {"constant": algebraic_K_constant(g), "gamma": g, "power": g / (g + 1.0)},
                            "E_n(K)/n^(gamma/(gamma+1))")
        if fam in (Family.UNIFORM, Family.EWENS, Family.ASYMPTOTIC_EWENS):
            return LimitLaw(LawKind.EXPECTATION_SCALING, {"constant": ewens_theta}, "E_n(K)/ln n")
        if fam in (Family.SUBEXP_DECAY_POWER, Family.SUBEXP_DECAY_STRETCHED):
            lam = math.fsum(_poisson_means(params, N))
            return LimitLaw(LawKind.POISSON_SHIFTED, {"mean": lam, "terms": N}, "K")
        raise UnsupportedLimit(f"no limit for K is known for {fam.value}")

    if name == "LargestCycles":
        if fam in (Family.UNIFORM, Family.EWENS, Family.ASYMPTOTIC_EWENS):
            return LimitLaw(LawKind.GEM, {"theta": ewens_theta},
                            "(L~1, L~2, ...)/n -> GEM; sorted -> Poisson-Dirichlet")
        if fam is Family.SUPEREXP_GROWTH:
            return LimitLaw(LawKind.POINT_MASS_AT_N, {"gamma": g}, "L(1)/n")
        raise UnsupportedLimit(f"no largest-cycle limit for {fam.value}")

    raise ConfigError(f"unknown statistic {statistic!r}")


def _tail_law(params: FamilyParams, N: int) -> LimitLaw:
    from .exact import compute_norms

    norms = compute_norms(build_weights(params, N))
    h = np.exp(norms.log_h)
    total = math.fsum(h)
    return LimitLaw(LawKind.TAIL, {"total": total, "terms": N}, "n - L1", table=tuple(h / total))


def eval_cdf(law: LimitLaw, s: float) -> float:
    """P(X <= s) for the limit variable X of ``law``."""
    k = law.kind
    p = law.params
    if math.isnan(s):
        raise ConfigError("s is NaN")
    if k is LawKind.GAMMA:
        if s < 0:
            raise ConfigError("Gamma law is supported on [0, inf)")
        if s == math.inf:
            return 1.0
        return float(gammainc(p["shape"], p["rate"] * s))
    if k in (LawKind.BETA, LawKind.GEM):
        if not 0.0 <= s <= 1.0:
            raise ConfigError("Beta law is supported on [0, 1]")
        th = p["theta"]
        return -math.expm1(th * math.log1p(-s)) if s < 1.0 else 1.0
    if k in (LawKind.POISSON, LawKind.POISSON_SHIFTED):
        shift = 1 if k is LawKind.POISSON_SHIFTED else 0
        if s < shift:
            raise ConfigError(f"{k.value} is supported on integers >= {shift}")
        if s == math.inf:
            return 1.0
        m = int(math.floor(s)) - shift
        return _poisson_cdf(p["mean"], m)
    if k is LawKind.TAIL:
        if s < 0:
            raise ConfigError("tail law is supported on integers >= 0")
        tab = law.table
        if s >= len(tab) - 1:
            return 1.0
        return min(1.0, math.fsum(tab[: int(math.floor(s)) + 1]))
    if k is LawKind.POINT_MASS_AT_N:
        point = 1.0
    elif k is LawKind.LOG_POWER_CONCENTRATION:
        point = p["B"]
    elif k is LawKind.EXPECTATION_SCALING:
        point = p["constant"]
    else:  # pragma: no cover
        raise ConfigError(f"no CDF for {k}")
    return 1.0 if s >= point else 0.0


def _poisson_cdf(mean: float, m: int) -> float:
    if m < 0:
        return 0.0
    if mean == 0.0:
        return 1.0
    i = np.arange(m + 1)
    logp = i * math.log(mean) - mean - gammaln(i + 1.0)
    return min(1.0, math.fsum(np.exp(logp)))


def poisson_logpmf(mean: float, k: np.ndarray) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if mean == 0.0:
        return np.where(k == 0, 0.0, -math.inf)
    return k * math.log(mean) - mean - gammaln(k + 1.0)


def gem_sample(theta: float, k: int, rng: np.random.Generator) -> np.ndarray:
    """First k stick-breaking lengths with Beta(1, theta) fractions.

    Fractions come from inverting P(X > s) = (1-s)^theta:
    X = 1 - (1-u)^(1/theta).
    """
    if not theta > 0:
        raise ConfigError("theta must be positive")
    if k < 1:
        raise ConfigError("k must be >= 1")
    u = rng.random(k)
    x = -np.expm1(np.log1p(-u) / theta)
    remaining = np.concatenate(([1.0], np.cumprod(1.0 - x)[:-1]))
    return remaining * x


def pd_sample(theta: float, k: int, rng: np.random.Generator) -> np.ndarray:
    """Nonincreasing rearrangement of a GEM prefix (approximates a Poisson-Dirichlet prefix)."""
    return np.sort(gem_sample(theta, k, rng))[::-1]


def lambda_eval(weights: WeightTable, theta: float, x: float) -> float:
    """Slowly varying correction Lambda(x) = exp sum_j (theta_j - theta)/j s^j, s = 1 - 1/x."""
    if not x >= 1:
        raise ConfigError("Lambda is defined for x >= 1")
    s = 1.0 - 1.0 / x
    if s == 0.0:
        return 1.0
    N = weights.N
    j = np.arange(1, N + 1, dtype=float)
    diff = np.exp(weights.log_theta[1:]) - theta
    powers = np.exp(j * math.log(s))
    mags = np.abs(diff) / j * powers
    small = mags < LAMBDA_TAIL_TOL
    # first index ending a run of LAMBDA_TAIL_RUN consecutive negligible terms
    run = np.convolve(small.astype(int), np.ones(LAMBDA_TAIL_RUN, dtype=int), mode="valid")
    hits = np.nonzero(run == LAMBDA_TAIL_RUN)[0]
    if len(hits) == 0:
        raise TruncationError(f"Lambda({x}) needs more than {N} weights")
    stop = hits[0] + LAMBDA_TAIL_RUN
    terms = diff[:stop] / j[:stop] * powers[:stop]
    return math.exp(math.fsum(terms))


def superexp_decay_ERj_prediction(gamma: float, n: float, j: int) -> float:
    """Predicted ln E_n(R_j) = j gamma (ln n/(gamma-1))^((gamma-1)/gamma)."""
    if not gamma > 1:
        raise ConfigError("gamma must exceed 1")
    return j * gamma * (math.log(n) / (gamma - 1.0)) ** ((gamma - 1.0) / gamma)
