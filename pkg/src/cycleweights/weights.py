"""Cycle weight sequences theta_1..theta_N, stored as natural logs.

Every family is evaluated directly in log space. ``log_theta`` arrays carry a
dummy entry at index 0 (set to ``-inf``) so that ``log_theta[n]`` is
``ln theta_n``.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import ConfigError
from ._logspace import logsumexp


class Family(str, enum.Enum):
    UNIFORM = "Uniform"
    EWENS = "Ewens"
    ASYMPTOTIC_EWENS = "AsymptoticEwens"
    ALGEBRAIC = "Algebraic"
    SUBEXP_GROWTH = "SubExpGrowth"
    SUPEREXP_GROWTH = "SuperExpGrowth"
    SUBEXP_DECAY_POWER = "SubExpDecayPower"
    SUBEXP_DECAY_STRETCHED = "SubExpDecayStretched"
    SUPEREXP_DECAY = "SuperExpDecay"
    CUSTOM = "Custom"


# allowed open interval (lo, hi) for gamma, per family
_GAMMA_RANGES = {
    Family.ALGEBRAIC: (0.0, math.inf),
    Family.SUBEXP_GROWTH: (0.0, 1.0),
    Family.SUPEREXP_GROWTH: (1.0, math.inf),
    Family.SUBEXP_DECAY_POWER: (0.0, math.inf),
    Family.SUBEXP_DECAY_STRETCHED: (0.0, 1.0),
    Family.SUPEREXP_DECAY: (1.0, math.inf),
}
_THETA_FAMILIES = (Family.EWENS, Family.ASYMPTOTIC_EWENS)


@dataclass(frozen=True)
class SubExpParams:
    """Constants (a, b, c, A) of the generating function A (1-z)^-c exp(a (1-z)^-b)."""

    a: float
    b: float
    c: float
    A: float

    @classmethod
    def from_gamma(cls, gamma: float) -> "SubExpParams":
        b = gamma / (1.0 - gamma)
        a = (1.0 - gamma) * gamma ** (gamma / (1.0 - gamma))
        c = b / 2.0 + 1.0
        A = math.sqrt(2.0 * math.pi * (b + 1.0)) * (a * b) ** (-(0.5 - c) / (b + 1.0))
        return cls(a=a, b=b, c=c, A=A)


@dataclass(frozen=True)
class FamilyParams:
    family: Family
    theta: Optional[float] = None
    gamma: Optional[float] = None
    custom_log_weights: Optional[tuple] = None

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        for name in ("theta", "gamma"):
            v = getattr(self, name)
            if v is not None:
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise ConfigError(f"{name} must be a number, got {v!r}")
                object.__setattr__(self, name, float(v))
        if self.custom_log_weights is not None:
            object.__setattr__(self, "custom_log_weights", tuple(float(x) for x in self.custom_log_weights))
        self.validate()

    def validate(self) -> None:
        fam = self.family
        if fam in _THETA_FAMILIES:
            if self.theta is None or not math.isfinite(self.theta) or self.theta <= 0:
                raise ConfigError(f"{fam.value} needs a positive finite theta, got {self.theta!r}")
        if fam in _GAMMA_RANGES:
            lo, hi = _GAMMA_RANGES[fam]
            g = self.gamma
            if g is None or not math.isfinite(g) or not lo < g < hi:
                raise ConfigError(f"{fam.value} needs gamma in ({lo}, {hi}), got {g!r}")
        if fam is Family.CUSTOM:
            w = self.custom_log_weights
            if not w:
                raise ConfigError("Custom family needs custom_log_weights")
            if any(math.isnan(x) or x == math.inf for x in w):
                raise ConfigError("custom_log_weights must be finite or -inf")

    @property
    def subexp(self) -> SubExpParams:
        if self.family is not Family.SUBEXP_GROWTH:
            raise ConfigError("derived (a, b, c, A) only exist for SubExpGrowth")
        return SubExpParams.from_gamma(self.gamma)

    def to_dict(self) -> dict:
        out = {"family": self.family.value}
        if self.theta is not None:
            out["theta"] = self.theta
        if self.gamma is not None:
            out["gamma"] = self.gamma
        if self.custom_log_weights is not None:
            out["custom_log_weights"] = [x if math.isfinite(x) else None for x in self.custom_log_weights]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "FamilyParams":
        unknown = set(d) - {"family", "theta", "gamma", "custom_log_weights"}
        if unknown:
            raise ConfigError(f"unknown FamilyParams keys: {sorted(unknown)}")
        if "family" not in d:
            raise ConfigError("FamilyParams needs a 'family' key")
        try:
            family = Family(d["family"])
        except ValueError:
            raise ConfigError(f"unknown family {d['family']!r}") from None
        custom = d.get("custom_log_weights")
        if custom is not None:
            # JSON has no -inf; null encodes a zero weight
            try:
                custom = tuple(-math.inf if x is None else float(x) for x in custom)
            except (TypeError, ValueError):
                raise ConfigError("custom_log_weights must be a list of numbers or nulls") from None
        return cls(family=family, theta=d.get("theta"), gamma=d.get("gamma"), custom_log_weights=custom)

    @classmethod
    def from_json(cls, text: str) -> "FamilyParams":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class WeightTable:
    """Immutable table of ``ln theta_n`` for n = 1..N (index 0 is a -inf pad)."""

    log_theta: np.ndarray
    params: FamilyParams
    N: int = field(init=False)

    def __post_init__(self):
        lt = np.array(self.log_theta, dtype=float)
        lt.setflags(write=False)
        object.__setattr__(self, "log_theta", lt)
        object.__setattr__(self, "N", len(lt) - 1)

    def theta(self, n: int) -> float:
        return math.exp(self.log_theta[n])

    def __len__(self) -> int:
        return self.N


def build_weights(params: FamilyParams, N: int) -> WeightTable:
    """Evaluate ``ln theta_n`` for n = 1..N for the chosen family."""
    N = _check_N(N)
    fam = params.family
    n = np.arange(1, N + 1, dtype=float)
    if fam is Family.UNIFORM:
        lt = np.zeros(N)
    elif fam is Family.EWENS:
        lt = np.full(N, math.log(params.theta))
    elif fam is Family.ASYMPTOTIC_EWENS:
        lt = np.log(params.theta + 1.0 / n)
    elif fam is Family.ALGEBRAIC:
        lt = gammaln(params.gamma + n + 1.0) - gammaln(n + 1.0)
    elif fam is Family.SUPEREXP_GROWTH:
        lt = n ** params.gamma
    elif fam is Family.SUBEXP_DECAY_POWER:
        lt = -params.gamma * np.log(n)
    elif fam in (Family.SUBEXP_DECAY_STRETCHED, Family.SUPEREXP_DECAY):
        lt = -(n ** params.gamma)
    elif fam is Family.SUBEXP_GROWTH:
        return extract_subexp_coeffs(params, N)
    elif fam is Family.CUSTOM:
        w = params.custom_log_weights
        if len(w) < N:
            raise ConfigError(f"custom_log_weights has {len(w)} entries, need {N}")
        lt = np.asarray(w[:N], dtype=float)
    else:  # pragma: no cover
        raise ConfigError(f"unhandled family {fam}")
    if fam is not Family.CUSTOM and not np.all(np.isfinite(lt)):
        raise ConfigError(f"{fam.value} produced non-finite weights up to N={N}")
    return WeightTable(np.concatenate(([-math.inf], lt)), params)


def extract_subexp_coeffs(params: FamilyParams, N: int) -> WeightTable:
    """Exact ``theta_n = [z^(n-1)] A (1-z)^-c exp(a (1-z)^-b)`` for n = 1..N.

    The series of ``exp(a (1-z)^-b)`` comes from the recurrence
    ``m f_m = sum_k k h_k f_{m-k}``; all terms are positive, so every sum is
    a log-sum-exp without cancellation.
    """
    if params.family is not Family.SUBEXP_GROWTH:
        raise ConfigError("extract_subexp_coeffs needs a SubExpGrowth family")
    N = _check_N(N)
    if N < 2:
        raise ConfigError("extract_subexp_coeffs needs N >= 2")
    sp = params.subexp
    M = N  # orders 0..N-1 are needed
    k = np.arange(1, M, dtype=float)
    # ln(k h_k) with h_k = a C(k+b-1, k)
    log_khk = np.log(k) + math.log(sp.a) + gammaln(k + sp.b) - gammaln(sp.b) - gammaln(k + 1.0)

    log_f = np.empty(M)
    log_f[0] = 0.0
    for m in range(1, M):
        # sum over k=1..m of k h_k f_{m-k}
        log_f[m] = logsumexp(log_khk[:m] + log_f[m - 1::-1]) - math.log(m)
    log_f += sp.a  # restore the constant term exp(a)

    i = np.arange(M, dtype=float)
    log_p = math.log(sp.A) + gammaln(i + sp.c) - gammaln(sp.c) - gammaln(i + 1.0)
    lt = np.empty(N + 1)
    lt[0] = -math.inf
    for m in range(M):
        lt[m + 1] = logsumexp(log_p[: m + 1] + log_f[m::-1])
    return WeightTable(lt, params)


def _check_N(N) -> int:
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ConfigError(f"N must be a positive integer, got {N!r}")
    return int(N)


PRESETS = {
    "uniform": FamilyParams(Family.UNIFORM),
    "ewens": FamilyParams(Family.EWENS, theta=2.0),
    "asymptotic-ewens": FamilyParams(Family.ASYMPTOTIC_EWENS, theta=2.0),
    "algebraic": FamilyParams(Family.ALGEBRAIC, gamma=1.0),
    "subexp-growth": FamilyParams(Family.SUBEXP_GROWTH, gamma=1.0 / 3.0),
    "superexp-growth": FamilyParams(Family.SUPEREXP_GROWTH, gamma=1.5),
    "subexp-decay-power": FamilyParams(Family.SUBEXP_DECAY_POWER, gamma=2.0),
    "subexp-decay-stretched": FamilyParams(Family.SUBEXP_DECAY_STRETCHED, gamma=0.5),
    "superexp-decay": FamilyParams(Family.SUPEREXP_DECAY, gamma=2.0),
}


def family_params(family: str, theta: Optional[float] = None, gamma: Optional[float] = None,
                  custom_log_weights: Optional[Sequence[float]] = None) -> FamilyParams:
    """Build FamilyParams from a family name or preset name, with optional overrides."""
    key = family.strip()
    if key.lower() in PRESETS:
        base = PRESETS[key.lower()]
        return FamilyParams(
            base.family,
            theta=base.theta if theta is None else theta,
            gamma=base.gamma if gamma is None else gamma,
            custom_log_weights=custom_log_weights,
        )
    try:
        fam = Family(key)
    except ValueError:
        raise ConfigError(f"unknown family {family!r}") from None
    return FamilyParams(fam, theta=theta, gamma=gamma, custom_log_weights=custom_log_weights)
