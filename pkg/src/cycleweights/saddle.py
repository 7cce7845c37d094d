"""Saddle-point asymptotics for h_n and for the sub-exponential weights.

``I_mu(z) = sum_n n^mu theta_n z^n``; the saddle r_n solves ``I_0(r_n) = n``
and ``ln h_n ~ I_{-1}(r_n) - n ln r_n - 0.5 ln(2 pi I_1(r_n))``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from ._logspace import logsumexp
from .errors import ConfigError, NumericError, TruncationError
from .weights import Family, FamilyParams, SubExpParams, WeightTable

SERIES_TAIL_TOL = 1e-14
MAX_ITER = 200
_SQRT_EPS = math.sqrt(np.finfo(float).eps)


class GenFnKind(str, enum.Enum):
    ALGEBRAIC = "AlgebraicClosedForm"
    SUBEXP_GROWTH = "SubExpGrowthClosedForm"
    SERIES = "SeriesTruncated"


_SERIES_RADIUS = {
    Family.UNIFORM: 1.0,
    Family.EWENS: 1.0,
    Family.ASYMPTOTIC_EWENS: 1.0,
    Family.ALGEBRAIC: 1.0,
    Family.SUBEXP_GROWTH: 1.0,
    Family.SUBEXP_DECAY_POWER: 1.0,
    Family.SUBEXP_DECAY_STRETCHED: 1.0,
    Family.SUPEREXP_DECAY: math.inf,
}


@dataclass(frozen=True)
class GenFnSpec:
    kind: GenFnKind
    gamma: Optional[float] = None
    subexp: Optional[SubExpParams] = None
    series: Optional[WeightTable] = None
    radius: float = 1.0

    @classmethod
    def algebraic(cls, gamma: float) -> "GenFnSpec":
        if not gamma > 0:
            raise ConfigError("algebraic generating function needs gamma > 0")
        return cls(GenFnKind.ALGEBRAIC, gamma=float(gamma), radius=1.0)

    @classmethod
    def subexp_growth(cls, gamma: float) -> "GenFnSpec":
        if not 0 < gamma < 1:
            raise ConfigError("sub-exponential generating function needs 0 < gamma < 1")
        return cls(GenFnKind.SUBEXP_GROWTH, gamma=float(gamma), subexp=SubExpParams.from_gamma(gamma), radius=1.0)

    @classmethod
    def from_weights(cls, weights: WeightTable, radius: Optional[float] = None) -> "GenFnSpec":
        if radius is None:
            fam = weights.params.family
            if fam not in _SERIES_RADIUS:
                raise ConfigError(f"no default radius of convergence for {fam.value}; pass radius=")
            radius = _SERIES_RADIUS[fam]
        if not radius > 0:
            raise ConfigError("radius of convergence must be positive")
        return cls(GenFnKind.SERIES, series=weights, radius=float(radius))

    @classmethod
    def for_family(cls, params: FamilyParams, N: int = 10_000) -> "GenFnSpec":
        """Closed form when one exists, else the truncated series of N weights."""
        from .weights import build_weights

        if params.family is Family.ALGEBRAIC:
            return cls.algebraic(params.gamma)
        if params.family is Family.SUBEXP_GROWTH:
            return cls.subexp_growth(params.gamma)
        return cls.from_weights(build_weights(params, N))


@dataclass(frozen=True)
class SaddleSolution:
    n: int
    r: float
    I_m1: float
    I_0: float
    I_1: float
    residual: float


# ------------------------------------------------------------ I_mu evaluation

def eval_Imu(spec: GenFnSpec, mu: int, r: float) -> float:
    """Evaluate I_mu(r) for mu in {-1, 0, 1, 2}."""
    if mu not in (-1, 0, 1, 2):
        raise ConfigError(f"mu must be one of -1, 0, 1, 2; got {mu!r}")
    if not 0 < r < spec.radius:
        raise ConfigError(f"r={r!r} outside (0, {spec.radius})")
    try:
        if spec.kind is GenFnKind.ALGEBRAIC:
            return _algebraic_Imu(spec.gamma, mu, r)
        if spec.kind is GenFnKind.SUBEXP_GROWTH:
            return _subexp_Imu(spec.subexp, mu, r)
        return math.exp(_series_log_Imu(spec.series, mu, r))
    except OverflowError:
        return math.inf


def _algebraic_Imu(g: float, mu: int, z: float) -> float:
    w = 1.0 - z
    if mu == 0:
        return math.gamma(g + 1.0) * math.expm1(-(g + 1.0) * math.log1p(-z))
    if mu == 1:
        return math.gamma(g + 2.0) * z * w ** (-g - 2.0)
    if mu == 2:
        return math.gamma(g + 2.0) * z * (w ** (-g - 2.0) + (g + 2.0) * z * w ** (-g - 3.0))
    # I_{-1}(z) = int_0^z I_0(t)/t dt; with t = 1 - e^-s the integrand becomes
    # Gamma(g+1) (e^{(g+1)s} - 1)/(e^s - 1), smooth on [0, -ln(1-z)]
    S = -math.log1p(-z)
    a = g + 1.0
    if g == 1.0:
        return z / w - math.log1p(-z)

    def f(s):
        if s == 0.0:
            return a
        return math.expm1(a * s) / math.expm1(s)

    val, err = integrate.quad(f, 0.0, S, epsabs=0.0, epsrel=1e-13, limit=200)
    return math.gamma(a) * val


def _subexp_alpha(p: SubExpParams, z: float) -> float:
    w = 1.0 - z
    return z * (p.c / w + p.a * p.b * w ** (-p.b - 1.0))


def _subexp_alpha_prime(p: SubExpParams, z: float) -> float:
    w = 1.0 - z
    return (p.c / w + p.a * p.b * w ** (-p.b - 1.0)
            + z * (p.c / w ** 2 + p.a * p.b * (p.b + 1.0) * w ** (-p.b - 2.0)))


def _subexp_log_G(p: SubExpParams, z: float) -> float:
    """ln G_theta(z) = ln A - c ln(1-z) + a (1-z)^-b."""
    w = 1.0 - z
    return math.log(p.A) - p.c * math.log(w) + p.a * w ** (-p.b)


def _subexp_Imu(p: SubExpParams, mu: int, z: float) -> float:
    # I_0 = z G, I_1 = I_0 (alpha + 1), I_2 = I_0 ((alpha + 1)^2 + z alpha')
    if mu == -1:
        val, _ = integrate.quad(lambda t: math.exp(_subexp_log_G(p, t)), 0.0, z,
                                epsabs=0.0, epsrel=1e-13, limit=200)
        return val
    I0 = z * math.exp(_subexp_log_G(p, z))
    if mu == 0:
        return I0
    al = _subexp_alpha(p, z)
    if mu == 1:
        return I0 * (al + 1.0)
    return I0 * ((al + 1.0) ** 2 + z * _subexp_alpha_prime(p, z))


def _series_log_Imu(weights: WeightTable, mu: int, r: float) -> float:
    N = weights.N
    n = np.arange(1, N + 1, dtype=float)
    terms = weights.log_theta[1:] + mu * np.log(n) + n * math.log(r)
    total = logsumexp(terms)
    if terms[-1] > total + math.log(SERIES_TAIL_TOL):
        raise TruncationError(
            f"series of {N} weights not converged at r={r!r} (last term / sum = {math.exp(terms[-1] - total):.3g})")
    return total


def _series_converged(weights: WeightTable, r: float) -> bool:
    try:
        _series_log_Imu(weights, 0, r)
        _series_log_Imu(weights, 1, r)
    except TruncationError:
        return False
    return True


# ------------------------------------------------------------ root finding

def _solve_increasing(f: Callable[[float], float], fprime: Callable[[float], float],
                      target: float, lo: float, hi: float) -> tuple[float, float]:
    """Root of the increasing function f(x) = target in [lo, hi].

    Bisection down to width 1e-6, then Newton steps that fall back to
    bisection whenever they would leave the current bracket.
    """
    flo, fhi = f(lo) - target, f(hi) - target
    if flo > 0 or fhi < 0:
        raise NumericError(f"no sign change on [{lo}, {hi}] for target {target}")
    it = 0
    while hi - lo > 1e-6:
        it += 1
        if it > MAX_ITER:
            raise NumericError("saddle bisection did not converge")
        mid = 0.5 * (lo + hi)
        if f(mid) - target > 0:
            hi = mid
        else:
            lo = mid
    x = 0.5 * (lo + hi)
    fx = f(x) - target
    for _ in range(MAX_ITER):
        if fx == 0.0:
            return x, fx
        if fx > 0:
            hi = x
        else:
            lo = x
        d = fprime(x)
        step = fx / d if d > 0 else math.inf
        xn = x - step
        if not lo <= xn <= hi:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 4 * np.finfo(float).eps * max(abs(x), 1.0):
            fxn = f(xn) - target
            return (xn, fxn) if abs(fxn) <= abs(fx) else (x, fx)
        x = xn
        fx = f(x) - target
    raise NumericError("saddle Newton iteration cap reached")


def _upper_bracket(spec: GenFnSpec, n: float, I0: Callable[[float], float]) -> float:
    if spec.kind is not GenFnKind.SERIES:
        return spec.radius - _SQRT_EPS
    w = spec.series
    if math.isfinite(spec.radius):
        hi = spec.radius - _SQRT_EPS
        if _series_converged(w, hi):
            return hi
        # largest r at which the truncated series is still trustworthy
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if _series_converged(w, mid):
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        if I0(lo) < n:
            raise TruncationError(
                f"{w.N} weights are too few to place the saddle for n={n}; increase N")
        return lo
    hi = 2.0
    while True:
        if not _series_converged(w, hi):
            raise TruncationError(f"{w.N} weights are too few to place the saddle for n={n}")
        if I0(hi) > n:
            return hi
        hi *= 2.0
        if hi > 1e300:
            raise NumericError("could not bracket the saddle point")


def solve_saddle(spec: GenFnSpec, n: int) -> SaddleSolution:
    """Solve ``I_0(r_n) = n`` by safeguarded bisection + Newton."""
    if not n >= 1:
        raise ConfigError(f"n must be >= 1, got {n!r}")

    def I0(r):
        return eval_Imu(spec, 0, r)

    def dI0(r):
        return eval_Imu(spec, 1, r) / r

    hi = _upper_bracket(spec, n, I0)
    lo = min(1e-300, hi / 2)
    if spec.kind is GenFnKind.SERIES and not math.isfinite(spec.radius):
        # bracket is wide; bisect in log r
        ln_r, res = _solve_increasing(lambda t: I0(math.exp(t)), lambda t: eval_Imu(spec, 1, math.exp(t)),
                                      n, math.log(hi) - 700.0, math.log(hi))
        r = math.exp(ln_r)
    else:
        r, res = _solve_increasing(I0, dI0, n, lo, hi)
    I_0 = I0(r)
    if abs(I_0 - n) > 1e-9 * n:
        raise NumericError(f"saddle residual {I_0 - n:.3g} exceeds 1e-9 n")
    return SaddleSolution(n=int(n), r=r, I_m1=eval_Imu(spec, -1, r), I_0=I_0,
                          I_1=eval_Imu(spec, 1, r), residual=I_0 - n)


def algebraic_saddle_closed_form(gamma: float, n: float) -> float:
    return -math.expm1(-math.log1p(n / math.gamma(1.0 + gamma)) / (1.0 + gamma))


# ------------------------------------------------------------ asymptotics

def asymptotic_hn(spec: GenFnSpec, sol: SaddleSolution) -> float:
    """Saddle-point approximation of ln h_n."""
    return sol.I_m1 - sol.n * math.log(sol.r) - 0.5 * math.log(2.0 * math.pi * sol.I_1)


def solve_theta_saddle(spec: GenFnSpec, n: int) -> float:
    """rho_n with alpha(rho_n) = n for the sub-exponential G_theta."""
    if spec.kind is not GenFnKind.SUBEXP_GROWTH:
        raise ConfigError("theta saddle needs a SubExpGrowthClosedForm spec")
    p = spec.subexp
    rho, _ = _solve_increasing(lambda z: _subexp_alpha(p, z), lambda z: _subexp_alpha_prime(p, z),
                               n, 1e-300, 1.0 - _SQRT_EPS)
    return rho


def asymptotic_theta(spec: GenFnSpec, n: int) -> float:
    """Saddle-point approximation of ln theta_{n+1}."""
    rho = solve_theta_saddle(spec, n)
    p = spec.subexp
    return (_subexp_log_G(p, rho) - (n + 0.5) * math.log(rho)
            - 0.5 * math.log(2.0 * math.pi * _subexp_alpha_prime(p, rho)))


def ratio_bounds(spec: GenFnSpec, n: int, j: int) -> tuple[float, float]:
    """ln of the lower and upper bounds on h_{n-j}/h_n from the saddle points."""
    if j == 0:
        return 0.0, 0.0
    if not 1 <= j < n:
        raise ConfigError(f"need 1 <= j < n, got j={j}, n={n}")
    s_n = solve_saddle(spec, n)
    s_m = solve_saddle(spec, n - j)
    base = 0.5 * (math.log(s_n.I_1) - math.log(s_m.I_1))
    return base + j * math.log(s_m.r), base + j * math.log(s_n.r)


def log_ewens_h(theta: float, n) -> np.ndarray:
    """ln(Gamma(theta+n) / (Gamma(theta) n!)), the constant-weight normalization."""
    n = np.asarray(n, dtype=float)
    return gammaln(theta + n) - gammaln(theta) - gammaln(n + 1.0)
