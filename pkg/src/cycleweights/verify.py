"""Per-regime comparisons of exact finite-n laws against their predicted limits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammainc

from .errors import UnsupportedLimit
from .exact import NormTable, Pmf, dist_K, dist_L1, dist_Rj, expected_K, log_factorial_moment
from .limits import (eval_cdf, poisson_logpmf, predict, subexp_concentration,
                     superexp_decay_ERj_prediction)
from .montecarlo import run_batch, total_variation
from .weights import Family

DEFAULT_TOLERANCES = {
    "L1_single_cycle": 0.05,
    "R1_vanishes": 0.05,
    "R1_poisson": 0.02,
    "L1_log_concentration": math.log(2.0),
    "L1_gamma": 0.05,
    "EK_power_constant": 0.15,
    "L1_beta": 0.03,
    "EK_log": 0.15,
    "GEM_first": 0.03,
    "GEM_second": 0.03,
    "L1_tail_law": 0.02,
    "K_shifted_poisson": 0.02,
    "ER1_log_growth": math.log(2.0),
}

EWENS_LIKE = (Family.UNIFORM, Family.EWENS, Family.ASYMPTOTIC_EWENS)
SUBEXP_DECAY = (Family.SUBEXP_DECAY_POWER, Family.SUBEXP_DECAY_STRETCHED)


@dataclass
class VerifyRow:
    claim: str
    statistic: str
    n: int
    distance: float
    tolerance: float
    status: str  # pass | fail | unsupported | skipped

    def as_list(self) -> list:
        return [self.claim, self.statistic, self.n, self.distance, self.tolerance, self.status]


COLUMNS = ["claim", "statistic", "n", "distance", "tolerance", "status"]


def sup_distance_lattice(cdf_exact: np.ndarray, cdf_limit: np.ndarray) -> float:
    """Sup distance between a step CDF (jumps at the lattice points) and a continuous CDF."""
    before = np.concatenate(([0.0], cdf_exact[:-1]))
    return float(max(np.abs(cdf_exact - cdf_limit).max(), np.abs(before - cdf_limit).max()))


def ks_statistic(samples: np.ndarray, cdf) -> float:
    x = np.sort(np.asarray(samples, dtype=float))
    m = len(x)
    F = cdf(x)
    hi = np.arange(1, m + 1) / m - F
    lo = F - np.arange(0, m) / m
    return float(max(hi.max(), lo.max()))


def poisson_tv(pmf: Pmf, mean: float, shift: int = 0) -> float:
    limit = Pmf(pmf.support, poisson_logpmf(mean, pmf.support - shift))
    # mass of the limit outside the finite support
    outside = max(0.0, 1.0 - float(limit.prob.sum()))
    return total_variation(pmf, limit) + 0.5 * outside


def _row(claim, stat, n, dist, tol):
    return VerifyRow(claim, stat, n, float(dist), float(tol), "pass" if dist <= tol else "fail")


def _unsupported(claim, stat, n):
    return VerifyRow(claim, stat, n, math.nan, math.nan, "unsupported")


def verify_family(norms: NormTable, n: int, num_samples: int = 0, seed: int = 0,
                  tolerances: Optional[dict] = None) -> list[VerifyRow]:
    """Compare the exact laws at size n with the limit laws of the weight regime."""
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    params = norms.weights.params
    fam = params.family
    g = params.gamma
    n = norms.check_n(n)
    rows: list[VerifyRow] = []

    if fam is Family.CUSTOM:
        return [_unsupported("limit_law", s, n) for s in ("L1", "K", "R1")]

    P = dist_L1(norms, n)
    if fam is Family.SUPEREXP_GROWTH:
        rows.append(_row("L1_single_cycle", "L1", n, 1.0 - P[n], tol["L1_single_cycle"]))
        rows.append(_row("R1_vanishes", "R1", n, 1.0 - dist_Rj(norms, n, 1)[0], tol["R1_vanishes"]))
    elif fam is Family.SUBEXP_GROWTH:
        mode = int(P.support[np.argmax(P.log_prob)])
        pred = subexp_concentration(g) * math.log(n) ** (1.0 / g)
        rows.append(_row("L1_log_concentration", "L1", n, abs(math.log(mode / pred)), tol["L1_log_concentration"]))
    elif fam is Family.ALGEBRAIC:
        law = predict(params, "L1")
        s = P.support / n ** (1.0 / (g + 1.0))
        lim = gammainc(law.params["shape"], law.params["rate"] * s)
        rows.append(_row("L1_gamma", "L1", n, sup_distance_lattice(np.cumsum(P.prob), lim), tol["L1_gamma"]))
        c = predict(params, "K").params["constant"]
        ratio = expected_K(norms, n) / (c * n ** (g / (g + 1.0)))
        rows.append(_row("EK_power_constant", "K", n, abs(ratio - 1.0), tol["EK_power_constant"]))
    elif fam in EWENS_LIKE:
        law = predict(params, "L1")
        lim = np.array([eval_cdf(law, x) for x in P.support / n])
        rows.append(_row("L1_beta", "L1", n, sup_distance_lattice(np.cumsum(P.prob), lim), tol["L1_beta"]))
        theta = law.params["theta"]
        rows.append(_row("EK_log", "K", n, abs(expected_K(norms, n) / (theta * math.log(n)) - 1.0), tol["EK_log"]))
        if num_samples > 0:
            stats = run_batch(norms, n, num_samples, seed, j_max=0, keep_samples=True)

            def beta(x):
                return -np.expm1(theta * np.log1p(-np.clip(x, 0.0, 1.0)))

            first = np.array([s[0] / n for s in stats.samples])
            second = np.array([s[1] / (n - s[0]) for s in stats.samples if len(s) > 1])
            rows.append(_row("GEM_first", "LargestCycles", n, ks_statistic(first, beta), tol["GEM_first"]))
            rows.append(_row("GEM_second", "LargestCycles", n, ks_statistic(second, beta), tol["GEM_second"]))
        else:
            rows.append(VerifyRow("GEM_first", "LargestCycles", n, math.nan, tol["GEM_first"], "skipped"))
    elif fam in SUBEXP_DECAY:
        h = np.exp(norms.log_h[: n + 1])
        total = math.fsum(h)
        worst = max(abs(P[n - m] - h[m] / total) / P[n - m] for m in range(0, min(10, n - 1) + 1))
        rows.append(_row("L1_tail_law", "L1", n, worst, tol["L1_tail_law"]))
        lam = predict(params, "K", N=norms.weights.N).params["mean"]
        rows.append(_row("K_shifted_poisson", "K", n, poisson_tv(dist_K(norms, n), lam, shift=1),
                         tol["K_shifted_poisson"]))
    elif fam is Family.SUPEREXP_DECAY:
        ratio = log_factorial_moment(norms, n, {1: 1}) / superexp_decay_ERj_prediction(g, n, 1)
        rows.append(_row("ER1_log_growth", "R1", n, abs(math.log(ratio)), tol["ER1_log_growth"]))

    if fam not in (Family.SUPEREXP_GROWTH, Family.SUPEREXP_DECAY):
        try:
            mean = predict(params, ("Rj", 1)).params["mean"]
            rows.append(_row("R1_poisson", "R1", n, poisson_tv(dist_Rj(norms, n, 1), mean), tol["R1_poisson"]))
        except UnsupportedLimit:  # pragma: no cover
            rows.append(_unsupported("R1_poisson", "R1", n))
    if fam in (Family.SUBEXP_GROWTH, Family.SUPEREXP_DECAY):
        rows.append(_unsupported("K_limit", "K", n))
    return rows
