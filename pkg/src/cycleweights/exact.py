"""Exact finite-n quantities built on the normalization table h_0..h_N."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np
from scipy.special import gammaln

from ._logspace import logsumexp
from .errors import BudgetExceeded, ConfigError, NumericError
from .weights import Family, WeightTable

NORMALIZATION_TOL = 1e-10
DEFAULT_MAX_DEGREE = 1024


@dataclass(frozen=True, eq=False)
class NormTable:
    log_h: np.ndarray
    weights: WeightTable
    N: int = field(init=False)

    def __post_init__(self):
        lh = np.array(self.log_h, dtype=float)
        lh.setflags(write=False)
        object.__setattr__(self, "log_h", lh)
        object.__setattr__(self, "N", len(lh) - 1)

    @property
    def log_theta(self) -> np.ndarray:
        return self.weights.log_theta

    def h(self, n: int) -> float:
        return math.exp(self.log_h[n])

    def residual(self, n: int) -> float:
        """Relative residual of the recursion h_n = (1/n) sum_j theta_j h_{n-j} at n."""
        if n == 0:
            return abs(math.expm1(self.log_h[0]))
        rhs = logsumexp(self.log_theta[1:n + 1] + self.log_h[n - 1::-1]) - math.log(n)
        if rhs == self.log_h[n] == -math.inf:
            return 0.0
        return abs(math.expm1(rhs - self.log_h[n]))

    def check_n(self, n: int) -> int:
        if isinstance(n, bool) or int(n) != n or not 1 <= n <= self.N:
            raise ConfigError(f"n must be an integer in [1, {self.N}], got {n!r}")
        return int(n)


def compute_norms(weights: WeightTable, N: int | None = None) -> NormTable:
    """Run ``n h_n = sum_{j<=n} theta_j h_{n-j}`` in log space up to N (O(N^2))."""
    if N is None:
        N = weights.N
    if isinstance(N, bool) or int(N) != N or N < 0:
        raise ConfigError(f"N must be a nonnegative integer, got {N!r}")
    N = int(N)
    if N > weights.N:
        raise ConfigError(f"weight table has length {weights.N}, need {N}")
    lt = weights.log_theta
    custom = weights.params.family is Family.CUSTOM
    lh = np.empty(N + 1)
    lh[0] = 0.0
    for n in range(1, N + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            lh[n] = logsumexp(lt[1:n + 1] + lh[n - 1::-1]) - math.log(n)
        if math.isnan(lh[n]):
            raise NumericError(f"log h_{n} overflowed; N={N} is too large for this family")
        if not math.isfinite(lh[n]):
            if lh[n] == -math.inf and custom:
                continue
            if lh[n] == -math.inf:
                raise NumericError(f"h_{n} vanished for built-in family {weights.params.family.value}")
            raise NumericError(f"log h_{n} overflowed; N={N} is too large for this family")
    return NormTable(lh, weights)


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function stored as log-probabilities on an integer support."""

    support: np.ndarray
    log_prob: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "support", np.asarray(self.support, dtype=np.int64))
        object.__setattr__(self, "log_prob", np.asarray(self.log_prob, dtype=float))
        if self.support.shape != self.log_prob.shape:
            raise ValueError("support and log_prob must have the same shape")

    @property
    def prob(self) -> np.ndarray:
        return np.exp(self.log_prob)

    def total_log_mass(self) -> float:
        return logsumexp(self.log_prob)

    def is_normalized(self, tol: float = NORMALIZATION_TOL) -> bool:
        return abs(self.total_log_mass()) <= tol

    def mean(self) -> float:
        return float(np.dot(self.support, self.prob))

    def __getitem__(self, k: int) -> float:
        idx = np.searchsorted(self.support, k)
        if idx < len(self.support) and self.support[idx] == k:
            return float(math.exp(self.log_prob[idx]))
        return 0.0

    def as_dict(self) -> dict:
        return {int(k): float(p) for k, p in zip(self.support, self.prob)}

    def to_records(self) -> list:
        return [(int(k), float(math.exp(lp)), float(lp)) for k, lp in zip(self.support, self.log_prob)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "probability", "log_probability"])
        for k, p, lp in self.to_records():
            w.writerow([k, format_float(p), format_float(lp)])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [{"k": k, "probability": p, "log_probability": _json_float(lp)} for k, p, lp in self.to_records()]
        return json.dumps({"label": self.label, "rows": rows}, sort_keys=True)


def format_float(x: float) -> str:
    """17 significant digits: exact float round trip."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _json_float(x: float):
    return x if math.isfinite(x) else None


# ---------------------------------------------------------------- queries

def dist_L1(norms: NormTable, n: int) -> Pmf:
    """Law of the length of the cycle containing 1: theta_j h_{n-j} / (n h_n)."""
    n = norms.check_n(n)
    lt, lh = norms.log_theta, norms.log_h
    logp = lt[1:n + 1] + lh[n - 1::-1] - math.log(n) - lh[n]
    return Pmf(np.arange(1, n + 1), logp, label=f"L1|n={n}")


def expected_K(norms: NormTable, n: int) -> float:
    n = norms.check_n(n)
    j = np.arange(1, n + 1, dtype=float)
    terms = norms.log_theta[1:n + 1] - np.log(j) + norms.log_h[n - 1::-1] - norms.log_h[n]
    return math.exp(logsumexp(terms))


def log_factorial_moment(norms: NormTable, n: int, k: Mapping[int, int]) -> float:
    """ln E_n(prod_j (R_j)_[k_j]); -inf when the moment is zero."""
    n = norms.check_n(n)
    total = 0
    log_val = 0.0
    for j, kj in k.items():
        if int(j) != j or j < 1 or int(kj) != kj or kj < 0:
            raise ConfigError(f"bad factorial-moment index {j}: {kj}")
        if kj == 0:
            continue
        total += j * kj
    if total > n:
        raise ConfigError(f"sum_j j k_j = {total} exceeds n = {n}")
    for j, kj in k.items():
        if kj:
            log_val += kj * (norms.log_theta[j] - math.log(j))
    return log_val + norms.log_h[n - total] - norms.log_h[n]


def factorial_moment(norms: NormTable, n: int, k: Mapping[int, int]) -> float:
    return math.exp(log_factorial_moment(norms, n, k))


def _as_norms(obj: Union[NormTable, WeightTable], n: int) -> NormTable:
    if isinstance(obj, NormTable):
        return obj
    return compute_norms(obj, n)


def dist_Rj(table: Union[NormTable, WeightTable], n: int, j: int) -> Pmf:
    """Exact law of R_j, the number of j-cycles.

    Marking theta_j with u makes the generating function factor as
    ``G(z; theta_j=0) * exp(u theta_j z^j / j)``, so the coefficient of u^k in
    h_n(u) is ``(theta_j/j)^k / k! * g_{n-jk}`` where g is the normalization
    with theta_j removed. Everything stays positive.
    """
    norms = _as_norms(table, n)
    n = norms.check_n(n)
    if isinstance(j, bool) or int(j) != j or not 1 <= j <= n:
        raise ConfigError(f"j must be in [1, n], got {j!r}")
    lt = np.array(norms.log_theta[: n + 1])
    log_w = lt[j] - math.log(j)
    lt[j] = -math.inf
    lg = _norms_from_log_theta(lt, n)
    kmax = n // j
    ks = np.arange(kmax + 1)
    if log_w == -math.inf:
        logp = np.full(kmax + 1, -math.inf)
        logp[0] = 0.0
    else:
        logp = ks * log_w - gammaln(ks + 1.0) + lg[n - j * ks] - norms.log_h[n]
    return Pmf(ks, logp, label=f"R{j}|n={n}")


def _norms_from_log_theta(lt: np.ndarray, N: int) -> np.ndarray:
    lh = np.empty(N + 1)
    lh[0] = 0.0
    for m in range(1, N + 1):
        lh[m] = logsumexp(lt[1:m + 1] + lh[m - 1::-1]) - math.log(m)
    return lh


def dist_Rj_inclusion_exclusion(norms: NormTable, n: int, j: int):
    """Alternating-series cross-check for the law of R_j.

    Returns ``(support, probabilities, reliable)``. ``reliable`` is False as
    soon as one k needs a largest term more than 1e12 times its result.
    """
    n = norms.check_n(n)
    if not 1 <= j <= n:
        raise ConfigError(f"j must be in [1, n], got {j!r}")
    lh = norms.log_h
    log_w = norms.log_theta[j] - math.log(j)
    kmax = n // j
    probs = np.zeros(kmax + 1)
    reliable = True
    for k in range(kmax + 1):
        i = np.arange(kmax - k + 1)
        mag = -gammaln(k + 1.0) - gammaln(i + 1.0) + (k + i) * log_w + lh[n - j * (k + i)] - lh[n]
        top = mag.max()
        if top == -math.inf:
            continue
        signs = np.where(i % 2 == 0, 1.0, -1.0)
        s = math.fsum(signs * np.exp(mag - top))
        val = s * math.exp(top)
        probs[k] = val
        if val <= 0 or top - math.log(abs(val)) > math.log(1e12):
            reliable = False
    return np.arange(kmax + 1), probs, reliable


def marked_polynomial(lt: np.ndarray, n: int, marked: np.ndarray, max_degree: int):
    """Coefficients of h_n(u) where each marked theta_j is multiplied by u.

    Rows are kept rescaled to unit maximum with the log scale stored apart, so
    the inner sums are matrix-vector products. Degrees above ``max_degree``
    are dropped; lower coefficients are unaffected since all terms are
    positive. Returns ln of the coefficients for degrees 0..max_degree.
    """
    D = max_degree + 1
    lt_mk = np.where(marked[: n + 1], lt[: n + 1], -math.inf)
    lt_un = np.where(marked[: n + 1], -math.inf, lt[: n + 1])
    lt_un[0] = lt_mk[0] = -math.inf
    has_un = bool(np.isfinite(lt_un).any())
    H = np.zeros((n + 1, D))
    S = np.full(n + 1, -math.inf)
    H[0, 0] = 1.0
    S[0] = 0.0
    with np.errstate(invalid="ignore"):
        for m in range(1, n + 1):
            # index i = m - j runs over 0..m-1, pairing theta_{m-i} with row i
            w_mk = lt_mk[m:0:-1] + S[:m]
            top = w_mk.max()
            if has_un:
                w_un = lt_un[m:0:-1] + S[:m]
                top = max(top, w_un.max())
            if top == -math.inf:
                continue
            row = np.zeros(D)
            row[1:] = np.exp(w_mk - top) @ H[:m, :-1]
            if has_un:
                row += np.exp(w_un - top) @ H[:m]
            rmax = row.max()
            if rmax <= 0:
                continue
            H[m] = row / rmax
            S[m] = top + math.log(rmax) - math.log(m)
    with np.errstate(divide="ignore"):
        return np.log(H[n]) + S[n]


def dist_K(table: Union[NormTable, WeightTable], n: int, max_degree: int | None = None) -> Pmf:
    """Exact law of the number of cycles K via the marked recursion.

    The degree budget starts at 32 and doubles until the retained mass is 1
    within 1e-10, up to ``max_degree`` (default 1024).
    """
    norms = _as_norms(table, n)
    n = norms.check_n(n)
    cap = DEFAULT_MAX_DEGREE if max_degree is None else int(max_degree)
    marked = np.ones(n + 1, dtype=bool)
    deg = min(n, 32, cap)
    while True:
        logc = marked_polynomial(norms.log_theta, n, marked, deg)
        logp = logc - norms.log_h[n]
        mass = logsumexp(logp)
        if deg >= n or abs(mass) <= NORMALIZATION_TOL:
            break
        if deg >= cap:
            raise BudgetExceeded(f"dist_K at n={n} needs degree > {cap} (retained log-mass {mass:.3g})")
        deg = min(n, 2 * deg, cap)
    ks = np.arange(deg + 1)
    keep = ks >= 1
    return Pmf(ks[keep], logp[keep], label=f"K|n={n}")


def dist_Rj_marked(table: Union[NormTable, WeightTable], n: int, j: int, max_degree: int | None = None) -> Pmf:
    """Law of R_j straight from the marked recursion (slower; used as a cross-check)."""
    norms = _as_norms(table, n)
    n = norms.check_n(n)
    marked = np.zeros(n + 1, dtype=bool)
    marked[j] = True
    deg = n // j if max_degree is None else min(n // j, int(max_degree))
    logp = marked_polynomial(norms.log_theta, n, marked, deg) - norms.log_h[n]
    mass = logsumexp(logp)
    if abs(mass) > NORMALIZATION_TOL:
        raise BudgetExceeded(f"dist_Rj_marked at n={n}, j={j} needs degree > {deg}")
    return Pmf(np.arange(deg + 1), logp, label=f"R{j}|n={n}")
