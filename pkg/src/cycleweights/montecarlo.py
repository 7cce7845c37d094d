"""Exact sequential sampling of cycle types and batch statistics.

Cycles are drawn one at a time: with m indices left, the next cycle length
has law theta_l h_{m-l} / (m h_m). Each sample gets its own counter-based
Philox stream keyed by (seed, sample_index), so a batch is reproducible
independently of how it is split across workers.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from collections import Counter, OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BudgetExceeded, ConfigError
from .exact import NORMALIZATION_TOL, NormTable, Pmf, format_float

# float budget for cached per-m cumulative distributions (~64 MB)
CDF_CACHE_FLOATS = 8_000_000
MAX_SAMPLES = 10_000_000


def sample_stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for sample ``index`` of a batch seeded with ``seed``."""
    if seed < 0 or index < 0:
        raise ConfigError("seed and index must be nonnegative")
    # index occupies the third counter word; the low words advance per draw
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, index, 0]))


@dataclass(frozen=True)
class CycleType:
    n: int
    counts: dict  # j -> r_j, positive entries only

    def __post_init__(self):
        if sum(j * r for j, r in self.counts.items()) != self.n:
            raise ValueError(f"cycle type {self.counts} does not sum to {self.n}")
        if any(r <= 0 for r in self.counts.values()):
            raise ValueError("cycle type counts must be positive")

    @classmethod
    def from_lengths(cls, n: int, lengths) -> "CycleType":
        return cls(n, dict(sorted(Counter(int(x) for x in lengths).items())))

    @property
    def K(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class SampleRecord:
    cycle_type: CycleType
    ordered_lengths: tuple
    sorted_lengths: tuple = field(init=False)
    K: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "sorted_lengths", tuple(sorted(self.ordered_lengths, reverse=True)))
        object.__setattr__(self, "K", len(self.ordered_lengths))
        if sum(self.ordered_lengths) != self.cycle_type.n:
            raise ValueError("cycle lengths do not sum to n")

    @property
    def L1(self) -> int:
        return self.ordered_lengths[0]


class _CdfCache:
    """Lazily built cumulative distributions of the next cycle length, keyed by m."""

    def __init__(self, norms: NormTable, budget: int = CDF_CACHE_FLOATS):
        self.norms = norms
        self.budget = budget
        self.used = 0
        self._cache: OrderedDict = OrderedDict()

    def cdf(self, m: int) -> np.ndarray:
        c = self._cache.get(m)
        if c is not None:
            self._cache.move_to_end(m)
            return c
        lt, lh = self.norms.log_theta, self.norms.log_h
        logp = lt[1:m + 1] + lh[m - 1::-1] - (math.log(m) + lh[m])
        c = np.cumsum(np.exp(logp))
        if abs(c[-1] - 1.0) > 1e-8:
            raise ConfigError(f"inconsistent normalization table at m={m} (mass {c[-1]!r})")
        while self._cache and self.used + m > self.budget:
            _, old = self._cache.popitem(last=False)
            self.used -= len(old)
        if m <= self.budget:
            self._cache[m] = c
            self.used += m
        return c


def _draw_from_cdf(cdf: np.ndarray, u: float) -> int:
    return int(np.searchsorted(cdf, u * cdf[-1], side="right")) + 1


def sample_cycle_type(norms: NormTable, n: int, rng: np.random.Generator,
                      _cache: Optional[_CdfCache] = None) -> SampleRecord:
    """Draw one cycle type under P_n, recording cycles in order of discovery."""
    n = norms.check_n(n)
    cache = _cache if _cache is not None else _CdfCache(norms)
    lengths = []
    m = n
    while m > 0:
        ell = min(_draw_from_cdf(cache.cdf(m), rng.random()), m)
        lengths.append(ell)
        m -= ell
    return SampleRecord(CycleType.from_lengths(n, lengths), tuple(lengths))


def inverse_cdf_draw(pmf: Pmf, rng: np.random.Generator) -> int:
    """Inverse-CDF draw from a normalized Pmf."""
    if not pmf.is_normalized(1e-8):
        raise ConfigError(f"pmf {pmf.label!r} is not normalized (log mass {pmf.total_log_mass():.3g})")
    u = rng.random()
    acc = 0.0
    for k, lp in zip(pmf.support, pmf.log_prob):
        acc += math.exp(lp)
        if u < acc:
            return int(k)
    # rounding left u beyond the accumulated mass: last point with mass
    nz = np.nonzero(np.isfinite(pmf.log_prob))[0]
    return int(pmf.support[nz[-1]])


# ------------------------------------------------------------ batches

@dataclass
class Histogram:
    support: list
    freq: list

    def to_dict(self) -> dict:
        return {"support": self.support, "freq": self.freq}


@dataclass
class MomentEstimate:
    mean: float
    std_error: float

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std_error": self.std_error if math.isfinite(self.std_error) else None}


@dataclass
class BatchStats:
    n: int
    num_samples: int
    seed: int
    family: dict
    j_max: int
    histograms: dict
    moments: dict
    digest: str
    samples: Optional[list] = None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "num_samples": self.num_samples,
            "seed": self.seed,
            "family": self.family,
            "j_max": self.j_max,
            "histograms": {k: v.to_dict() for k, v in self.histograms.items()},
            "moments": {k: v.to_dict() for k, v in self.moments.items()},
            "digest": self.digest,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _sample_range(norms: NormTable, n: int, seed: int, start: int, stop: int) -> list:
    cache = _CdfCache(norms)
    return [sample_cycle_type(norms, n, sample_stream(seed, i), cache).ordered_lengths
            for i in range(start, stop)]


def _histogram(values: np.ndarray) -> Histogram:
    support, counts = np.unique(values, return_counts=True)
    return Histogram([int(s) for s in support], (counts / len(values)).tolist())


def _moment(values: np.ndarray) -> MomentEstimate:
    se = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else math.nan
    return MomentEstimate(float(values.mean()), se)


def run_batch(norms: NormTable, n: int, num_samples: int, seed: int, j_max: int = 5,
              workers: int = 1, keep_samples: bool = False) -> BatchStats:
    """Draw ``num_samples`` exact samples and summarize L1, K and R_1..R_jmax."""
    n = norms.check_n(n)
    if num_samples < 1:
        raise ConfigError("num_samples must be positive; an empty batch has no statistics")
    if num_samples > MAX_SAMPLES:
        raise BudgetExceeded(f"num_samples={num_samples} exceeds the budget of {MAX_SAMPLES}")
    if j_max < 0:
        raise ConfigError("j_max must be nonnegative")
    if workers <= 1:
        samples = _sample_range(norms, n, seed, 0, num_samples)
    else:
        bounds = np.linspace(0, num_samples, workers + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = ex.map(_sample_range, [norms] * workers, [n] * workers, [seed] * workers,
                           bounds[:-1].tolist(), bounds[1:].tolist())
            samples = [s for part in parts for s in part]

    digest = hashlib.sha256()
    for lengths in samples:
        digest.update((",".join(map(str, lengths)) + ";").encode())
    L1 = np.array([s[0] for s in samples])
    K = np.array([len(s) for s in samples])
    hist = {"L1": _histogram(L1), "K": _histogram(K)}
    moments = {"L1": _moment(L1.astype(float)), "K": _moment(K.astype(float))}
    for j in range(1, j_max + 1):
        Rj = np.array([s.count(j) for s in samples])
        hist[f"R{j}"] = _histogram(Rj)
        moments[f"R{j}"] = _moment(Rj.astype(float))
    return BatchStats(
        n=n, num_samples=num_samples, seed=seed, family=norms.weights.params.to_dict(), j_max=j_max,
        histograms=hist, moments=moments, digest=digest.hexdigest(),
        samples=samples if keep_samples else None,
    )


def samples_to_csv(samples, start_index: int = 0) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sample_index", "K", "L1", "sorted_lengths"])
    for i, lengths in enumerate(samples, start=start_index):
        w.writerow([i, len(lengths), lengths[0], ";".join(map(str, sorted(lengths, reverse=True)))])
    return buf.getvalue()


def empirical_pmf(values, label: str = "") -> Pmf:
    support, counts = np.unique(np.asarray(values), return_counts=True)
    return Pmf(support, np.log(counts / counts.sum()), label=label)


def total_variation(p: Pmf, q: Pmf) -> float:
    """Half the L1 distance between two pmfs on integer supports."""
    keys = np.union1d(p.support, q.support)
    pa = np.array([p[k] for k in keys])
    qa = np.array([q[k] for k in keys])
    return 0.5 * float(np.abs(pa - qa).sum())


__all__ = [
    "CycleType", "SampleRecord", "BatchStats", "sample_stream", "sample_cycle_type",
    "inverse_cdf_draw", "run_batch", "samples_to_csv", "empirical_pmf", "total_variation",
    "format_float", "NORMALIZATION_TOL",
]
