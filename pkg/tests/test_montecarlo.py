import json
from collections import Counter

import numpy as np
import pytest
from scipy import stats

from cycleweights import ConfigError, build_weights, compute_norms
from cycleweights.exact import Pmf, dist_L1, expected_K
from cycleweights.montecarlo import (CycleType, SampleRecord, empirical_pmf, inverse_cdf_draw,
                                     run_batch, sample_cycle_type, sample_stream, samples_to_csv,
                                     total_variation)
from cycleweights.weights import PRESETS

import oracle


@pytest.fixture(scope="module")
def ewens30():
    return compute_norms(build_weights(PRESETS["ewens"], 30))


def test_streams_reproducible_and_distinct():
    a = sample_stream(5, 3).random(4)
    assert np.array_equal(a, sample_stream(5, 3).random(4))
    assert not np.array_equal(a, sample_stream(5, 4).random(4))
    assert not np.array_equal(a, sample_stream(6, 3).random(4))
    with pytest.raises(ConfigError):
        sample_stream(-1, 0)


def test_batch_reproducible_and_worker_independent(ewens30):
    one = run_batch(ewens30, 30, 400, seed=11)
    again = run_batch(ewens30, 30, 400, seed=11)
    split = run_batch(ewens30, 30, 400, seed=11, workers=3)
    assert one.digest == again.digest == split.digest
    assert one.to_json() == split.to_json()
    assert run_batch(ewens30, 30, 400, seed=12).digest != one.digest


@pytest.mark.parametrize("name", ["ewens", "algebraic", "superexp-growth", "subexp-decay-power"])
def test_small_n_cycle_type_law(name):
    n = 6
    norms = compute_norms(build_weights(PRESETS[name], n))
    law, _ = oracle.enumerate_law(n, lambda j: norms.weights.theta(j))
    keys = [tuple(sorted(ct.items())) for ct, _ in law]
    expected = np.array([p for _, p in law])
    batch = run_batch(norms, n, 20_000, seed=2024, j_max=0, keep_samples=True)
    counts = Counter(tuple(sorted(Counter(s).items())) for s in batch.samples)
    observed = np.array([counts.get(k, 0) for k in keys])
    assert observed.sum() == 20_000
    mask = expected * 20_000 >= 5
    exp = expected[mask] * 20_000
    obs = observed[mask]
    # fold the sparse cells into one so the chi-square approximation holds
    exp = np.append(exp, 20_000 - exp.sum())
    obs = np.append(obs, 20_000 - obs.sum())
    if exp[-1] < 1e-9:
        exp, obs = exp[:-1], obs[:-1]
    assert stats.chisquare(obs, exp).pvalue > 1e-3


def test_first_cycle_is_size_biased(ewens30):
    batch = run_batch(ewens30, 30, 20_000, seed=1, j_max=0, keep_samples=True)
    emp = empirical_pmf([s[0] for s in batch.samples])
    assert total_variation(emp, dist_L1(ewens30, 30)) < 0.03
    m = batch.moments["K"]
    assert abs(m.mean - expected_K(ewens30, 30)) < 4 * m.std_error


def test_batch_summary_contents(ewens30):
    b = run_batch(ewens30, 30, 50, seed=0, j_max=3)
    d = json.loads(b.to_json())
    assert set(d["histograms"]) == {"L1", "K", "R1", "R2", "R3"}
    assert sum(d["histograms"]["K"]["freq"]) == pytest.approx(1.0)
    assert d["num_samples"] == 50 and d["family"] == {"family": "Ewens", "theta": 2.0}
    single = json.loads(run_batch(ewens30, 30, 1, seed=0).to_json())
    assert single["moments"]["K"]["std_error"] is None


def test_batch_rejects(ewens30):
    with pytest.raises(ConfigError):
        run_batch(ewens30, 30, 0, seed=0)
    with pytest.raises(ConfigError):
        run_batch(ewens30, 31, 5, seed=0)
    with pytest.raises(ConfigError):
        run_batch(ewens30, 30, 5, seed=0, j_max=-1)


def test_records_and_csv(ewens30):
    rec = sample_cycle_type(ewens30, 30, sample_stream(0, 0))
    assert sum(rec.ordered_lengths) == 30
    assert rec.sorted_lengths == tuple(sorted(rec.ordered_lengths, reverse=True))
    assert rec.cycle_type.K == rec.K == len(rec.ordered_lengths)
    text = samples_to_csv([(2, 3, 1), (6,)])
    assert text.splitlines() == ["sample_index,K,L1,sorted_lengths", "0,3,2,3;2;1", "1,1,6,6"]
    with pytest.raises(ValueError):
        CycleType(5, {1: 2})
    with pytest.raises(ValueError):
        SampleRecord(CycleType(3, {3: 1}), (1, 1))


def test_inverse_cdf_draw():
    rng = np.random.default_rng(0)
    pmf = Pmf([1, 2, 3], np.log([0.2, 0.5, 0.3]))
    draws = [inverse_cdf_draw(pmf, rng) for _ in range(20_000)]
    assert np.bincount(draws, minlength=4)[1:] / 20_000 == pytest.approx([0.2, 0.5, 0.3], abs=0.015)
    with pytest.raises(ConfigError):
        inverse_cdf_draw(Pmf([1, 2], np.log([0.2, 0.5])), rng)
