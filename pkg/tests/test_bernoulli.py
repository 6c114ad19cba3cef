"""Product-Bernoulli mask distribution: sampling, density, score gradient.

The enumeration oracle below walks all 2^n masks with plain itertools and
computes probabilities by direct multiplication, independent of the library's
own enumeration helpers.
"""

import itertools
import math

import numpy as np
import pytest

from coreselect import ConfigError, ImpossibleOutcomeError
from coreselect.bernoulli import (
    DEFAULT_CLAMP,
    ScoreClamp,
    expected_cardinality,
    log_prob,
    sample_mask,
    score_gradient,
)
from coreselect.data import Mask, ProbabilityVector


def all_masks(n):
    for bits in itertools.product((0, 1), repeat=n):
        yield np.array(bits, dtype=np.uint8)


def mask_prob(s, bits):
    p = 1.0
    for v, b in zip(s, bits):
        p *= v if b else (1.0 - v)
    return p


# ---------------------------------------------------------------- sampling

def test_sample_all_ones_is_certain():
    s = ProbabilityVector(np.ones(6), budget=6)
    m = sample_mask(s, np.random.default_rng(0))
    assert m.cardinality == 6


def test_sample_all_zeros_is_certain():
    s = ProbabilityVector(np.zeros(6), budget=1)
    m = sample_mask(s, np.random.default_rng(0))
    assert m.cardinality == 0


def test_sample_mean_cardinality_half():
    n, draws = 1000, 10_000
    s = ProbabilityVector(np.full(n, 0.5), budget=n)
    g = np.random.default_rng(42)
    total = sum(sample_mask(s, g).cardinality for _ in range(draws))
    mean = total / draws
    se = math.sqrt(n * 0.25 / draws)
    assert abs(mean - 500.0) <= 3 * se


def test_sample_deterministic_given_seed():
    s = ProbabilityVector(np.random.default_rng(1).uniform(0, 1, 30), budget=10)
    a = sample_mask(s, np.random.default_rng(99))
    b = sample_mask(s, np.random.default_rng(99))
    assert a == b


# ---------------------------------------------------------------- log density

def test_log_prob_fair_coin_pair():
    s = ProbabilityVector(np.array([0.5, 0.5]), budget=1)
    assert log_prob(s, Mask(np.array([1, 0]))) == pytest.approx(2 * math.log(0.5))


def test_log_prob_certain_outcome_is_zero():
    s = ProbabilityVector(np.array([1.0, 0.0]), budget=1)
    assert log_prob(s, Mask(np.array([1, 0]))) == 0.0


def test_log_prob_mixed():
    s = ProbabilityVector(np.array([0.9, 0.1]), budget=2)
    expect = math.log(0.9) + math.log(0.1)
    assert log_prob(s, Mask(np.array([1, 1]))) == pytest.approx(expect, abs=1e-9)


def test_log_prob_contradiction_raises():
    s = ProbabilityVector(np.array([0.0, 0.5]), budget=1)
    with pytest.raises(ImpossibleOutcomeError):
        log_prob(s, Mask(np.array([1, 0])))
    s2 = ProbabilityVector(np.array([1.0, 0.5]), budget=2)
    with pytest.raises(ImpossibleOutcomeError):
        log_prob(s2, Mask(np.array([0, 1])))


def test_log_prob_sums_consistent_with_enumeration():
    g = np.random.default_rng(5)
    vals = g.uniform(0.05, 0.95, 6)
    s = ProbabilityVector(vals, budget=6)
    total = sum(math.exp(log_prob(s, Mask(b))) for b in all_masks(6))
    assert total == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------- score gradient

def test_score_gradient_fair_pair():
    s = ProbabilityVector(np.array([0.5, 0.5]), budget=1)
    np.testing.assert_allclose(score_gradient(s, Mask(np.array([1, 0]))), [2.0, -2.0])


def test_score_gradient_uneven_pair():
    s = ProbabilityVector(np.array([0.25, 0.75]), budget=2)
    np.testing.assert_allclose(
        score_gradient(s, Mask(np.array([1, 1]))), [4.0, 4.0 / 3.0]
    )


def test_score_gradient_length_mismatch():
    s = ProbabilityVector(np.array([0.5, 0.5]), budget=1)
    with pytest.raises(ConfigError):
        score_gradient(s, Mask(np.array([1, 0, 1])))


def test_score_gradient_clamped_at_degenerate_entries():
    s = ProbabilityVector(np.array([0.0, 1.0]), budget=1)
    out = score_gradient(s, Mask(np.array([1, 0])), ScoreClamp(1e-6))
    assert out[0] == pytest.approx(1e6, rel=1e-9)
    assert out[1] == pytest.approx(-1e6, rel=1e-9)
    assert np.all(np.isfinite(out))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_score_gradient_zero_mean_by_enumeration(seed):
    n = 3
    g = np.random.default_rng(seed)
    vals = g.uniform(0.05, 0.95, n)
    s = ProbabilityVector(vals, budget=n)
    acc = np.zeros(n)
    for bits in all_masks(n):
        acc += mask_prob(vals, bits) * score_gradient(s, Mask(bits))
    np.testing.assert_allclose(acc, 0.0, atol=1e-9)


def test_score_gradient_zero_mean_near_degenerate():
    # entries parked at 1e-9 / 1-1e-9 still satisfy the zero-mean identity
    # when the clamp sits below them
    vals = np.array([1e-9, 1.0 - 1e-9, 0.4])
    s = ProbabilityVector(vals, budget=3)
    clamp = ScoreClamp(1e-12)
    acc = np.zeros(3)
    for bits in all_masks(3):
        acc += mask_prob(vals, bits) * score_gradient(s, Mask(bits), clamp)
    np.testing.assert_allclose(acc, 0.0, atol=1e-9)


# ---------------------------------------------------------------- cardinality

def test_expected_cardinality_direct():
    assert expected_cardinality(ProbabilityVector(np.array([0.5, 0.5]), 1)) == 1.0
    assert expected_cardinality(ProbabilityVector(np.zeros(4), 1)) == 0.0


def test_expected_cardinality_enumeration_exact():
    g = np.random.default_rng(9)
    vals = g.uniform(0, 1, 10)
    s = ProbabilityVector(vals, budget=10)
    mean = sum(mask_prob(vals, b) * b.sum() for b in all_masks(10))
    assert mean == pytest.approx(expected_cardinality(s), abs=1e-9)


def test_expected_cardinality_monte_carlo():
    n, draws = 200, 10_000
    g = np.random.default_rng(17)
    vals = g.uniform(0, 1, n)
    s = ProbabilityVector(vals, budget=n)
    samp = np.random.default_rng(18)
    cards = np.array([sample_mask(s, samp).cardinality for _ in range(draws)], float)
    se = math.sqrt(np.sum(vals * (1 - vals)) / draws)
    assert abs(cards.mean() - vals.sum()) <= 3 * se


# ---------------------------------------------------------------- clamp contract

def test_clamp_bounds_enforced():
    with pytest.raises(ConfigError):
        ScoreClamp(0.0)
    with pytest.raises(ConfigError):
        ScoreClamp(0.5)
    assert DEFAULT_CLAMP.epsilon == 1e-6


def test_clamp_apply_is_projection_into_band():
    c = ScoreClamp(0.1)
    out = c.apply(np.array([0.0, 0.05, 0.5, 0.97, 1.0]))
    np.testing.assert_allclose(out, [0.1, 0.1, 0.5, 0.9, 0.9])
