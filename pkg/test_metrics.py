"""Tests for cheat-corrected scores and the bounds built on them."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core import JointPairDistribution, mixture_joint
from core.errors import EmptyInput, InvalidBeta, InvalidDistribution
from metrics import (
    CheatScore,
    Diagnostics,
    cantelli_lower_bound,
    chebyshev_interval,
    cheat_score,
    cheat_score_from_log_probs,
    cheat_score_from_probs,
    cheat_scores,
    hallucination_bound,
    summarize_confidence,
)


def score(p, v):
    """A score with the given marginal and variance (self-cheat derived from them)."""
    return CheatScore("y", p, (v + p * p) / p, v, p * p / (v + p * p))


def unknown_digit_joint():
    return mixture_joint(np.eye(10))


# ===================
# cheat_score
# ===================


def test_two_coin_mixture(two_coin_joint):
    s = cheat_score(two_coin_joint, "H")
    assert s.p_marginal == pytest.approx(0.5)
    assert s.p_self_cheat == pytest.approx(1.0)
    assert s.v_cheat == pytest.approx(0.25)
    assert s.confidence == pytest.approx(0.5)


def test_fair_coin_is_fully_confident(uniform_joint):
    s = cheat_score(uniform_joint, "0")
    assert s.v_cheat == pytest.approx(0.0, abs=1e-15)
    assert s.confidence == pytest.approx(1.0)


def test_unknown_digit_mixture():
    j = unknown_digit_joint()
    for s in cheat_scores(j):
        assert s.p_marginal == pytest.approx(0.1)
        assert s.p_self_cheat == pytest.approx(1.0)
        assert s.confidence == pytest.approx(0.1)


def test_zero_marginal_gives_zero_confidence():
    j = JointPairDistribution(np.array([[1.0, 0.0], [0.0, 0.0]]))
    s = cheat_score(j, 1)
    assert s.p_marginal == 0.0
    assert s.confidence == 0.0
    assert not s.degenerate


def test_degenerate_self_cheat_is_flagged():
    # asymmetric trained joint: y=0 has marginal mass but no (0, 0) entry
    j = JointPairDistribution(np.array([[0.0, 0.5], [0.0, 0.5]]))
    s = cheat_score(j, 0)
    assert s.degenerate
    assert math.isinf(s.confidence)
    assert s.to_dict()["confidence"] is None
    assert CheatScore.from_dict(s.to_dict()).degenerate


def test_confidence_identity_on_random_joints(rng):
    for _ in range(200):
        k = int(rng.integers(2, 8))
        comps = rng.dirichlet(np.ones(k), size=int(rng.integers(1, 5)))
        j = mixture_joint(comps)
        for s in cheat_scores(j):
            if s.p_marginal > 0:
                assert s.confidence == pytest.approx(1.0 / (1.0 + s.v_cheat / s.p_marginal**2), abs=1e-9)
                assert 0.0 <= s.confidence <= 1.0 + 1e-12


def test_v_cheat_equals_brute_force_variance(rng):
    for _ in range(50):
        k = int(rng.integers(2, 6))
        m = int(rng.integers(1, 6))
        comps = rng.dirichlet(np.ones(k), size=m)
        w = rng.dirichlet(np.ones(m))
        j = mixture_joint(comps, w)
        mean = w @ comps
        for y in range(k):
            brute = float(w @ (comps[:, y] - mean[y]) ** 2)
            assert cheat_score(j, y).v_cheat == pytest.approx(brute, abs=1e-12)


def test_confidence_is_one_when_components_agree():
    comps = np.array([[0.3, 0.2, 0.5], [0.3, 0.6, 0.1]])
    j = mixture_joint(comps)
    assert cheat_score(j, 0).confidence == pytest.approx(1.0)
    assert cheat_score(j, 1).confidence < 1.0


def test_log_prob_variant_matches_matrix_form(two_coin_joint):
    s = cheat_score_from_log_probs("H", math.log(0.5), math.log(1.0))
    expected = cheat_score(two_coin_joint, "H")
    assert s.confidence == pytest.approx(expected.confidence)
    assert s.v_cheat == pytest.approx(expected.v_cheat)


def test_out_of_range_probabilities_are_rejected():
    with pytest.raises(InvalidDistribution):
        cheat_score_from_probs("y", 1.5, 0.5)


# ===================
# Intervals and bounds
# ===================


def test_chebyshev_examples(two_coin_joint):
    interval = chebyshev_interval(score(0.5, 0.0025), 0.25)
    assert (interval.lo, interval.hi) == pytest.approx((0.4, 0.6))

    interval = chebyshev_interval(score(0.3, 0.0), 0.1)
    assert (interval.lo, interval.hi) == pytest.approx((0.3, 0.3))

    interval = chebyshev_interval(cheat_score(two_coin_joint, "H"), 0.5)
    assert (interval.lo, interval.hi) == (0.0, 1.0)


def test_chebyshev_rejects_bad_beta():
    for beta in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(InvalidBeta):
            chebyshev_interval(score(0.5, 0.01), beta)


def test_negative_variance_is_clamped_and_counted():
    diagnostics = Diagnostics()
    s = CheatScore("y", 0.5, 0.4, -0.05, 1.25)
    interval = chebyshev_interval(s, 0.1, diagnostics)
    assert interval.lo == interval.hi == pytest.approx(0.5)
    assert diagnostics.clamped_variance == 1


def test_cantelli_examples():
    assert cantelli_lower_bound(score(0.7, 0.0), 0.2) == pytest.approx(0.7)
    assert cantelli_lower_bound(score(0.5, 0.25), 0.5) == pytest.approx(0.0, abs=1e-12)
    assert cantelli_lower_bound(score(0.9, 0.01), 0.1) == pytest.approx(0.6)


def test_hallucination_bound_examples():
    assert hallucination_bound([score(0.5, 0.0)] * 3) == pytest.approx(0.0)
    assert hallucination_bound([CheatScore("a", 0.5, 0.5, 0.0, 1.0), CheatScore("b", 0.5, 1.0, 0.25, 0.5)]) == pytest.approx(0.25)
    assert hallucination_bound(cheat_scores(unknown_digit_joint())) == pytest.approx(0.9)


def test_hallucination_bound_skips_degenerate_and_clamps():
    diagnostics = Diagnostics()
    scores = [
        CheatScore("a", 0.5, 0.0, -0.25, math.inf, degenerate=True),
        CheatScore("b", 0.5, 0.4, -0.05, 1.25),
        CheatScore("c", 0.5, 1.0, 0.25, 0.5),
    ]
    assert hallucination_bound(scores, diagnostics) == pytest.approx(0.25)
    assert diagnostics.infinite_confidence == 1
    assert diagnostics.confidence_above_one == 1
    assert diagnostics.negative_variance == 2


def test_hallucination_bound_needs_scores():
    with pytest.raises(EmptyInput):
        hallucination_bound([])


def test_chebyshev_coverage_on_binned_sin1d():
    from tasks import QuantileBins, sin1d_prob

    grouping = QuantileBins(n_bins=100, members_per_bin=1000)
    bin_mean = np.empty(100)
    bin_var = np.empty(100)
    for g in grouping.groups():
        points, weights = grouping.members(g)
        p = sin1d_prob(points)
        bin_mean[g] = weights @ p
        bin_var[g] = weights @ (p - bin_mean[g]) ** 2

    n = 100_000
    xs = np.random.default_rng(7).standard_normal(n)
    g = grouping.batch(xs)
    gap = np.abs(bin_mean[g] - sin1d_prob(xs))
    for beta in (0.05, 0.1, 0.25):
        failures = np.mean(gap >= np.sqrt(bin_var[g] / beta))
        assert failures <= beta + 3 * np.sqrt(beta * (1 - beta) / n)


# ===================
# Aggregation
# ===================


def test_summarize_confidence_drops_outliers():
    summary = summarize_confidence([0.5, 1.0, 3.0, math.inf], [True, False, True, False], outlier_cutoff=2.0)
    assert summary["n"] == 4
    assert summary["n_outliers"] == 2
    assert summary["mean_confidence"] == pytest.approx(0.75)
    assert summary["fraction_correct"] == pytest.approx(0.5)


def test_diagnostics_merge():
    a = Diagnostics(negative_variance=1)
    b = Diagnostics(negative_variance=2, clamped_variance=1)
    merged = a.merge(b)
    assert merged.negative_variance == 3
    assert merged.clamped_variance == 1
    assert_allclose(list(merged.to_dict().values()), [3, 0, 0, 1])
