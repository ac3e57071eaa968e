"""Tests for calibration metrics and ranking comparisons."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core import ProbVector
from core.errors import EmptyInput, MissingScore, TooFewAnnotations, TooFewRecords, ZeroModelProbabilityOnObserved
from evaluation import (
    RankedSample,
    cluster_scores,
    confidence_reliability,
    default_confidence_edges,
    ece1,
    ece2,
    kl_to_empirical,
    ranking_comparison,
    score_samples,
    sq_err_est,
    variance_summary,
)
from models import PerturbedPairModel, tabular_from_oracle
from tasks import OffsetBuckets, PiTask

# ===================
# Squared-error estimates
# ===================


def test_sq_err_est_examples():
    assert sq_err_est("y", 1.0, ["y"] * 50) == pytest.approx(0.0)
    annotations = ["y"] * 25 + ["n"] * 25
    assert sq_err_est("y", 0.5, annotations) == pytest.approx(0.25 - 0.5 + 600 / 2450)
    assert sq_err_est("y", 0.5, annotations) == pytest.approx(-0.005102, abs=1e-6)


def test_sq_err_est_is_unbiased(rng):
    p, p_hat, k = 0.3, 0.45, 5
    draws = rng.random((20_000, k)) < p
    estimates = [sq_err_est(True, p_hat, list(row)) for row in draws]
    assert np.mean(estimates) == pytest.approx((p_hat - p) ** 2, abs=0.003)


def test_sq_err_est_needs_two_annotations():
    with pytest.raises(TooFewAnnotations):
        sq_err_est("y", 0.5, ["y"])


# ===================
# ECE-2 and ECE-1
# ===================


def test_ece2_is_zero_when_variance_matches():
    v = np.linspace(0.0, 0.25, 1000)
    value, table = ece2(v, v, bins=10)
    assert value == pytest.approx(0.0)
    assert table.total == 1000
    assert len(table.bins) == 10


def test_ece2_of_naive_variance_on_coins():
    # two-coin group: predicted 0.25 and the squared gap to p in {0, 1} is 0.25
    value, _ = ece2(np.full(100, 0.25), np.full(100, 0.25), bins=1)
    assert value == pytest.approx(0.0)
    # fair coin: the true p is 0.5, so the gap is zero
    value, _ = ece2(np.full(100, 0.25), np.zeros(100), bins=1)
    assert value == pytest.approx(0.25)


def test_ece2_scales_with_classes():
    value, _ = ece2(np.full(10, 0.1), np.zeros(10), bins=1, n_classes=3)
    assert value == pytest.approx(0.3)


def test_ece1_calibrated_predictor():
    rng = np.random.default_rng(0)
    p = rng.random(1_000_000)
    y = rng.random(p.size) < p
    value, _ = ece1(p, y, bins=20)
    assert value < 0.005


def test_ece1_constant_and_flipped_predictors():
    rng = np.random.default_rng(1)
    p = rng.random(100_000)
    y = (rng.random(p.size) < p).astype(float)
    value, _ = ece1(np.full(p.size, y.mean()), y, bins=1)
    assert value == pytest.approx(0.0, abs=1e-12)
    value, _ = ece1(1.0 - p, y, bins=20)
    assert value == pytest.approx(np.mean(np.abs(1 - 2 * p)), abs=0.02)


def test_ece_needs_enough_records():
    with pytest.raises(TooFewRecords):
        ece1([0.5] * 5, [1] * 5, bins=10)
    with pytest.raises(ValueError):
        ece1([0.5, 0.5], [1], bins=1)


def test_reliability_csv_has_one_row_per_bin():
    _, table = ece1(np.linspace(0, 1, 40), np.ones(40), bins=4)
    lines = table.to_csv().strip().splitlines()
    assert lines[0] == "kind,lower,upper,count,mean_predicted,mean_realized"
    assert len(lines) == 5
    assert all(row["kind"] == "ece1" for row in table.to_rows())


def test_variance_summary():
    summary = variance_summary([0.1, 0.3], [0.0, 0.1])
    assert summary == {"n": 2, "mean_v_hat": pytest.approx(0.2), "mean_sq_err": pytest.approx(0.05)}
    with pytest.raises(EmptyInput):
        variance_summary([], [])


# ===================
# KL to empirical
# ===================


def test_kl_to_empirical():
    assert kl_to_empirical(ProbVector(np.array([0.25, 0.75])), [0, 1, 1, 1]) == pytest.approx(0.0, abs=1e-15)
    assert kl_to_empirical(ProbVector(np.array([0.5, 0.5])), [0, 0]) == pytest.approx(math.log(2))
    assert kl_to_empirical(ProbVector(np.array([0.5, 0.5])), ["a"], labels=["a", "b"]) == pytest.approx(math.log(2))
    with pytest.raises(ZeroModelProbabilityOnObserved):
        kl_to_empirical(ProbVector(np.array([1.0, 0.0])), [1])


# ===================
# Confidence vs hallucination
# ===================


def test_confidence_edges():
    edges = default_confidence_edges()
    assert edges[0] == 0.0
    assert edges[10] == 1.0
    assert np.all(np.diff(edges[:-1]) > 0)
    assert math.isinf(edges[-1])


def test_confidence_reliability_bins():
    conf = [0.05, 0.08, 0.95, 1.0, 3.0]
    hall = [True, True, False, False, False]
    table = confidence_reliability(conf, hall)
    first = table.bins[0]
    assert first.count == 2
    assert first.mean_realized == 1.0
    assert first.mean_predicted == pytest.approx(1 - 0.065)
    assert table.total == 5
    # confidences above one land in the log-spaced bins and imply a zero bound
    assert table.bins[-1].mean_predicted == pytest.approx(0.0)


def test_confidence_reliability_bounds_hallucination_for_mixtures():
    # ten equally likely contexts, one deterministic answer each
    rng = np.random.default_rng(2)
    truth = rng.integers(0, 10, 5000)
    answer = rng.integers(0, 10, 5000)
    table = confidence_reliability(np.full(5000, 0.1), answer != truth)
    (only,) = table.bins
    assert only.mean_predicted == pytest.approx(0.9)
    assert only.mean_realized == pytest.approx(0.9, abs=0.02)


# ===================
# Ranking
# ===================


def test_cluster_scores():
    assert cluster_scores(["a", "a", "b", None], 4) == [2, 2, 1, 1]
    assert cluster_scores(["a", "a", "a", "a"], 2) == [2, 2, 2, 2]
    with pytest.raises(ValueError):
        cluster_scores(["a"], 0)


def test_score_samples_strategies():
    samples = score_samples(
        ["It's 7", "That's 8"],
        [math.log(0.2), math.log(0.1)],
        [1.0, 0.4],
        [("value", 7), ("value", 8)],
        [False, True],
        cluster_sizes=(2,),
    )
    s = samples[0].scores
    assert s["avg_token_log_prob"] == pytest.approx(math.log(0.2) / 2)
    assert s["cluster_2"] == 1.0
    assert s["cheat_one_sided"] == pytest.approx(0.0)
    assert samples[1].scores["cheat_min_recip"] == pytest.approx(-0.6)
    with pytest.raises(ValueError):
        score_samples(["a"], [], [1.0], [None], [False])


def test_all_correct_gives_zero_hallucination_rate():
    samples = [RankedSample(str(i), {"s": float(i)}, False) for i in range(20)]
    (curve,) = ranking_comparison(samples)
    assert np.all(curve.hallucination_rate == 0.0)
    assert curve.response_rate[-1] == 1.0


def test_perfect_strategy_ranks_correct_samples_first():
    samples = [RankedSample(str(i), {"good": 0.0 if i % 2 else 1.0, "bad": 1.0 if i % 2 else 0.0}, bool(i % 2)) for i in range(10)]
    good, bad = ranking_comparison(samples, ["good", "bad"])
    assert good.hallucination_rate[4] == 0.0
    assert bad.hallucination_rate[4] == 1.0
    assert good.at_threshold(1.0) == (0.5, 0.0)
    assert good.at_threshold(2.0) == (0.0, 0.0)


def test_ranking_ties_are_shuffled_reproducibly():
    samples = [RankedSample(str(i), {"s": 0.0}, bool(i % 3 == 0)) for i in range(30)]
    a = ranking_comparison(samples, seed=1)[0]
    b = ranking_comparison(samples, seed=1)[0]
    assert np.array_equal(a.hallucinations, b.hallucinations)
    assert a.hallucination_rate[-1] == pytest.approx(10 / 30)


def test_ranking_errors_and_thinning():
    with pytest.raises(EmptyInput):
        ranking_comparison([])
    with pytest.raises(MissingScore):
        ranking_comparison([RankedSample("a", {"s": 1.0}, False)], ["t"])
    samples = [RankedSample(str(i), {"s": float(i)}, False) for i in range(1000)]
    rows = ranking_comparison(samples)[0].to_rows(max_points=50)
    assert len(rows) == 50
    assert rows[-1]["response_rate"] == 1.0
    assert_allclose(rows[0]["response_rate"], 1 / 1000)


@pytest.mark.slow
def test_abs_confidence_ranking_beats_log_prob_on_perturbed_pi():
    # sigma=0.1 keeps unknown-bucket samples (C <= 0.75) from being jittered up to C ~ 1
    task = PiTask()
    model = PerturbedPairModel(tabular_from_oracle(task, OffsetBuckets()), sigma=0.1, seed=0)
    rng = np.random.default_rng(31)
    samples = []
    for x in task.sample_inputs(1000, rng):
        ys = [model.sample(x, rng) for _ in range(10)]
        samples.extend(
            score_samples(
                ys,
                [model.log_prob(x, y) for y in ys],
                [model.cheat_score(x, y).confidence for y in ys],
                [task.equivalence_key(y) for y in ys],
                [task.is_hallucination(x, y) for y in ys],
                cluster_sizes=(10,),
            )
        )
    strategies = ["cheat_abs", "avg_token_log_prob", "log_prob"]
    curves = {c.strategy: c for c in ranking_comparison(samples, strategies, seed=31)}

    n = len(samples)
    for rate in (0.1, 0.2, 0.3, 0.4, 0.5):
        k = int(rate * n)
        q = curves["cheat_abs"].hallucination_rate[k - 1]
        sigma = math.sqrt(max(q * (1.0 - q), 1.0 / k) / k)
        for other in strategies[1:]:
            assert q <= curves[other].hallucination_rate[k - 1] + 3 * sigma, (rate, other)
