"""Tests for confidence-thresholded decoding."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from core import JointPairDistribution
from decode import (
    Abstain,
    DecodePolicy,
    Exhausted,
    Response,
    TemperatureSampler,
    decision_record,
    decode,
    rejection_sample,
    selective_filter,
    top1_search,
)
from metrics import cheat_score_from_probs
from models import tabular_from_oracle
from models.base import JointPairModel, PairPredictor
from tasks import OffsetBuckets, PiTask, crosses_lake, lake_pair_oracle, pcfg_enumerate_support, pi_digit
from tasks.lake import CENTER, HIDDEN, LAKE_CELLS, full_view, visited_cells

STRAIGHT = "right right right right"


class FixedSampler:
    """Sampler stub that always proposes the same response."""

    def __init__(self, y):
        self.y = y

    def __call__(self, model, x, rng):
        return self.y


class CoinFlipModel(PairPredictor):
    """Responses are uniform floats; a draw below ``q`` is fully confident."""

    name = "coin_flip"

    def __init__(self, q):
        self.q = q

    def sample(self, x, rng):
        return float(rng.random())

    def log_prob(self, x, y):
        return 0.0

    def cheat_score(self, x, y):
        if y < self.q:
            return cheat_score_from_probs(y, 0.5, 0.5)
        return cheat_score_from_probs(y, 0.25, 0.5)


class FixedJointModel(JointPairModel):
    def __init__(self, matrix):
        self._joint = JointPairDistribution(np.asarray(matrix, dtype=float))
        self.labels = self._joint.labels

    def joint(self, x):
        return self._joint


@pytest.fixture(scope="module")
def pi_model():
    # offset 5 sits in its own bucket, so the digit is known exactly
    return tabular_from_oracle(PiTask(), OffsetBuckets(), groups=[4])


# ===================
# Threshold policy
# ===================


def test_policy_threshold_modes():
    above_one = cheat_score_from_probs("y", 0.6, 0.4)
    assert above_one.confidence == pytest.approx(1.5)
    assert DecodePolicy(threshold_mode="one_sided").passes(above_one)
    assert not DecodePolicy(threshold_mode="absolute").passes(above_one)

    low = cheat_score_from_probs("y", 0.3, 0.5)
    assert not DecodePolicy(beta=0.3).passes(low)
    assert DecodePolicy(beta=0.5).passes(low)


def test_policy_rejects_degenerate_scores():
    degenerate = cheat_score_from_probs("y", 0.2, 0.0)
    assert degenerate.degenerate
    assert not DecodePolicy(threshold_mode="one_sided", beta=0.99).passes(degenerate)


def test_policy_validation():
    with pytest.raises(ValidationError):
        DecodePolicy(beta=0.0)
    with pytest.raises(ValidationError):
        DecodePolicy(max_attempts=0)
    with pytest.raises(ValidationError):
        DecodePolicy(kind="beam_search")


def test_policy_budgets_come_from_settings():
    policy = DecodePolicy()
    assert policy.max_attempts == 1000
    assert policy.candidate_budget == 6400


# ===================
# Selective filter
# ===================


def test_selective_filter_accepts_full_view(rng):
    decision = selective_filter(lake_pair_oracle(), full_view((1, 1)), DecodePolicy(), rng)
    assert isinstance(decision, Response)
    assert decision.score.confidence == pytest.approx(1.0)
    assert (1, 1) not in visited_cells(decision.y)


def test_selective_filter_abstains_on_hidden_lake_crossing(rng):
    decision = selective_filter(lake_pair_oracle(), HIDDEN, DecodePolicy(), rng, sampler=FixedSampler(STRAIGHT))
    assert isinstance(decision, Abstain)
    assert decision.score.confidence <= 6 / 9 + 1e-12


def test_known_digit_samples_are_accepted(pi_model, rng):
    policy = DecodePolicy(kind="selective_filter", beta=0.05)
    for _ in range(50):
        decision = selective_filter(pi_model, 5, policy, rng)
        assert isinstance(decision, Response)
        assert not PiTask().is_hallucination(5, decision.y)


# ===================
# Rejection sampling
# ===================


def test_rejection_sampling_on_hidden_lake_never_crosses(rng):
    policy = DecodePolicy(kind="rejection_sampling", max_attempts=200)
    for _ in range(5):
        decision = rejection_sample(lake_pair_oracle(), HIDDEN, policy, rng)
        assert isinstance(decision, (Response, Exhausted))
        if isinstance(decision, Response):
            # passing needs the path to be legal under all nine patches
            assert not crosses_lake(decision.y)
        else:
            assert decision.attempts == 200


def test_rejection_sampling_attempts_are_geometric():
    rng = np.random.default_rng(7)
    policy = DecodePolicy(max_attempts=1000)
    model = CoinFlipModel(q=0.25)
    attempts = [rejection_sample(model, None, policy, rng).attempts for _ in range(10_000)]
    assert np.mean(attempts) == pytest.approx(4.0, abs=0.15)


def test_rejection_sampling_first_draw_passes(rng):
    decision = rejection_sample(CoinFlipModel(q=1.0), None, DecodePolicy(max_attempts=5), rng)
    assert isinstance(decision, Response)
    assert decision.attempts == 1


def test_rejection_sampling_exhausts(rng):
    decision = rejection_sample(CoinFlipModel(q=0.0), None, DecodePolicy(max_attempts=7), rng)
    assert decision == Exhausted(7)


# ===================
# Top-1 search
# ===================


def test_top1_returns_most_probable_sentence(pi_model):
    digit = pi_digit(5)
    best = max(p for _, p, _ in pcfg_enumerate_support(digit))
    decision = top1_search(pi_model, 5, DecodePolicy(kind="top1_search"))
    assert isinstance(decision, Response)
    assert math.exp(pi_model.log_prob(5, decision.y)) == pytest.approx(best)


def test_top1_ties_follow_label_order():
    model = FixedJointModel(np.outer([0.4, 0.4, 0.2], [0.4, 0.4, 0.2]))
    decision = top1_search(model, None, DecodePolicy(kind="top1_search"))
    assert decision.y == "0"


def test_top1_skips_failing_candidates():
    # label "0" is likely but uncertain; label "2" is rarer but certain
    matrix = np.array([[0.32, 0.0, 0.08], [0.0, 0.32, 0.08], [0.08, 0.08, 0.04]])
    model = FixedJointModel(matrix)
    decision = top1_search(model, None, DecodePolicy(kind="top1_search", beta=0.1))
    assert decision.y == "2"
    assert decision.score.confidence == pytest.approx(1.0)


def test_top1_abstains_when_nothing_passes():
    model = FixedJointModel(np.diag([0.5, 0.5]))
    decision = top1_search(model, None, DecodePolicy(kind="top1_search", beta=0.1))
    assert isinstance(decision, Abstain)
    assert decision.reason == "no candidate passed"


def test_full_view_top1_crosses_lake(rng):
    # with the patch visible the best trajectory cuts through the safe lake cells
    policy = DecodePolicy(kind="top1_search", beta=0.05, candidate_budget=2000)
    for patch in LAKE_CELLS:
        if patch == CENTER:
            continue
        decision = top1_search(lake_pair_oracle(), full_view(patch), policy, rng)
        assert isinstance(decision, Response)
        assert crosses_lake(decision.y)
        assert patch not in visited_cells(decision.y)


def test_crossing_candidates_fail_on_hidden_view(rng):
    oracle = lake_pair_oracle()
    policy = DecodePolicy(beta=0.05)
    crossing = 0
    for _ in range(500):
        y = oracle.sample(HIDDEN, rng)
        if crosses_lake(y):
            crossing += 1
            score = oracle.cheat_score(HIDDEN, y)
            assert score.confidence <= 8 / 9 + 1e-12
            assert not policy.passes(score)
    assert crossing > 100


def test_top1_samples_candidates_without_support(rng):
    policy = DecodePolicy(kind="top1_search", candidate_budget=300)
    decision = top1_search(lake_pair_oracle(), full_view((1, 1)), policy, rng)
    assert isinstance(decision, Response)
    assert decision.score.confidence == pytest.approx(1.0)
    assert (1, 1) not in visited_cells(decision.y)

    hidden = top1_search(lake_pair_oracle(), HIDDEN, policy, rng)
    assert isinstance(hidden, Abstain) or not crosses_lake(hidden.y)

    with pytest.raises(ValueError):
        top1_search(lake_pair_oracle(), HIDDEN, policy)


# ===================
# Samplers and records
# ===================


def test_temperature_sampler_top1_is_argmax(rng):
    model = FixedJointModel(np.diag([0.2, 0.5, 0.3]))
    sampler = TemperatureSampler(temperature=1.0, top_k=1)
    assert {sampler(model, None, rng) for _ in range(50)} == {"1"}


def test_temperature_sampler_flattens_with_heat(rng):
    model = FixedJointModel(np.diag([0.9, 0.1]))
    hot = TemperatureSampler(temperature=1e6)
    draws = [hot(model, None, rng) for _ in range(4000)]
    assert draws.count("1") / len(draws) == pytest.approx(0.5, abs=0.05)


def test_temperature_sampler_errors(rng):
    with pytest.raises(ValueError):
        TemperatureSampler(temperature=0.0)
    with pytest.raises(ValueError):
        TemperatureSampler(top_k=0)
    with pytest.raises(ValueError):
        TemperatureSampler()(lake_pair_oracle(), HIDDEN, rng)


def test_decision_records():
    score = cheat_score_from_probs("a", 0.5, 0.5)
    assert decision_record(3, Response("a", score, 2)) == {
        "x": 3,
        "decision": "response",
        "y": "a",
        "confidence": 1.0,
        "attempts": 2,
    }
    record = decision_record(3, Abstain(reason="no candidate passed"))
    assert record["decision"] == "abstain"
    assert record["confidence"] is None
    assert decision_record(3, Exhausted(9))["attempts"] == 9


def test_decode_dispatches_on_kind(rng):
    model = CoinFlipModel(q=0.0)
    assert isinstance(decode(model, None, DecodePolicy(kind="selective_filter"), rng), Abstain)
    assert isinstance(decode(model, None, DecodePolicy(kind="rejection_sampling", max_attempts=3), rng), Exhausted)


def test_decoders_only_see_model_outputs():
    model = FixedJointModel(np.array([[0.32, 0.0, 0.08], [0.0, 0.32, 0.08], [0.08, 0.08, 0.04]]))
    for kind in ("selective_filter", "rejection_sampling", "top1_search"):
        policy = DecodePolicy(kind=kind, beta=0.1, max_attempts=20)
        a = decode(model, "first input", policy, np.random.default_rng(3))
        b = decode(model, ("another", "input"), policy, np.random.default_rng(3))
        assert a == b


# ===================
# Hallucination guarantees
# ===================


@pytest.mark.slow
def test_selective_filter_bounds_pi_hallucinations():
    task = PiTask()
    model = tabular_from_oracle(task, OffsetBuckets())
    policy = DecodePolicy(kind="selective_filter", beta=0.05, threshold_mode="one_sided")
    rng = np.random.default_rng(21)
    accepted = hallucinated = 0
    for x in task.sample_inputs(20_000, rng):
        decision = selective_filter(model, x, policy, rng)
        if isinstance(decision, Response):
            accepted += 1
            hallucinated += task.is_hallucination(x, decision.y)
    assert accepted >= 100
    beta = policy.beta
    assert hallucinated / accepted <= beta + 3 * math.sqrt(beta / accepted)


@pytest.mark.slow
def test_hidden_lake_accepts_no_crossings():
    oracle = lake_pair_oracle()
    policy = DecodePolicy(beta=0.05)
    rng = np.random.default_rng(22)
    crossings = 0
    for _ in range(10_000):
        decision = selective_filter(oracle, HIDDEN, policy, rng)
        if isinstance(decision, Response):
            crossings += crosses_lake(decision.y)
    assert crossings == 0


@pytest.mark.slow
def test_hidden_lake_decoders_never_cross():
    oracle = lake_pair_oracle()
    rng = np.random.default_rng(23)
    # every candidate a decoder can return passes the policy, so checking
    # 10^4 crossing candidates covers all three decoders
    policy = DecodePolicy(beta=0.05)
    checked = 0
    while checked < 10_000:
        y = oracle.sample(HIDDEN, rng)
        if crosses_lake(y):
            assert not policy.passes(oracle.cheat_score(HIDDEN, y))
            checked += 1

    rejection = DecodePolicy(kind="rejection_sampling", beta=0.05)
    top1 = DecodePolicy(kind="top1_search", beta=0.05, candidate_budget=2000)
    for _ in range(100):
        decision = rejection_sample(oracle, HIDDEN, rejection, rng)
        assert isinstance(decision, Exhausted) or not crosses_lake(decision.y)
    for _ in range(10):
        decision = top1_search(oracle, HIDDEN, top1, rng)
        assert isinstance(decision, Abstain) or not crosses_lake(decision.y)
