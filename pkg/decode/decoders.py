"""Decoding strategies that refuse to answer when self-cheating confidence is low."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Literal

import numpy as np
from pydantic import BaseModel, Field

from config import get_settings
from metrics.bounds import check_beta
from metrics.cheat import CheatScore
from models.base import PairPredictor

logger = logging.getLogger(__name__)

Sampler = Callable[[PairPredictor, Any, np.random.Generator], Any]


class DecodePolicy(BaseModel):
    """Which decoder to run and how strictly to threshold confidence."""

    kind: Literal["selective_filter", "rejection_sampling", "top1_search"] = "rejection_sampling"
    beta: float = Field(default=0.05, gt=0.0, lt=1.0)
    threshold_mode: Literal["one_sided", "absolute"] = "absolute"
    max_attempts: int = Field(default_factory=lambda: get_settings().rejection_budget, ge=1)
    candidate_budget: int = Field(default_factory=lambda: get_settings().top1_sample_budget, ge=1)

    def passes(self, score: CheatScore) -> bool:
        """``1 - C <= beta`` (one-sided) or ``|1 - C| <= beta`` (absolute)."""
        check_beta(self.beta)
        if score.degenerate or not math.isfinite(score.confidence):
            return False
        gap = 1.0 - score.confidence
        if self.threshold_mode == "absolute":
            gap = abs(gap)
        return gap <= self.beta


@dataclass(frozen=True)
class Response:
    y: Any
    score: CheatScore
    attempts: int = 1


@dataclass(frozen=True)
class Abstain:
    score: CheatScore | None = None
    reason: str = "low confidence"


@dataclass(frozen=True)
class Exhausted:
    attempts: int


Decision = Response | Abstain | Exhausted


def decision_record(x: Any, decision: Decision) -> dict:
    """Flat dict for JSONL output."""
    if isinstance(decision, Response):
        conf = decision.score.confidence
        return {
            "x": x,
            "decision": "response",
            "y": decision.y,
            "confidence": None if math.isinf(conf) else conf,
            "attempts": decision.attempts,
        }
    if isinstance(decision, Abstain):
        conf = decision.score.confidence if decision.score is not None else None
        return {
            "x": x,
            "decision": "abstain",
            "y": None,
            "confidence": None if conf is None or math.isinf(conf) else conf,
            "attempts": None,
        }
    return {"x": x, "decision": "exhausted", "y": None, "confidence": None, "attempts": decision.attempts}


def model_sampler(model: PairPredictor, x: Any, rng: np.random.Generator):
    """Draw from the model's own marginal."""
    return model.sample(x, rng)


class TemperatureSampler:
    """Tempered, optionally top-k truncated sampling over an enumerable support."""

    def __init__(self, temperature: float = 1.0, top_k: int | None = None):
        if temperature <= 0:
            raise ValueError("temperature must be positive")
        if top_k is not None and top_k < 1:
            raise ValueError("top_k must be at least 1")
        self.temperature = temperature
        self.top_k = top_k

    def __call__(self, model: PairPredictor, x: Any, rng: np.random.Generator):
        support = model.support(x)
        if support is None:
            raise ValueError("temperature sampling needs an enumerable support")
        labels = [y for y, _ in support]
        probs = np.array([p for _, p in support], dtype=np.float64)
        with np.errstate(divide="ignore"):
            logits = np.log(probs) / self.temperature
        if self.top_k is not None and self.top_k < len(labels):
            cutoff = np.sort(logits)[-self.top_k]
            logits = np.where(logits >= cutoff, logits, -np.inf)
        weights = np.exp(logits - np.max(logits))
        return labels[rng.choice(len(labels), p=weights / weights.sum())]


def selective_filter(
    model: PairPredictor,
    x: Any,
    policy: DecodePolicy,
    rng: np.random.Generator,
    sampler: Sampler = model_sampler,
) -> Response | Abstain:
    """Draw one sample and keep it only if it passes the confidence test."""
    y = sampler(model, x, rng)
    score = model.cheat_score(x, y)
    if policy.passes(score):
        return Response(y, score)
    return Abstain(score)


def rejection_sample(
    model: PairPredictor,
    x: Any,
    policy: DecodePolicy,
    rng: np.random.Generator,
    sampler: Sampler = model_sampler,
) -> Response | Exhausted:
    """Resample until a draw passes, giving up after ``policy.max_attempts``."""
    for attempt in range(1, policy.max_attempts + 1):
        y = sampler(model, x, rng)
        score = model.cheat_score(x, y)
        if policy.passes(score):
            return Response(y, score, attempt)
    logger.debug("rejection sampling exhausted after %d attempts", policy.max_attempts)
    return Exhausted(policy.max_attempts)


def top1_search(
    model: PairPredictor,
    x: Any,
    policy: DecodePolicy,
    rng: np.random.Generator | None = None,
) -> Response | Abstain:
    """Most probable candidate that passes the confidence test, or abstain.

    Candidates are the model's full support when it can be enumerated and
    otherwise ``policy.candidate_budget`` samples. Ties in probability are
    broken by the model's label order.
    """
    support = model.support(x)
    if support is None:
        if rng is None:
            raise ValueError("sampling candidates needs a random generator")
        drawn = {model.sample(x, rng) for _ in range(policy.candidate_budget)}
        support = [(y, model.log_prob(x, y)) for y in drawn]
    else:
        support = [(y, math.log(p) if p > 0 else -math.inf) for y, p in support]

    ranked = sorted(support, key=lambda item: (-item[1], model.label_rank(item[0])))
    for y, log_p in ranked:
        if log_p == -math.inf:
            break
        score = model.cheat_score(x, y)
        if policy.passes(score):
            return Response(y, score)
    return Abstain(reason="no candidate passed")


DECODERS = {
    "selective_filter": selective_filter,
    "rejection_sampling": rejection_sample,
    "top1_search": top1_search,
}


def decode(model: PairPredictor, x: Any, policy: DecodePolicy, rng: np.random.Generator) -> Decision:
    """Run the decoder named by ``policy.kind``."""
    return DECODERS[policy.kind](model, x, policy, rng)
