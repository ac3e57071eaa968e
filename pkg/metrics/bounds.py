"""Population bounds implied by cheat-corrected scores."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from core.errors import EmptyInput, InvalidBeta
from metrics.cheat import CheatScore
from metrics.diagnostics import Diagnostics


@dataclass(frozen=True)
class Interval:
    """Two-sided interval for a probability, clamped to [0, 1]."""

    lo: float
    hi: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "lo", float(min(max(self.lo, 0.0), 1.0)))
        object.__setattr__(self, "hi", float(min(max(self.hi, 0.0), 1.0)))

    @property
    def width(self) -> float:
        return self.hi - self.lo


def check_beta(beta: float) -> float:
    if not 0.0 < beta < 1.0:
        raise InvalidBeta(f"beta={beta} must lie in (0, 1)")
    return float(beta)


def _clamped_variance(score: CheatScore, diagnostics: Diagnostics | None) -> float:
    if score.v_cheat < 0:
        if diagnostics is not None:
            diagnostics.clamped_variance += 1
        return 0.0
    return score.v_cheat


def chebyshev_interval(
    score: CheatScore, beta: float, diagnostics: Diagnostics | None = None
) -> Interval:
    """``p_marginal +/- sqrt(v_cheat / beta)``."""
    beta = check_beta(beta)
    half = math.sqrt(_clamped_variance(score, diagnostics) / beta)
    return Interval(score.p_marginal - half, score.p_marginal + half, beta)


def cantelli_lower_bound(
    score: CheatScore, beta: float, diagnostics: Diagnostics | None = None
) -> float:
    """One-sided bound ``p_marginal - sqrt(v_cheat * (1/beta - 1))``, clamped to [0, 1]."""
    beta = check_beta(beta)
    v = _clamped_variance(score, diagnostics)
    return float(min(max(score.p_marginal - math.sqrt(v * (1.0 / beta - 1.0)), 0.0), 1.0))


def hallucination_bound(
    scores: Iterable[CheatScore], diagnostics: Diagnostics | None = None
) -> float:
    """Upper bound ``1 - mean(C)`` on the statistical hallucination rate.

    Confidences are clamped to [0, 1] before averaging. Degenerate scores
    (infinite confidence) are counted in ``diagnostics`` and left out.
    """
    confidences = []
    for score in scores:
        if diagnostics is not None:
            diagnostics.observe(score)
        if score.degenerate:
            continue
        confidences.append(min(max(score.confidence, 0.0), 1.0))
    if not confidences:
        raise EmptyInput("hallucination_bound needs at least one finite confidence")
    return float(1.0 - np.mean(confidences))
