"""Upper confidence bounds on the mean of bounded scores."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np

from core.errors import EmptyInput, InvalidAlpha, InvalidEpsilon, ScoreOutOfRange

# Relative slack when checking that scores stay inside [-1/eps, 1/eps]
RANGE_SLACK = 1e-9


def check_epsilon(epsilon: float) -> float:
    if not (epsilon > 0.0 and math.isfinite(epsilon)):
        raise InvalidEpsilon(f"epsilon={epsilon} must be positive and finite")
    return float(epsilon)


def check_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise InvalidAlpha(f"alpha={alpha} must lie in (0, 1)")
    return float(alpha)


def hoeffding_margin(n: int, epsilon: float, alpha: float) -> float:
    """``sqrt(2 * ln(1/alpha) / (n * epsilon^2))`` for scores in ``[-1/eps, 1/eps]``."""
    if n < 1:
        raise EmptyInput("need at least one score")
    epsilon = check_epsilon(epsilon)
    alpha = check_alpha(alpha)
    return math.sqrt(2.0 * -math.log(alpha) / (n * epsilon * epsilon))


class MeanConfidenceInterval(ABC):
    """Strategy for a one-sided upper confidence bound on a mean."""

    # Strategy identifier recorded in bound reports
    name: str = "base"

    @abstractmethod
    def upper(self, scores: np.ndarray, epsilon: float, alpha: float) -> float:
        """Upper bound holding with probability at least ``1 - alpha``."""

    def lower(self, scores: np.ndarray, epsilon: float, alpha: float) -> float:
        """Lower end; the trivial bound ``-1/epsilon`` unless a strategy tightens it."""
        return -1.0 / check_epsilon(epsilon)

    @staticmethod
    def validate(scores, epsilon: float, alpha: float) -> np.ndarray:
        epsilon = check_epsilon(epsilon)
        check_alpha(alpha)
        arr = np.asarray(scores, dtype=np.float64).ravel()
        if arr.size == 0:
            raise EmptyInput("no scores to bound")
        limit = (1.0 / epsilon) * (1.0 + RANGE_SLACK)
        if not np.all(np.isfinite(arr)) or np.max(np.abs(arr)) > limit:
            raise ScoreOutOfRange(f"scores must lie in [-{1 / epsilon:.6g}, {1 / epsilon:.6g}]")
        return arr


class HoeffdingInterval(MeanConfidenceInterval):
    """Mean plus the Hoeffding margin; spends all of ``alpha`` on the upper side."""

    name = "hoeffding"

    def upper(self, scores, epsilon: float, alpha: float) -> float:
        arr = self.validate(scores, epsilon, alpha)
        # np.sum reduces pairwise, so the result does not depend on chunking
        mean = float(np.sum(arr) / arr.size)
        return mean + hoeffding_margin(arr.size, epsilon, alpha)


def hoeffding_upper(scores, epsilon: float, alpha: float) -> float:
    """Hoeffding upper confidence bound on the mean of ``scores``."""
    return HoeffdingInterval().upper(scores, epsilon, alpha)
