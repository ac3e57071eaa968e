"""Abstract base classes for pair predictors."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from typing import Any

import numpy as np

from core.algebra import joint_to_binary_params, pair_to_second_order
from core.types import BinaryPairParams, JointPairDistribution, SecondOrderPrediction
from metrics.cheat import CheatScore, cheat_score


class PairPredictor(ABC):
    """Anything that can sample responses and score them by self-cheating.

    Decoders only talk to models through this interface, so they work the
    same for dense joints, sequence-level oracles and trained networks.
    """

    # Model identifier
    name: str = "base"

    # Human-readable display name
    display_name: str = "Base Pair Predictor"

    @abstractmethod
    def sample(self, x: Any, rng: np.random.Generator) -> Any:
        """Draw one response from the model's marginal ``p(Y1 | x)``."""

    @abstractmethod
    def log_prob(self, x: Any, y: Any) -> float:
        """Marginal log-probability of ``y``; ``-inf`` when it is zero."""

    @abstractmethod
    def cheat_score(self, x: Any, y: Any) -> CheatScore:
        """Self-cheating statistics of ``y`` at input ``x``."""

    def support(self, x: Any) -> list[tuple[Any, float]] | None:
        """Enumerable responses with their marginal probability, or None."""
        return None

    def label_rank(self, y: Any) -> Any:
        """Sort key used to break probability ties in decoding."""
        return str(y)

    def get_capabilities(self) -> dict:
        """Describe the model for logs and metadata."""
        return {"name": self.name, "display_name": self.display_name}


class JointPairModel(PairPredictor):
    """Pair predictor exposing a dense K x K joint per input."""

    name = "joint"
    display_name = "Dense Joint Pair Model"

    @abstractmethod
    def joint(self, x: Any) -> JointPairDistribution:
        """Predicted joint over ``(Y1, Y2)`` at ``x``."""

    def marginal(self, x: Any) -> np.ndarray:
        return self.joint(x).matrix.sum(axis=1)

    def second_order(self, x: Any, tol: float | None = None) -> SecondOrderPrediction:
        return pair_to_second_order(self.joint(x), tol)

    def predict_binary(self, x: Any) -> BinaryPairParams:
        return joint_to_binary_params(self.joint(x))

    def sample(self, x: Any, rng: np.random.Generator) -> str:
        j = self.joint(x)
        p = j.matrix.sum(axis=1)
        return j.labels[rng.choice(j.k, p=p / p.sum())]

    def log_prob(self, x: Any, y: Any) -> float:
        j = self.joint(x)
        p = float(j.matrix[j.index(y)].sum())
        return math.log(p) if p > 0 else -math.inf

    def cheat_score(self, x: Any, y: Any) -> CheatScore:
        return cheat_score(self.joint(x), y)

    def support(self, x: Any) -> list[tuple[str, float]]:
        j = self.joint(x)
        return [(label, float(p)) for label, p in zip(j.labels, j.matrix.sum(axis=1))]

    def label_rank(self, y: Any) -> Any:
        labels = getattr(self, "labels", None)
        if labels and y in labels:
            return (0, labels.index(y))
        return (1, str(y))
