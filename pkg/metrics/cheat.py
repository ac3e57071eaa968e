"""Cheat-corrected epistemic variance and confidence."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from core.errors import InvalidDistribution
from core.types import JointPairDistribution


@dataclass(frozen=True)
class CheatScore:
    """Pointwise self-cheating statistics for one response ``y``.

    ``confidence`` may exceed 1 for miscalibrated models. It is ``inf`` (and
    ``degenerate`` is set) when the self-cheat probability is zero while the
    marginal is positive, which only asymmetric trained models can produce.
    """

    y: str
    p_marginal: float
    p_self_cheat: float
    v_cheat: float
    confidence: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        data = asdict(self)
        if math.isinf(self.confidence):
            data["confidence"] = None
        return data

    @classmethod
    def from_dict(cls, data: dict) -> CheatScore:
        conf = data.get("confidence")
        return cls(
            y=str(data["y"]),
            p_marginal=float(data["p_marginal"]),
            p_self_cheat=float(data["p_self_cheat"]),
            v_cheat=float(data["v_cheat"]),
            confidence=math.inf if conf is None else float(conf),
            degenerate=bool(data.get("degenerate", conf is None)),
        )


def cheat_score_from_probs(y, p_marginal: float, p_self_cheat: float) -> CheatScore:
    """Build a ``CheatScore`` from ``p(y|x)`` and ``p(Y2=y | Y1=y, x)``.

    Shared by the matrix form and by sequence models that evaluate both
    probabilities as products of per-step conditionals.
    """
    p = float(p_marginal)
    q = float(p_self_cheat)
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise InvalidDistribution(f"probabilities out of range: p={p}, p_self={q}")
    if p == 0.0:
        return CheatScore(str(y), 0.0, 0.0, 0.0, 0.0)
    v = p * (q - p)
    if q == 0.0:
        return CheatScore(str(y), p, 0.0, v, math.inf, degenerate=True)
    return CheatScore(str(y), p, q, v, p / q)


def cheat_score_from_log_probs(y, log_p_marginal: float, log_p_self_cheat: float) -> CheatScore:
    """Sequence-model variant: inputs are summed per-token log probabilities."""
    return cheat_score_from_probs(
        y, math.exp(log_p_marginal), min(1.0, math.exp(log_p_self_cheat))
    )


def cheat_score(j: JointPairDistribution, y) -> CheatScore:
    """Cheat-corrected statistics of response ``y`` under joint ``j``."""
    idx = j.index(y)
    p_marginal = float(j.matrix[idx].sum())
    p_self = float(j.matrix[idx, idx] / p_marginal) if p_marginal > 0 else 0.0
    return cheat_score_from_probs(j.labels[idx], min(p_marginal, 1.0), min(p_self, 1.0))


def cheat_scores(j: JointPairDistribution) -> list[CheatScore]:
    """Scores for every label of the alphabet."""
    return [cheat_score(j, label) for label in j.labels]


def summarize_confidence(
    confidences, correct, outlier_cutoff: float = 2.0
) -> dict:
    """Aggregate confidence against accuracy for one query or bucket.

    Confidences above ``outlier_cutoff`` (and infinite ones) are excluded
    from the average; accuracy uses every sample.
    """
    conf = np.asarray(confidences, dtype=np.float64)
    hits = np.asarray(correct, dtype=bool)
    keep = np.isfinite(conf) & (conf <= outlier_cutoff)
    return {
        "n": int(conf.size),
        "n_outliers": int((~keep).sum()),
        "mean_confidence": float(conf[keep].mean()) if keep.any() else float("nan"),
        "fraction_correct": float(hits.mean()) if hits.size else float("nan"),
    }
