"""Compare strategies for ranking sampled responses by how likely they are to be wrong."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from core.errors import EmptyInput, MissingScore


def _one_minus_c(c: float) -> float:
    return -(1.0 - c)


def _abs_one_minus_c(c: float) -> float:
    return -abs(1.0 - c) if math.isfinite(c) else -math.inf


def _one_minus_min1(c: float) -> float:
    return -(1.0 - min(1.0, c))


def _one_minus_min_recip(c: float) -> float:
    if c <= 0.0:
        return -1.0
    return -(1.0 - min(c, 1.0 / c))


# Higher score means "keep first"; each maps a confidence C to minus a cost.
CONFIDENCE_TRANSFORMS: dict[str, Callable[[float], float]] = {
    "cheat_one_sided": _one_minus_c,
    "cheat_abs": _abs_one_minus_c,
    "cheat_min1": _one_minus_min1,
    "cheat_min_recip": _one_minus_min_recip,
}


@dataclass(frozen=True)
class RankedSample:
    sentence: str
    scores: dict[str, float]
    is_hallucination: bool


@dataclass
class RankingCurve:
    """Running response and hallucination rates when keeping the top-k samples."""

    strategy: str
    scores: np.ndarray
    hallucinations: np.ndarray
    response_rate: np.ndarray = field(init=False)
    hallucination_rate: np.ndarray = field(init=False)

    def __post_init__(self):
        n = self.scores.size
        k = np.arange(1, n + 1)
        self.response_rate = k / n
        self.hallucination_rate = np.cumsum(self.hallucinations) / k

    def at_threshold(self, min_score: float) -> tuple[float, float]:
        """Response and hallucination rates when keeping samples scoring at least ``min_score``."""
        keep = int(np.sum(self.scores >= min_score))
        if keep == 0:
            return 0.0, 0.0
        return float(self.response_rate[keep - 1]), float(self.hallucination_rate[keep - 1])

    def to_rows(self, max_points: int | None = None) -> list[dict]:
        """One row per kept prefix; ``max_points`` thins the curve evenly, keeping the last point."""
        idx = np.arange(self.scores.size)
        if max_points is not None and self.scores.size > max_points:
            idx = np.unique(np.linspace(0, self.scores.size - 1, max_points).round().astype(int))
        return [
            {
                "strategy": self.strategy,
                "score": float(s),
                "is_hallucination": bool(h),
                "response_rate": float(r),
                "hallucination_rate": float(q),
            }
            for s, h, r, q in zip(
                self.scores[idx], self.hallucinations[idx], self.response_rate[idx], self.hallucination_rate[idx]
            )
        ]


def cluster_scores(keys: Sequence, group_size: int) -> list[int]:
    """Semantic-cluster size of each sample within consecutive groups of ``group_size``.

    A sample with no key (malformed) scores 1.
    """
    if group_size < 1:
        raise ValueError("group_size must be positive")
    out = []
    for start in range(0, len(keys), group_size):
        chunk = keys[start : start + group_size]
        for key in chunk:
            out.append(1 if key is None else sum(1 for other in chunk if other == key))
    return out


def score_samples(
    sentences: Sequence[str],
    log_probs: Sequence[float],
    confidences: Sequence[float],
    keys: Sequence,
    hallucinations: Sequence[bool],
    cluster_sizes: Sequence[int] = (10, 120),
) -> list[RankedSample]:
    """Score all samples drawn for one query under every ranking strategy."""
    n = len(sentences)
    if not (len(log_probs) == len(confidences) == len(keys) == len(hallucinations) == n):
        raise ValueError("all per-sample sequences must have equal length")
    clusters = {size: cluster_scores(list(keys), size) for size in cluster_sizes}
    out = []
    for i, sentence in enumerate(sentences):
        n_tokens = max(len(sentence.split()), 1)
        scores = {
            "log_prob": float(log_probs[i]),
            "avg_token_log_prob": float(log_probs[i]) / n_tokens,
        }
        for size, values in clusters.items():
            scores[f"cluster_{size}"] = float(values[i])
        for name, transform in CONFIDENCE_TRANSFORMS.items():
            scores[name] = transform(float(confidences[i]))
        out.append(RankedSample(sentence, scores, bool(hallucinations[i])))
    return out


def ranking_comparison(
    samples: Sequence[RankedSample], strategies: Sequence[str] | None = None, seed: int = 0
) -> list[RankingCurve]:
    """One curve per strategy: samples sorted by descending score, ties shuffled by ``seed``.

    Raises:
        MissingScore: if a sample lacks a score for a requested strategy.
    """
    if not samples:
        raise EmptyInput("no samples to rank")
    strategies = list(strategies) if strategies is not None else list(samples[0].scores)
    hall = np.array([s.is_hallucination for s in samples], dtype=bool)
    curves = []
    for i, name in enumerate(strategies):
        try:
            scores = np.array([s.scores[name] for s in samples], dtype=np.float64)
        except KeyError:
            raise MissingScore(f"a sample has no score for strategy {name!r}") from None
        scores = np.where(np.isnan(scores), -np.inf, scores)
        perm = np.random.default_rng([seed, i]).permutation(len(samples))
        order = perm[np.argsort(-scores[perm], kind="stable")]
        curves.append(RankingCurve(name, scores[order], hall[order]))
    return curves
