"""Calibration metrics and ranking comparisons."""

from evaluation.calibration import (
    BinnedReliability,
    ReliabilityBin,
    confidence_reliability,
    default_confidence_edges,
    ece1,
    ece2,
    kl_to_empirical,
    sq_err_est,
    variance_summary,
)
from evaluation.ranking import (
    CONFIDENCE_TRANSFORMS,
    RankedSample,
    RankingCurve,
    cluster_scores,
    ranking_comparison,
    score_samples,
)

__all__ = [
    "BinnedReliability",
    "CONFIDENCE_TRANSFORMS",
    "RankedSample",
    "RankingCurve",
    "ReliabilityBin",
    "cluster_scores",
    "confidence_reliability",
    "default_confidence_edges",
    "ece1",
    "ece2",
    "kl_to_empirical",
    "ranking_comparison",
    "score_samples",
    "sq_err_est",
    "variance_summary",
]
