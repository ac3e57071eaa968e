"""Cheat-corrected estimators and the bounds they imply."""

from metrics.bounds import (
    Interval,
    cantelli_lower_bound,
    chebyshev_interval,
    check_beta,
    hallucination_bound,
)
from metrics.cheat import (
    CheatScore,
    cheat_score,
    cheat_score_from_log_probs,
    cheat_score_from_probs,
    cheat_scores,
    summarize_confidence,
)
from metrics.diagnostics import Diagnostics

__all__ = [
    "CheatScore",
    "Diagnostics",
    "Interval",
    "cantelli_lower_bound",
    "chebyshev_interval",
    "cheat_score",
    "cheat_score_from_log_probs",
    "cheat_score_from_probs",
    "cheat_scores",
    "check_beta",
    "hallucination_bound",
    "summarize_confidence",
]
