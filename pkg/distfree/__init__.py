"""Distribution-free adjustment of variance estimates for binary pair models."""

from distfree.adjust import (
    BoundReport,
    adjust,
    adjusted_interval,
    adjusted_intervals,
    binary_predictions,
    epsilon_sweep,
    expected_d_epsilon,
    score_batch,
    score_example,
)
from distfree.hoeffding import (
    HoeffdingInterval,
    MeanConfidenceInterval,
    hoeffding_margin,
    hoeffding_upper,
)

__all__ = [
    "BoundReport",
    "HoeffdingInterval",
    "MeanConfidenceInterval",
    "adjust",
    "adjusted_interval",
    "adjusted_intervals",
    "binary_predictions",
    "epsilon_sweep",
    "expected_d_epsilon",
    "hoeffding_margin",
    "hoeffding_upper",
    "score_batch",
    "score_example",
]
