"""Counters for non-fatal numerical conditions."""

import logging
from dataclasses import asdict, dataclass

logger = logging.getLogger(__name__)


@dataclass
class Diagnostics:
    """Occurrence counts surfaced alongside metric results.

    Nothing here is an error: miscalibrated models legitimately produce
    negative variances or confidences above one, and those are reported
    rather than hidden.
    """

    negative_variance: int = 0
    confidence_above_one: int = 0
    infinite_confidence: int = 0
    clamped_variance: int = 0

    def observe(self, score) -> None:
        """Record the conditions present in a single ``CheatScore``."""
        if score.v_cheat < 0:
            self.negative_variance += 1
        if score.degenerate:
            self.infinite_confidence += 1
        elif score.confidence > 1.0:
            self.confidence_above_one += 1

    def merge(self, other: "Diagnostics") -> "Diagnostics":
        return Diagnostics(**{k: v + getattr(other, k) for k, v in asdict(self).items()})

    def to_dict(self) -> dict:
        return asdict(self)

    def log_summary(self, context: str = "") -> None:
        if any(asdict(self).values()):
            logger.warning("diagnostics%s: %s", f" ({context})" if context else "", asdict(self))
