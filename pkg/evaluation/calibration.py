"""First- and second-order calibration metrics."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field
from typing import Literal, Sequence

import numpy as np

from core.errors import EmptyInput, TooFewAnnotations, TooFewRecords, ZeroModelProbabilityOnObserved
from core.types import ProbVector

ReliabilityKind = Literal["ece1", "ece2", "confidence-vs-hallucination"]

DEFAULT_BINS = 100


@dataclass(frozen=True)
class ReliabilityBin:
    lower: float
    upper: float
    count: int
    mean_predicted: float
    mean_realized: float


@dataclass(frozen=True)
class BinnedReliability:
    """Per-bin predicted vs realized averages behind a calibration metric."""

    kind: ReliabilityKind
    bins: tuple[ReliabilityBin, ...] = field(default_factory=tuple)

    @property
    def total(self) -> int:
        return sum(b.count for b in self.bins)

    def to_rows(self) -> list[dict]:
        return [{"kind": self.kind, **asdict(b)} for b in self.bins]

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.DictWriter(
            out, fieldnames=["kind", "lower", "upper", "count", "mean_predicted", "mean_realized"]
        )
        writer.writeheader()
        writer.writerows(self.to_rows())
        return out.getvalue()


def sq_err_est(y, p_hat: float, annotations: Sequence) -> float:
    """Unbiased estimate of ``(p_hat - p(y|x))^2`` from ``K >= 2`` i.i.d. annotations.

    Uses ``p_hat^2 - 2 p_hat c/K + c(c-1)/(K(K-1))`` where ``c`` counts
    annotations equal to ``y``. The value can be negative.
    """
    k = len(annotations)
    if k < 2:
        raise TooFewAnnotations(f"need at least 2 annotations, got {k}")
    c = sum(1 for a in annotations if a == y)
    return p_hat * p_hat - 2.0 * p_hat * c / k + c * (c - 1) / (k * (k - 1))


def _equal_count_bins(
    predicted, realized, bins: int, kind: ReliabilityKind
) -> tuple[float, BinnedReliability]:
    pred = np.asarray(predicted, dtype=np.float64)
    real = np.asarray(realized, dtype=np.float64)
    if pred.shape != real.shape or pred.ndim != 1:
        raise ValueError("predicted and realized must be 1-d arrays of equal length")
    n = pred.size
    if bins < 1:
        raise ValueError("bins must be positive")
    if n < bins:
        raise TooFewRecords(f"{n} records cannot fill {bins} bins")
    # stable sort keeps original order among equal values
    order = np.argsort(pred, kind="stable")
    total = 0.0
    out = []
    for idx in np.array_split(order, bins):
        p, r = pred[idx], real[idx]
        mp, mr = float(p.mean()), float(r.mean())
        total += idx.size / n * abs(mp - mr)
        out.append(ReliabilityBin(float(p.min()), float(p.max()), int(idx.size), mp, mr))
    return total, BinnedReliability(kind, tuple(out))


def ece2(v_hat, sq_errs, bins: int = DEFAULT_BINS, n_classes: int = 1) -> tuple[float, BinnedReliability]:
    """Second-order calibration error of variance estimates.

    Records are pooled and sorted by ``v_hat``, split into equal-count bins,
    and the count-weighted gap between mean predicted variance and mean
    estimated squared error is multiplied by ``n_classes``.
    """
    value, table = _equal_count_bins(v_hat, sq_errs, bins, "ece2")
    return n_classes * value, table


def ece1(p_hat, realized, bins: int = DEFAULT_BINS, n_classes: int = 1) -> tuple[float, BinnedReliability]:
    """First-order calibration error: predicted probability vs label frequency."""
    value, table = _equal_count_bins(p_hat, realized, bins, "ece1")
    return n_classes * value, table


def kl_to_empirical(p_hat: ProbVector, annotations: Sequence, labels: Sequence | None = None) -> float:
    """``KL(empirical || p_hat)`` with ``0 ln 0 = 0``.

    Annotations are label positions, or label names when ``labels`` is given.

    Raises:
        ZeroModelProbabilityOnObserved: if an observed label has model probability 0.
    """
    if len(annotations) == 0:
        raise EmptyInput("no annotations")
    index = {label: i for i, label in enumerate(labels)} if labels is not None else None
    counts = np.zeros(len(p_hat))
    for a in annotations:
        counts[index[a] if index is not None else int(a)] += 1
    freq = counts / counts.sum()
    observed = freq > 0
    q = p_hat.entries[observed]
    if np.any(q <= 0):
        raise ZeroModelProbabilityOnObserved("model gives zero probability to an observed label")
    return float(np.sum(freq[observed] * (np.log(freq[observed]) - np.log(q))))


def variance_summary(v_hat, sq_errs) -> dict:
    """Average predicted variance next to average realized squared error."""
    v = np.asarray(v_hat, dtype=np.float64)
    e = np.asarray(sq_errs, dtype=np.float64)
    if v.size == 0:
        raise EmptyInput("no records")
    return {"n": int(v.size), "mean_v_hat": float(v.mean()), "mean_sq_err": float(e.mean())}


def default_confidence_edges(n_linear: int = 10, n_log: int = 6, c_max: float = 1e4) -> np.ndarray:
    """Linear bins on [0, 1] followed by log-spaced bins for confidences above one."""
    linear = np.linspace(0.0, 1.0, n_linear + 1)
    upper = np.logspace(0.0, np.log10(c_max), n_log + 1)[1:]
    return np.concatenate([linear, upper, [np.inf]])


def confidence_reliability(confidences, is_hallucination, edges=None) -> BinnedReliability:
    """Hallucination rate per confidence bin.

    ``mean_predicted`` holds the implied bound ``1 - mean(min(C, 1))``; for a
    calibrated model the realized rate sits at or below it. Empty bins are
    omitted.
    """
    conf = np.asarray(confidences, dtype=np.float64)
    hall = np.asarray(is_hallucination, dtype=np.float64)
    if conf.size == 0:
        raise EmptyInput("no samples")
    edges = default_confidence_edges() if edges is None else np.asarray(edges, dtype=np.float64)
    which = np.clip(np.searchsorted(edges, conf, side="right") - 1, 0, len(edges) - 2)
    out = []
    for b in range(len(edges) - 1):
        mask = which == b
        if not mask.any():
            continue
        bound = 1.0 - float(np.minimum(conf[mask], 1.0).mean())
        out.append(
            ReliabilityBin(float(edges[b]), float(edges[b + 1]), int(mask.sum()), bound, float(hall[mask].mean()))
        )
    return BinnedReliability("confidence-vs-hallucination", tuple(out))
