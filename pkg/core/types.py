"""Immutable value types for pair distributions and second-order predictions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from config import get_settings
from core.errors import InvalidDistribution


def _frozen(values: ArrayLike, ndim: int) -> NDArray[np.float64]:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise InvalidDistribution(f"expected a {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidDistribution("entries must be finite")
    arr.flags.writeable = False
    return arr


def default_labels(k: int) -> tuple[str, ...]:
    """Labels ``("0", "1", ...)`` for an alphabet of size ``k``."""
    return tuple(str(i) for i in range(k))


@dataclass(frozen=True)
class ProbVector:
    """Probability vector over a finite response alphabet."""

    entries: NDArray[np.float64]

    def __post_init__(self):
        arr = _frozen(self.entries, 1)
        tol = get_settings().normalization_tol
        if arr.size == 0:
            raise InvalidDistribution("probability vector is empty")
        if np.any(arr < 0):
            raise InvalidDistribution(f"negative probability {arr.min():.3g}")
        if abs(arr.sum() - 1.0) > tol:
            raise InvalidDistribution(f"probabilities sum to {arr.sum():.12g}, not 1")
        object.__setattr__(self, "entries", arr)

    def __len__(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, index: int) -> float:
        return float(self.entries[index])

    def to_dict(self) -> dict:
        return {"entries": self.entries.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> ProbVector:
        return cls(np.asarray(data["entries"], dtype=np.float64))


@dataclass(frozen=True)
class JointPairDistribution:
    """Dense K x K joint over response pairs ``(y1, y2)``.

    Row index is ``y1``, column index is ``y2``. Symmetry is not enforced at
    construction: trained models may produce asymmetric joints and callers
    inspect ``symmetry_defect`` instead.
    """

    matrix: NDArray[np.float64]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        arr = _frozen(self.matrix, 2)
        tol = get_settings().normalization_tol
        if arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise InvalidDistribution(f"joint must be square and nonempty, got {arr.shape}")
        if np.any(arr < 0):
            raise InvalidDistribution(f"negative joint entry {arr.min():.3g}")
        if abs(arr.sum() - 1.0) > tol:
            raise InvalidDistribution(f"joint sums to {arr.sum():.12g}, not 1")
        labels = tuple(self.labels) if self.labels else default_labels(arr.shape[0])
        if len(labels) != arr.shape[0] or len(set(labels)) != len(labels):
            raise InvalidDistribution("labels must be unique and match the matrix size")
        object.__setattr__(self, "matrix", arr)
        object.__setattr__(self, "labels", labels)

    @property
    def k(self) -> int:
        return self.matrix.shape[0]

    def index(self, label: str | int) -> int:
        """Position of ``label`` in the alphabet; integers are taken as positions."""
        if isinstance(label, (int, np.integer)):
            if not 0 <= label < self.k:
                raise InvalidDistribution(f"label index {label} out of range for K={self.k}")
            return int(label)
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidDistribution(f"unknown label {label!r}") from None

    @property
    def symmetry_defect(self) -> float:
        """Largest absolute difference between the matrix and its transpose."""
        return float(np.max(np.abs(self.matrix - self.matrix.T)))

    def is_symmetric(self, tol: float | None = None) -> bool:
        if tol is None:
            tol = get_settings().symmetry_tol_oracle
        return self.symmetry_defect <= tol

    def symmetrized(self) -> JointPairDistribution:
        """Return ``(J + J^T) / 2``; only used when explicitly requested."""
        return JointPairDistribution((self.matrix + self.matrix.T) / 2.0, self.labels)

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "matrix": self.matrix.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> JointPairDistribution:
        return cls(np.asarray(data["matrix"], dtype=np.float64), tuple(data.get("labels") or ()))


@dataclass(frozen=True)
class SecondOrderPrediction:
    """Mean prediction plus epistemic covariance."""

    mean: ProbVector
    covariance: NDArray[np.float64] = field(repr=False)

    def __post_init__(self):
        cov = _frozen(self.covariance, 2)
        tol = get_settings().normalization_tol
        k = len(self.mean)
        if cov.shape != (k, k):
            raise InvalidDistribution(f"covariance shape {cov.shape} does not match K={k}")
        if np.max(np.abs(cov - cov.T)) > tol:
            raise InvalidDistribution("covariance is not symmetric")
        if np.max(np.abs(cov.sum(axis=1))) > tol:
            raise InvalidDistribution("covariance rows must sum to zero")
        if np.min(np.diag(cov)) < -tol:
            raise InvalidDistribution("covariance has a negative diagonal entry")
        object.__setattr__(self, "covariance", cov)

    def variance(self, index: int) -> float:
        return float(self.covariance[index, index])

    def to_dict(self) -> dict:
        return {"mean": self.mean.entries.tolist(), "covariance": self.covariance.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> SecondOrderPrediction:
        return cls(ProbVector(np.asarray(data["mean"])), np.asarray(data["covariance"]))


@dataclass(frozen=True)
class BinaryPairParams:
    """Binary pair predictor in (mu, rho) form: P(Y=1) and pair correlation."""

    mu: float
    rho: float

    def __post_init__(self):
        for name in ("mu", "rho"):
            value = float(getattr(self, name))
            if not 0.0 <= value <= 1.0:
                raise InvalidDistribution(f"{name}={value} outside [0, 1]")
            object.__setattr__(self, name, value)

    @property
    def v_cheat(self) -> float:
        """Cheat-corrected variance of ``P(Y=1)``: ``rho * mu * (1 - mu)``."""
        return self.rho * self.mu * (1.0 - self.mu)
