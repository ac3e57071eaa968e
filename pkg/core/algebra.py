"""Algebra on pair distributions.

Maps between joint pair predictions and second-order (mean, covariance)
predictions, the binary (mu, rho) parameterization, and the eigenvalue helpers
used both for PSD checks and for the training penalty.
"""

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from config import get_settings
from core.errors import (
    AsymmetricInput,
    InvalidDistribution,
    InvalidSecondOrder,
    NotBinary,
    SymmetryViolation,
)
from core.types import (
    BinaryPairParams,
    JointPairDistribution,
    ProbVector,
    SecondOrderPrediction,
    default_labels,
)

logger = logging.getLogger(__name__)


def marginals(j: JointPairDistribution) -> tuple[ProbVector, ProbVector]:
    """Return the (Y1, Y2) marginals: row sums and column sums."""
    return ProbVector(j.matrix.sum(axis=1)), ProbVector(j.matrix.sum(axis=0))


def pair_covariance(j: JointPairDistribution) -> NDArray[np.float64]:
    """Pair covariance ``J - m1 m2^T``."""
    m1, m2 = marginals(j)
    return j.matrix - np.outer(m1.entries, m2.entries)


def pair_to_second_order(
    j: JointPairDistribution, tol: float | None = None
) -> SecondOrderPrediction:
    """Map a symmetric joint to its (mean, covariance) form.

    Raises:
        SymmetryViolation: if the symmetry defect exceeds ``tol``.
    """
    if tol is None:
        tol = get_settings().symmetry_tol_oracle
    defect = j.symmetry_defect
    if defect > tol:
        raise SymmetryViolation(f"symmetry defect {defect:.3g} exceeds tolerance {tol:.3g}")
    cov = pair_covariance(j)
    # exact no-op for symmetric inputs; removes sub-tolerance noise otherwise
    cov = (cov + cov.T) / 2.0
    m1, _ = marginals(j)
    return SecondOrderPrediction(m1, cov)


def second_order_to_pair(
    s: SecondOrderPrediction, labels: tuple[str, ...] = ()
) -> JointPairDistribution:
    """Inverse map: ``J = Sigma + p p^T``.

    Raises:
        InvalidSecondOrder: if the result has an entry below ``-tol`` or does not sum to 1.
    """
    tol = get_settings().normalization_tol
    p = s.mean.entries
    matrix = s.covariance + np.outer(p, p)
    if matrix.min() < -tol:
        raise InvalidSecondOrder(f"joint entry {matrix.min():.3g} is negative")
    if abs(matrix.sum() - 1.0) > tol:
        raise InvalidSecondOrder(f"joint sums to {matrix.sum():.12g}")
    matrix = np.where(matrix < 0.0, 0.0, matrix)
    return JointPairDistribution(matrix, labels or default_labels(len(p)))


def binary_params_to_joint(p: BinaryPairParams) -> JointPairDistribution:
    """Build the 2x2 joint ``rho*diag(1-mu, mu) + (1-rho)*q q^T`` with ``q = (1-mu, mu)``."""
    q = np.array([1.0 - p.mu, p.mu])
    matrix = p.rho * np.diag(q) + (1.0 - p.rho) * np.outer(q, q)
    return JointPairDistribution(matrix, ("0", "1"))


def joint_to_binary_params(
    j: JointPairDistribution, tol: float | None = None
) -> BinaryPairParams:
    """Recover (mu, rho) from a symmetric 2x2 joint; ``rho = 0`` when mu is 0 or 1."""
    if j.k != 2:
        raise NotBinary(f"expected K=2, got K={j.k}")
    if tol is None:
        tol = get_settings().symmetry_tol_oracle
    if abs(j.matrix[0, 1] - j.matrix[1, 0]) > tol:
        raise AsymmetricInput(
            f"off-diagonals differ by {abs(j.matrix[0, 1] - j.matrix[1, 0]):.3g}"
        )
    b = 0.5 * (j.matrix[0, 1] + j.matrix[1, 0])
    c = j.matrix[1, 1]
    mu = float(np.clip(b + c, 0.0, 1.0))
    denom = mu * (1.0 - mu)
    if denom <= 0.0:
        return BinaryPairParams(mu=mu, rho=0.0)
    rho = 1.0 - b / denom
    return BinaryPairParams(mu=mu, rho=float(np.clip(rho, 0.0, 1.0)))


def symmetric_eigh(matrix: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Eigenvalues (ascending) and eigenvectors of the symmetrized matrix."""
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.shape[0] > get_settings().max_alphabet:
        logger.warning("eigen-solver used on K=%d, above the validated cap", arr.shape[0])
    return np.linalg.eigh((arr + arr.T) / 2.0)


def min_eigenvalue(j: JointPairDistribution) -> float:
    """Smallest eigenvalue of the symmetrized joint matrix."""
    values, _ = symmetric_eigh(j.matrix)
    return float(values[0])


def mixture_joint(
    components: ArrayLike, weights: ArrayLike | None = None, labels: tuple[str, ...] = ()
) -> JointPairDistribution:
    """Weighted average of outer products ``p p^T`` over mixture components.

    ``components`` is an (M, K) array of conditional distributions; this is the
    exactly-calibrated joint for a group whose members have those conditionals.
    """
    comps = np.asarray(components, dtype=np.float64)
    if comps.ndim != 2 or comps.shape[0] == 0:
        raise InvalidDistribution("components must be a nonempty (M, K) array")
    if weights is None:
        w = np.full(comps.shape[0], 1.0 / comps.shape[0])
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (comps.shape[0],) or np.any(w < 0) or w.sum() <= 0:
            raise InvalidDistribution("weights must be nonnegative with positive total")
        w = w / w.sum()
    matrix = np.einsum("m,mi,mj->ij", w, comps, comps)
    return JointPairDistribution(matrix, labels or default_labels(comps.shape[1]))
