"""Value types and algebra for pair distributions."""

from core.algebra import (
    binary_params_to_joint,
    joint_to_binary_params,
    marginals,
    min_eigenvalue,
    mixture_joint,
    pair_covariance,
    pair_to_second_order,
    second_order_to_pair,
    symmetric_eigh,
)
from core.types import (
    BinaryPairParams,
    JointPairDistribution,
    ProbVector,
    SecondOrderPrediction,
)

__all__ = [
    "BinaryPairParams",
    "JointPairDistribution",
    "ProbVector",
    "SecondOrderPrediction",
    "binary_params_to_joint",
    "joint_to_binary_params",
    "marginals",
    "min_eigenvalue",
    "mixture_joint",
    "pair_covariance",
    "pair_to_second_order",
    "second_order_to_pair",
    "symmetric_eigh",
]
