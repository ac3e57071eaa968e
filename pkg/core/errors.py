"""Exception hierarchy shared by every package.

Errors split into two families so the command line can map them to exit codes:
``ConfigError`` (bad input, exit 2) and ``ModelError`` (runtime/model failure, exit 3).
"""


class PairCalError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = 3


class ConfigError(PairCalError):
    """Invalid user input: configuration, arguments or missing artifacts."""

    exit_code = 2


class ModelError(PairCalError):
    """Numerical or model failure during a computation."""

    exit_code = 3


# core
class InvalidDistribution(ConfigError):
    """A probability vector or joint failed its validity check."""


class SymmetryViolation(ModelError):
    """A joint pair distribution is not symmetric within tolerance."""


class InvalidSecondOrder(ConfigError):
    """A second-order prediction does not map back to a valid joint."""


class NotBinary(ConfigError):
    """An operation that needs K=2 received another alphabet size."""


class AsymmetricInput(ConfigError):
    """Off-diagonal entries of a binary joint differ beyond tolerance."""


# metrics / distfree
class InvalidBeta(ConfigError):
    """Failure tolerance outside (0, 1)."""


class InvalidEpsilon(ConfigError):
    """Variance floor must be strictly positive."""


class InvalidAlpha(ConfigError):
    """Confidence level outside (0, 1)."""


class EmptyInput(ConfigError):
    """An aggregate was requested over no values."""


class ScoreOutOfRange(ModelError):
    """A calibration score lies outside [-1/eps, 1/eps]."""


# models
class EmptyGroup(ConfigError):
    """A grouping produced a group with no members or records."""


class NonFiniteActivation(ModelError):
    """A forward pass produced NaN or infinity."""


class ZeroProbabilityTarget(ModelError):
    """The target pair has (numerically) zero probability under the model."""


class DivergedLoss(ModelError):
    """Training produced a non-finite loss."""


class TooFewMembers(ConfigError):
    """An ensemble needs at least two members."""


# evaluation
class TooFewAnnotations(ConfigError):
    """The squared-error estimator needs at least two annotations."""


class TooFewRecords(ConfigError):
    """Fewer records than bins."""


class ZeroModelProbabilityOnObserved(ModelError):
    """The model assigns zero probability to an observed label."""


class MissingScore(ConfigError):
    """A ranking sample lacks a score for an enabled strategy."""


# tasks
class NonConvergence(ModelError):
    """Value iteration hit its sweep cap before converging."""


class TrajectoryTooLong(ConfigError):
    """A trajectory exceeds the environment horizon."""


# cli / io
class IoFailure(ModelError):
    """Reading or writing an artifact failed."""


class ConfigInvalid(ConfigError):
    """A run configuration failed validation."""


class MissingArtifact(ConfigError):
    """A stage needs an artifact that does not exist."""
