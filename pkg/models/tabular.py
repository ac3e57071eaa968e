"""Closed-form tabular pair models over an explicit grouping of inputs."""

from __future__ import annotations

import logging
import zlib
from typing import Any, Iterable

import numpy as np

from core.algebra import joint_to_binary_params
from core.errors import EmptyGroup
from core.types import JointPairDistribution
from metrics.cheat import CheatScore, cheat_score_from_probs
from models.base import JointPairModel, PairPredictor

logger = logging.getLogger(__name__)


def grouping_from_dict(data: dict):
    """Rebuild a grouping object from its ``to_dict`` form."""
    from tasks.pi import OffsetBuckets
    from tasks.sin1d import QuantileBins

    kinds = {QuantileBins.kind: QuantileBins, OffsetBuckets.kind: OffsetBuckets}
    params = {k: v for k, v in data.items() if k != "kind"}
    if data.get("kind") not in kinds:
        raise ValueError(f"Unknown grouping: {data.get('kind')}. Available: {list(kinds)}")
    return kinds[data["kind"]](**params)


class TabularPairModel(JointPairModel):
    """One joint per group: ``joint(x) = table[grouping(x)]``."""

    name = "tabular"
    display_name = "Tabular Pair Model"

    def __init__(self, grouping, table: dict[Any, JointPairDistribution], labels: tuple[str, ...]):
        self.grouping = grouping
        self.table = dict(table)
        self.labels = tuple(labels)
        self._binary_cache: dict | None = None

    def group_of(self, x: Any):
        return self.grouping(x)

    def joint(self, x: Any) -> JointPairDistribution:
        group = self.grouping(x)
        try:
            return self.table[group]
        except KeyError:
            raise EmptyGroup(f"no joint for group {group!r}") from None

    def binary_params(self, xs) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized ``(mu, rho)`` lookup for binary alphabets."""
        if len(self.labels) != 2:
            raise ValueError("binary_params needs a binary alphabet")
        if self._binary_cache is None:
            self._binary_cache = {g: self.predict_binary_group(g) for g in self.table}
        groups = self.grouping.batch(xs) if hasattr(self.grouping, "batch") else [self.grouping(x) for x in xs]
        try:
            pairs = np.array([self._binary_cache[g] for g in np.asarray(groups).tolist()])
        except KeyError as e:
            raise EmptyGroup(f"no joint for group {e.args[0]!r}") from None
        return pairs[:, 0], pairs[:, 1]

    def predict_binary_group(self, group) -> tuple[float, float]:
        params = joint_to_binary_params(self.table[group])
        return params.mu, params.rho

    def to_dict(self) -> dict:
        return {
            "kind": self.name,
            "grouping": self.grouping.to_dict(),
            "labels": list(self.labels),
            "groups": [
                {"group": group, "matrix": j.matrix.tolist()} for group, j in self.table.items()
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> TabularPairModel:
        labels = tuple(data["labels"])
        table = {
            entry["group"]: JointPairDistribution(np.asarray(entry["matrix"]), labels)
            for entry in data["groups"]
        }
        return cls(grouping_from_dict(data["grouping"]), table, labels)


def _conditionals(oracle, points) -> np.ndarray:
    batch = getattr(oracle, "conditional_batch", None)
    if batch is not None:
        return np.asarray(batch(points), dtype=np.float64)
    return np.stack([oracle.conditional(x).entries for x in points])


def group_joint(conditionals: np.ndarray, weights: np.ndarray, labels: tuple[str, ...]) -> JointPairDistribution:
    """Weighted mean of ``p p^T`` over members, computed as ``(C w)^T C``."""
    w = np.asarray(weights, dtype=np.float64)
    total = w.sum()
    if conditionals.shape[0] == 0 or total <= 0:
        raise EmptyGroup("group has no members with positive weight")
    matrix = (conditionals * (w / total)[:, None]).T @ conditionals
    matrix = (matrix + matrix.T) / 2.0
    return JointPairDistribution(matrix / matrix.sum(), labels)


def tabular_from_oracle(oracle, grouping, groups: Iterable | None = None) -> TabularPairModel:
    """Exactly calibrated model: each group's joint is the member-weighted mixture of ``p p^T``.

    Raises:
        EmptyGroup: if a group has no members with positive weight.
    """
    labels = tuple(oracle.labels)
    table = {}
    for group in groups if groups is not None else grouping.groups():
        points, weights = grouping.members(group)
        table[group] = group_joint(_conditionals(oracle, points), weights, labels)
    logger.info("Built tabular model for %s with %d groups", oracle.name, len(table))
    return TabularPairModel(grouping, table, labels)


def tabular_from_counts(
    data, grouping, labels: tuple[str, ...], smoothing: float = 0.0
) -> TabularPairModel:
    """Empirical model: symmetrized pair frequencies per group with additive smoothing.

    Raises:
        EmptyGroup: if there are no records, or a group of ``grouping`` has none.
    """
    if smoothing < 0:
        raise ValueError("smoothing must be nonnegative")
    labels = tuple(labels)
    index = {label: i for i, label in enumerate(labels)}
    counts: dict[Any, np.ndarray] = {}
    for record in data:
        group = grouping(record.x)
        table = counts.setdefault(group, np.zeros((len(labels), len(labels))))
        table[index[str(record.y1)], index[str(record.y2)]] += 1.0
    if not counts:
        raise EmptyGroup("no records to count")
    empty = [g for g in grouping.groups() if g not in counts]
    if empty:
        raise EmptyGroup(f"no records fall in group {empty[0]!r} ({len(empty)} empty groups)")
    table = {}
    for group, c in counts.items():
        c = c + smoothing
        c = (c + c.T) / 2.0
        table[group] = JointPairDistribution(c / c.sum(), labels)
    return TabularPairModel(grouping, table, labels)


class PerturbedPairModel(PairPredictor):
    """Wraps a joint model and jitters its self-cheat probabilities.

    Each ``(group, y)`` gets a fixed log-normal factor, so repeated queries
    agree. Sampling and marginals are untouched; only the confidence is
    miscalibrated, which yields confidences above one as trained models do.
    """

    name = "perturbed"
    display_name = "Perturbed Pair Model"

    def __init__(self, base: JointPairModel, sigma: float = 0.3, seed: int = 0):
        if sigma < 0:
            raise ValueError("sigma must be nonnegative")
        self.base = base
        self.sigma = sigma
        self.seed = seed

    @property
    def labels(self):
        return getattr(self.base, "labels", ())

    def _factor(self, x: Any, y: Any) -> float:
        group = self.base.group_of(x) if hasattr(self.base, "group_of") else x
        key = zlib.crc32(f"{self.seed}|{group!r}|{y}".encode("utf-8"))
        return float(np.exp(self.sigma * np.random.default_rng(key).standard_normal()))

    def sample(self, x: Any, rng: np.random.Generator):
        return self.base.sample(x, rng)

    def log_prob(self, x: Any, y: Any) -> float:
        return self.base.log_prob(x, y)

    def support(self, x: Any):
        return self.base.support(x)

    def label_rank(self, y: Any):
        return self.base.label_rank(y)

    def cheat_score(self, x: Any, y: Any) -> CheatScore:
        exact = self.base.cheat_score(x, y)
        if exact.p_marginal == 0.0:
            return exact
        p_self = min(1.0, exact.p_self_cheat * self._factor(x, y))
        return cheat_score_from_probs(exact.y, exact.p_marginal, p_self)
