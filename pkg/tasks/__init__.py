"""Synthetic tasks with exact oracles."""

from tasks.base import PairedExample, TaskOracle
from tasks.lake import (
    LakePairOracle,
    LakeTask,
    crosses_lake,
    lake_dataset,
    lake_expert,
    lake_pair_oracle,
)
from tasks.pcfg import Pcfg, equivalence_key, pcfg_enumerate_support, pcfg_inside_prob
from tasks.pi import OffsetBuckets, PiTask, pi_digit, pi_query_sampler, query_text
from tasks.sin1d import QuantileBins, Sin1dTask, sin1d_dataset, sin1d_prob

TASKS = {
    "sin1d": Sin1dTask,
    "pi": PiTask,
    "lake": LakeTask,
}


def get_task(name: str, **kwargs) -> TaskOracle:
    """Instantiate a task oracle by name."""
    if name not in TASKS:
        raise ValueError(f"Unknown task: {name}. Available: {list(TASKS.keys())}")
    return TASKS[name](**kwargs)


__all__ = [
    "LakePairOracle",
    "LakeTask",
    "OffsetBuckets",
    "PairedExample",
    "Pcfg",
    "PiTask",
    "QuantileBins",
    "Sin1dTask",
    "TASKS",
    "TaskOracle",
    "crosses_lake",
    "equivalence_key",
    "get_task",
    "lake_dataset",
    "lake_expert",
    "lake_pair_oracle",
    "pcfg_enumerate_support",
    "pcfg_inside_prob",
    "pi_digit",
    "pi_query_sampler",
    "query_text",
    "sin1d_dataset",
    "sin1d_prob",
]
