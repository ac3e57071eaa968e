"""Pair predictors: tabular, trained and baseline models."""

from models.base import JointPairModel, PairPredictor
from models.baselines import ensemble_predict, naive_variance, train_ensemble
from models.mlp import MlpConfig, MlpPairModel
from models.tabular import (
    PerturbedPairModel,
    TabularPairModel,
    tabular_from_counts,
    tabular_from_oracle,
)
from models.training import LossRecord, TrainConfig, TrainResult, train


def load_model(data: dict) -> PairPredictor:
    """Rebuild a model from its checkpoint dictionary."""
    kind = data.get("kind")
    if kind == MlpPairModel.name:
        return MlpPairModel.from_dict(data)
    if kind == TabularPairModel.name:
        return TabularPairModel.from_dict(data)
    if kind == "lake_oracle":
        from tasks.lake import lake_pair_oracle

        return lake_pair_oracle()
    raise ValueError(f"Unknown model kind: {kind}")


__all__ = [
    "JointPairModel",
    "LossRecord",
    "MlpConfig",
    "MlpPairModel",
    "PairPredictor",
    "PerturbedPairModel",
    "TabularPairModel",
    "TrainConfig",
    "TrainResult",
    "ensemble_predict",
    "load_model",
    "naive_variance",
    "tabular_from_counts",
    "tabular_from_oracle",
    "train",
    "train_ensemble",
]
