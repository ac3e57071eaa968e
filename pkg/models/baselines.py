"""Single-response baselines used for comparison plots and ECE-2 tables."""

from __future__ import annotations

import numpy as np

from core.errors import TooFewMembers
from models.mlp import MlpConfig, MlpPairModel
from models.training import TrainConfig, train


def naive_variance(p_hat):
    """Bernoulli variance ``p(1 - p)`` read off the predicted probability."""
    p = np.asarray(p_hat, dtype=np.float64)
    out = p * (1.0 - p)
    return float(out) if out.ndim == 0 else out


def ensemble_predict(members, xs) -> tuple[np.ndarray, np.ndarray]:
    """Mean and unbiased (n - 1 divisor) variance of member predictions.

    ``members`` are fitted single-response models or callables returning
    ``P(Y=1)`` for a batch of inputs.
    """
    if len(members) < 2:
        raise TooFewMembers(f"ensemble needs at least 2 members, got {len(members)}")
    preds = np.stack(
        [m.bernoulli_prob(xs) if hasattr(m, "bernoulli_prob") else np.asarray(m(xs)) for m in members]
    )
    return preds.mean(axis=0), preds.var(axis=0, ddof=1)


def train_ensemble(
    dataset,
    n_members: int = 8,
    config: TrainConfig | None = None,
    mlp_config: MlpConfig | None = None,
) -> list[MlpPairModel]:
    """Independently initialized single-response networks, one seed each."""
    if n_members < 2:
        raise TooFewMembers(f"ensemble needs at least 2 members, got {n_members}")
    config = config or TrainConfig()
    mlp_config = (mlp_config or MlpConfig()).model_copy(update={"head": "bernoulli"})
    members = []
    for i in range(n_members):
        member = MlpPairModel(mlp_config, seed=config.seed + 1000 * (i + 1))
        members.append(train(member, dataset, config.model_copy(update={"seed": config.seed + i})).model)
    return members
