"""Model fitting stage."""

import logging

from api.schemas import RunConfig
from core.errors import ConfigInvalid
from models import MlpPairModel, tabular_from_counts, train, train_ensemble
from tools.common import (
    CHECKPOINT,
    DATASET_FILES,
    ENSEMBLE,
    get_store,
    load_dataset,
    make_grouping,
    make_task,
    oracle_checkpoint,
    require,
    stage_result,
)

logger = logging.getLogger(__name__)


def train_model(config: RunConfig) -> dict:
    """
    Fit the configured pair predictor and write its checkpoint.

    mlp trains the residual network on the training split, tabular counts
    pairs per group, and oracle records the recipe of the exactly
    calibrated model (no data needed).
    With ``model.ensemble_members`` set, mlp also fits that many
    single-response networks as the ensemble baseline of the eval stage.

    Returns:
        Dict with success status, artifact paths and metadata
    """
    store = get_store(config)
    spec = config.model
    artifacts = []
    metadata: dict = {"kind": spec.kind}
    if spec.ensemble_members and spec.kind != "mlp":
        raise ConfigInvalid("the ensemble baseline is trained alongside model.kind=mlp only")

    if spec.kind == "oracle":
        checkpoint = oracle_checkpoint(config)
    else:
        require(store, DATASET_FILES["train"])
        header, data = load_dataset(store, "train")
        if header.get("task") != config.task:
            raise ConfigInvalid(f"dataset is for task {header.get('task')!r}, config says {config.task!r}")
        metadata["n_train"] = len(data)

        if spec.kind == "tabular":
            model = tabular_from_counts(data, make_grouping(config), make_task(config).labels, spec.smoothing)
        else:
            if config.task != "sin1d":
                raise ConfigInvalid("the mlp model is only wired up for the sin1d task")
            if spec.mlp.head == "bernoulli":
                raise ConfigInvalid("a bernoulli head predicts single responses, not pairs")
            model = MlpPairModel(spec.mlp, seed=config.seed, labels=("0", "1"))
            train_config = config.train.model_copy(update={"seed": config.seed})
            result = train(model, data, train_config)
            rows = [{"step": r.step, "loss": r.loss, "penalty": r.penalty} for r in result.trace]
            artifacts.append(store.write_csv("loss.csv", rows, fieldnames=["step", "loss", "penalty"]))
            metadata["final_loss"] = result.trace[-1].loss
            if spec.ensemble_members:
                members = train_ensemble(data, spec.ensemble_members, train_config, spec.mlp)
                ensemble = {"task": config.task, "members": [m.to_dict() for m in members]}
                artifacts.append(store.write_json(ENSEMBLE, ensemble))
                metadata["ensemble_members"] = len(members)
        checkpoint = dict(model.to_dict(), task=config.task)

    artifacts.insert(0, store.write_json(CHECKPOINT, checkpoint))
    logger.info("Saved %s checkpoint to %s", spec.kind, artifacts[0])
    store.write_metadata("train", config.model_dump(mode="json"), {"model": metadata})
    return stage_result("train", artifacts, metadata)
