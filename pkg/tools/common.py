"""Helpers shared by the pipeline stages."""

from __future__ import annotations

import logging

import numpy as np
from pydantic import ValidationError

from api.schemas import CheckpointRecord, DatasetHeader, PairedExampleRecord, RunConfig, StageResult
from core.errors import ConfigInvalid, IoFailure, MissingArtifact
from models import MlpPairModel, PairPredictor, PerturbedPairModel, load_model, tabular_from_oracle
from models.tabular import grouping_from_dict
from services.storage import ArtifactStore, get_artifact_store
from tasks import LakeTask, OffsetBuckets, PairedExample, PiTask, QuantileBins, Sin1dTask, TaskOracle

logger = logging.getLogger(__name__)

DATASET_FILES = {"train": "data.jsonl", "calib": "calib.jsonl", "test": "test.jsonl"}
CHECKPOINT = "model.json"
ENSEMBLE = "ensemble.json"

# Distinct random streams per stage, all derived from the run seed
STREAMS = {"train": 0, "calib": 1, "test": 2, "eval": 3, "bound": 4, "decode": 5}


def stream_seed(seed: int, stream: str) -> list[int]:
    return [int(seed), STREAMS[stream]]


def stream_rng(seed: int, stream: str) -> np.random.Generator:
    return np.random.default_rng(stream_seed(seed, stream))


def get_store(config: RunConfig) -> ArtifactStore:
    return get_artifact_store(config.out)


def make_task(config: RunConfig) -> TaskOracle:
    if config.task == "sin1d":
        return Sin1dTask()
    if config.task == "pi":
        return PiTask()
    return LakeTask(config.data.hidden_fraction)


def make_grouping(config: RunConfig):
    """Grouping used by tabular models of the configured task."""
    if config.task == "sin1d":
        return QuantileBins(config.model.n_bins, config.model.members_per_bin)
    if config.task == "pi":
        return OffsetBuckets(config.model.known_limit, config.model.growth)
    raise ConfigInvalid("the lake task has no tabular grouping; use model.kind=oracle")


def load_dataset(store: ArtifactStore, split: str = "train") -> tuple[dict, list[PairedExample]]:
    """Read and validate one dataset split.

    Raises:
        MissingArtifact: if the split was never generated.
        IoFailure: if the header or a record does not match its schema.
    """
    name = DATASET_FILES[split]
    header, records = store.read_jsonl(name)
    try:
        DatasetHeader.model_validate(header)
        rows = [PairedExampleRecord.model_validate(r).model_dump() for r in records]
    except ValidationError as e:
        raise IoFailure(f"malformed dataset {name}: {e}") from e
    return header, [PairedExample.from_dict(r) for r in rows]


def oracle_checkpoint(config: RunConfig) -> dict:
    """Recipe for an exactly calibrated model; rebuilt on load instead of stored densely."""
    if config.task == "lake":
        return {"kind": "lake_oracle", "task": "lake"}
    return {"kind": "oracle", "task": config.task, "grouping": make_grouping(config).to_dict()}


def load_checkpoint(store: ArtifactStore, config: RunConfig) -> PairPredictor:
    """Model written by the train stage.

    For the sequence tasks a positive ``eval.perturb_sigma`` wraps it in a
    ``PerturbedPairModel``.

    Raises:
        MissingArtifact: if no checkpoint exists.
        IoFailure: if the checkpoint has an unknown kind.
    """
    data = store.read_json(CHECKPOINT)
    try:
        CheckpointRecord.model_validate(data)
    except ValidationError as e:
        raise IoFailure(f"malformed checkpoint: {e}") from e
    if data.get("task") not in (None, config.task):
        raise ConfigInvalid(f"checkpoint was trained for task {data['task']!r}, not {config.task!r}")
    if data.get("kind") == "oracle":
        model = tabular_from_oracle(make_task(config), grouping_from_dict(data["grouping"]))
    else:
        model = load_model(data)
    if config.eval.perturb_sigma > 0 and config.task != "sin1d":
        logger.info("Perturbing self-cheat probabilities with sigma=%g", config.eval.perturb_sigma)
        model = PerturbedPairModel(model, config.eval.perturb_sigma, seed=config.seed)
    return model


def load_ensemble(store: ArtifactStore) -> list[MlpPairModel]:
    """Members of the single-response ensemble baseline written by the train stage."""
    data = store.read_json(ENSEMBLE)
    try:
        for member in data["members"]:
            CheckpointRecord.model_validate(member)
    except (KeyError, TypeError, ValidationError) as e:
        raise IoFailure(f"malformed ensemble checkpoint: {e}") from e
    return [MlpPairModel.from_dict(member) for member in data["members"]]


def require(store: ArtifactStore, *names: str) -> None:
    missing = [n for n in names if not store.exists(n)]
    if missing:
        raise MissingArtifact(f"missing artifacts in {store.path('')}: {', '.join(missing)}")


def stage_result(stage: str, artifacts: list, metadata: dict | None = None) -> dict:
    return StageResult(
        success=True, stage=stage, artifacts=[str(a) for a in artifacts], metadata=metadata or {}
    ).model_dump()
