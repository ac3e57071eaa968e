"""Dataset generation stage."""

import logging

from api.schemas import RunConfig
from tools.common import DATASET_FILES, get_store, make_task, stage_result, stream_seed

logger = logging.getLogger(__name__)


def generate_dataset(config: RunConfig) -> dict:
    """
    Draw paired examples for the configured task and write them as JSONL.

    The same seed and split always give a byte-identical file; the first
    line is a header with the record checksum.

    Args:
        config: Validated run configuration

    Returns:
        Dict with success status, artifact paths and metadata
    """
    spec = config.data
    task = make_task(config)
    store = get_store(config)

    examples = task.make_dataset(spec.n, stream_seed(config.seed, spec.split), spec.workers)
    header = {"task": config.task, "seed": config.seed, "split": spec.split}
    if config.task == "lake":
        header["hidden_fraction"] = spec.hidden_fraction

    path = store.write_jsonl(
        DATASET_FILES[spec.split], header, (e.to_dict(config.task) for e in examples)
    )
    logger.info("Wrote %d %s examples for %s to %s", len(examples), spec.split, config.task, path)
    store.write_metadata(f"gen-data:{spec.split}", config.model_dump(mode="json"))

    return stage_result("gen-data", [path], {"n": len(examples), "split": spec.split})
