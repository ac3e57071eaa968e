"""Decoding stage: answer sampled queries with a cheat-corrected decoder."""

import logging
from collections import Counter

from api.schemas import DecisionRecord, RunConfig
from core.errors import ConfigInvalid
from decode import Response, decision_record, decode
from tasks.lake import HIDDEN, LAKE_CELLS, crosses_lake, full_view, trajectory_prob
from tools.common import CHECKPOINT, get_store, load_checkpoint, make_task, require, stage_result, stream_rng

logger = logging.getLogger(__name__)


def decode_queries(config: RunConfig) -> dict:
    """
    Run the configured decoder on fresh queries and write ``decisions.jsonl``.

    Each record holds the query, the decision (response, abstain or
    exhausted), the answer and its confidence, and whether the answer is a
    hallucination under the true environment.

    Returns:
        Dict with success status, artifact paths and rates
    """
    if config.task == "sin1d":
        raise ConfigInvalid("decoding needs a sequence task (pi or lake)")
    store = get_store(config)
    require(store, CHECKPOINT)
    model = load_checkpoint(store, config)
    task = make_task(config)
    policy = config.decode.policy
    rng = stream_rng(config.seed, "decode")

    records = []
    counts: Counter = Counter()
    for _ in range(config.decode.queries):
        if config.task == "lake":
            patch = LAKE_CELLS[rng.integers(len(LAKE_CELLS))]
            x = HIDDEN if rng.random() < config.data.hidden_fraction else full_view(patch)
        else:
            patch = None
            x = task.sample_inputs(1, rng)[0]
        decision = decode(model, x, policy, rng)
        record = decision_record(list(x) if isinstance(x, tuple) else x, decision)
        if isinstance(decision, Response):
            if patch is not None:
                record["is_hallucination"] = bool(trajectory_prob(decision.y, patch) == 0.0)
                record["crosses_lake"] = bool(crosses_lake(decision.y))
                counts["crosses_lake"] += record["crosses_lake"]
            else:
                record["is_hallucination"] = bool(task.is_hallucination(x, decision.y))
            counts["hallucination"] += record["is_hallucination"]
        counts[record["decision"]] += 1
        records.append(DecisionRecord.model_validate(record).model_dump(exclude_unset=True))

    n_resp = counts["response"]
    metadata = {
        "queries": len(records),
        "responses": n_resp,
        "abstentions": counts["abstain"],
        "exhausted": counts["exhausted"],
        "response_rate": n_resp / len(records),
        "hallucination_rate": counts["hallucination"] / n_resp if n_resp else 0.0,
        "policy": policy.model_dump(),
    }
    if config.task == "lake":
        metadata["lake_crossing_rate"] = counts["crosses_lake"] / n_resp if n_resp else 0.0
    logger.debug("decoder outcomes: %s", dict(counts))

    header = {"task": config.task, "seed": config.seed, "split": "decode"}
    artifacts = [store.write_jsonl("decisions.jsonl", header, records), store.write_json("decode.json", metadata)]
    store.write_metadata("decode", config.model_dump(mode="json"))
    logger.info(
        "Decoded %d queries with %s: response rate %.3f, hallucination rate %.4f",
        len(records),
        policy.kind,
        metadata["response_rate"],
        metadata["hallucination_rate"],
    )
    return stage_result("decode", artifacts, metadata)
