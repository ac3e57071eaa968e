"""Distribution-free bound stage."""

import logging

import numpy as np

from api.schemas import BoundReportRecord, RunConfig
from core.errors import NotBinary
from distfree import adjust, adjusted_intervals, binary_predictions, epsilon_sweep, expected_d_epsilon
from tasks import sin1d_prob
from tools.common import (
    CHECKPOINT,
    DATASET_FILES,
    get_store,
    load_checkpoint,
    load_dataset,
    require,
    stage_result,
    stream_rng,
)

logger = logging.getLogger(__name__)


def bound_model(config: RunConfig) -> dict:
    """
    Adjust the model's variance estimates on the calibration split.

    Writes ``bound.json`` (the bound report). For the 1D task the oracle is
    known, so the stage also checks interval coverage on fresh inputs and
    writes ``intervals.csv``.

    Returns:
        Dict with success status, artifact paths and metadata
    """
    if config.task != "sin1d":
        raise NotBinary(f"the bound stage needs binary responses; task {config.task!r} is not binary")
    store = get_store(config)
    require(store, CHECKPOINT, DATASET_FILES["calib"])
    model = load_checkpoint(store, config)
    _, calib = load_dataset(store, "calib")
    spec = config.bound

    report = adjust(calib, model, spec.epsilon, spec.alpha)
    summary = {"report": BoundReportRecord.model_validate(report.to_dict()).model_dump(), "beta": spec.beta}
    artifacts = []

    rng = stream_rng(config.seed, "bound")
    xs = rng.standard_normal(spec.n_test)
    p_true = sin1d_prob(xs)
    p_hat, v_hat = binary_predictions(model, xs)
    lo, hi = adjusted_intervals(p_hat, v_hat, report, spec.beta)
    covered = (lo <= p_true) & (p_true <= hi)
    summary["coverage"] = float(covered.mean())
    summary["mean_half_width"] = float(np.mean((hi - lo) / 2.0))
    summary["expected_d_epsilon"] = expected_d_epsilon(p_true, p_hat, v_hat, spec.epsilon)
    summary["gamma_covers_d_epsilon"] = report.gamma_plus >= summary["expected_d_epsilon"]
    rows = [
        {"x": float(x), "p_hat": float(p), "v_hat": float(v), "lo": float(a), "hi": float(b), "covered": bool(c)}
        for x, p, v, a, b, c in zip(xs, p_hat, v_hat, lo, hi, covered)
    ]
    artifacts.append(store.write_csv("intervals.csv", rows))

    if spec.epsilons:
        sweep = []
        for r in epsilon_sweep(calib, model, spec.epsilons, spec.alpha):
            lo_e, hi_e = adjusted_intervals(p_hat, v_hat, r, spec.beta)
            sweep.append(dict(r.to_dict(), mean_half_width=float(np.mean((hi_e - lo_e) / 2.0))))
        artifacts.append(store.write_csv("epsilon_sweep.csv", sweep))
        summary["epsilon_sweep"] = sweep

    logger.info(
        "gamma_plus %.4f, coverage %.4f at beta=%.3g", report.gamma_plus, summary["coverage"], spec.beta
    )
    artifacts.insert(0, store.write_json("bound.json", summary))
    store.write_metadata("bound", config.model_dump(mode="json"))
    return stage_result("bound", artifacts, summary)
