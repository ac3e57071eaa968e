"""Evaluation stage: calibration, confidence and ranking metrics against the task oracle."""

from __future__ import annotations

import logging

import numpy as np

from api.schemas import RunConfig
from decode import DecodePolicy
from distfree import binary_predictions
from evaluation import confidence_reliability, ece1, ece2, ranking_comparison, score_samples, variance_summary
from metrics import Diagnostics, hallucination_bound, summarize_confidence
from models import ensemble_predict, naive_variance
from services.storage import ArtifactStore
from tasks import sin1d_prob
from tasks.lake import HIDDEN, LAKE_CELLS, crosses_lake, full_view, trajectory_prob
from tools.common import (
    CHECKPOINT,
    ENSEMBLE,
    get_store,
    load_checkpoint,
    load_ensemble,
    make_grouping,
    make_task,
    require,
    stage_result,
    stream_rng,
)

logger = logging.getLogger(__name__)

RANKING_POINTS = 200


def evaluate_model(config: RunConfig) -> dict:
    """
    Score the trained model against the exact oracle of its task.

    Writes ``eval.json`` plus the CSV tables the report stage plots.

    Returns:
        Dict with success status, artifact paths and summary metrics
    """
    store = get_store(config)
    require(store, CHECKPOINT)
    model = load_checkpoint(store, config)
    rng = stream_rng(config.seed, "eval")

    if config.task == "sin1d":
        summary, artifacts = _evaluate_sin1d(model, config, store, rng)
    else:
        summary, artifacts = _evaluate_sequences(model, config, store, rng)

    summary["model"] = model.get_capabilities()
    artifacts.append(store.write_json("eval.json", summary))
    store.write_metadata("eval", config.model_dump(mode="json"))
    return stage_result("eval", artifacts, summary)


# ===================
# Binary task
# ===================


def _evaluate_sin1d(model, config: RunConfig, store: ArtifactStore, rng: np.random.Generator):
    spec = config.eval
    xs = rng.standard_normal(spec.n)
    p_true = sin1d_prob(xs)
    y = (rng.random(spec.n) < p_true).astype(np.float64)
    p_hat, v_hat = binary_predictions(model, xs)
    sq_err = (p_hat - p_true) ** 2
    v_naive = naive_variance(p_hat)

    ece2_cheat, table_cheat = ece2(v_hat, sq_err, spec.bins)
    ece2_naive, table_naive = ece2(v_naive, sq_err, spec.bins)
    ece1_value, table_ece1 = ece1(p_hat, y, spec.bins)
    reliability = table_cheat.to_rows() + [dict(r, kind="ece2_naive") for r in table_naive.to_rows()]
    ece2_ensemble = None
    if store.exists(ENSEMBLE):
        ens_mean, ens_var = ensemble_predict(load_ensemble(store), xs)
        ece2_ensemble, table_ensemble = ece2(ens_var, (ens_mean - p_true) ** 2, spec.bins)
        reliability += [dict(r, kind="ece2_ensemble") for r in table_ensemble.to_rows()]

    coverage = []
    for beta in spec.betas:
        half = np.sqrt(np.maximum(v_hat, 0.0) / beta)
        coverage.append(
            {"beta": beta, "n": spec.n, "failure_rate": float(np.mean(np.abs(p_hat - p_true) > half))}
        )

    grid = np.linspace(-3.0, 3.0, spec.grid)
    g_hat, g_var = binary_predictions(model, grid)
    g_true = sin1d_prob(grid)
    profile = [
        {"x": float(x), "p_true": float(t), "p_hat": float(p), "v_cheat": float(v),
         "v_naive": float(p * (1.0 - p)), "sq_err": float((p - t) ** 2)}
        for x, t, p, v in zip(grid, g_true, g_hat, g_var)
    ]

    artifacts = [
        store.write_csv("reliability.csv", reliability),
        store.write_csv("ece1.csv", table_ece1.to_rows()),
        store.write_csv("coverage.csv", coverage),
        store.write_csv("profile.csv", profile),
    ]
    summary = {
        "task": "sin1d",
        "ece1": ece1_value,
        "ece2": ece2_cheat,
        "ece2_naive": ece2_naive,
        "ece2_ensemble": ece2_ensemble,
        "variance": variance_summary(v_hat, sq_err),
        "negative_variance": int(np.sum(v_hat < 0)),
        "coverage": coverage,
    }
    logger.info("ECE-2 %.5f (naive %.5f), ECE-1 %.5f", ece2_cheat, ece2_naive, ece1_value)
    return summary, artifacts


# ===================
# Sequence tasks (pi, lake)
# ===================


def _draw_queries(config: RunConfig, task, rng: np.random.Generator) -> list[tuple]:
    """``(model input, hallucination test)`` per query."""
    n = config.eval.n
    if config.task == "pi":
        return [(x, lambda y, x=x: task.is_hallucination(x, y)) for x in task.sample_inputs(n, rng)]
    queries = []
    for _ in range(n):
        patch = LAKE_CELLS[rng.integers(len(LAKE_CELLS))]
        view = HIDDEN if rng.random() < config.data.hidden_fraction else full_view(patch)
        queries.append((view, lambda y, patch=patch: trajectory_prob(y, patch) == 0.0))
    return queries


def _evaluate_sequences(model, config: RunConfig, store: ArtifactStore, rng: np.random.Generator):
    spec = config.eval
    task = make_task(config)
    diagnostics = Diagnostics()
    keyed = config.task == "pi"

    samples, scores, halls, crossings, groups = [], [], [], [], []
    grouping = make_grouping(config) if keyed else None
    for x, is_bad in _draw_queries(config, task, rng):
        ys = [model.sample(x, rng) for _ in range(spec.samples_per_query)]
        cheat = [model.cheat_score(x, y) for y in ys]
        bad = [bool(is_bad(y)) for y in ys]
        for s in cheat:
            diagnostics.observe(s)
        scores.extend(cheat)
        halls.extend(bad)
        if keyed:
            groups.extend([grouping(x)] * len(ys))
            samples.extend(
                score_samples(
                    ys,
                    [model.log_prob(x, y) for y in ys],
                    [s.confidence for s in cheat],
                    [task.equivalence_key(y) for y in ys],
                    bad,
                    spec.cluster_sizes,
                )
            )
        else:
            crossings.extend(crosses_lake(y) for y in ys)

    confidences = np.array([s.confidence for s in scores])
    hall = np.array(halls, dtype=bool)
    artifacts = [store.write_csv("confidence.csv", confidence_reliability(confidences, hall).to_rows())]

    selective = []
    for mode in ("one_sided", "absolute"):
        for beta in spec.betas:
            policy = DecodePolicy(kind="selective_filter", beta=beta, threshold_mode=mode)
            kept = np.array([policy.passes(s) for s in scores], dtype=bool)
            selective.append(
                {
                    "threshold_mode": mode,
                    "beta": beta,
                    "response_rate": float(kept.mean()),
                    "hallucination_rate": float(hall[kept].mean()) if kept.any() else 0.0,
                }
            )
    artifacts.append(store.write_csv("selective.csv", selective))

    summary = {
        "task": config.task,
        "n_samples": int(hall.size),
        "hallucination_rate": float(hall.mean()),
        "hallucination_bound": hallucination_bound(scores),
        "selective": selective,
        "diagnostics": diagnostics.to_dict(),
    }
    diagnostics.log_summary(f"{config.task} eval")

    if keyed:
        curves = ranking_comparison(samples, seed=config.seed)
        rows = [row for curve in curves for row in curve.to_rows(RANKING_POINTS)]
        artifacts.append(store.write_csv("ranking.csv", rows))
        by_group = []
        group_ids = np.array(groups)
        for g in sorted(set(groups)):
            mask = group_ids == g
            lo, hi = grouping.bounds(g)
            by_group.append(
                {"group": g, "lo": lo, "hi": hi, **summarize_confidence(confidences[mask], ~hall[mask], spec.outlier_cutoff)}
            )
        artifacts.append(store.write_csv("by_group.csv", by_group))
    else:
        summary["lake_crossing_rate"] = float(np.mean(crossings))

    logger.info(
        "%s: hallucination rate %.4f, bound %.4f over %d samples",
        config.task,
        summary["hallucination_rate"],
        summary["hallucination_bound"],
        summary["n_samples"],
    )
    return summary, artifacts
