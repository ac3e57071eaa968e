"""Subcommand registry and exit codes for the command line."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from api.schemas import RunConfig, load_run_config, run_config_schema
from core.errors import ConfigInvalid, PairCalError
from tools import bound_model, build_report, decode_queries, evaluate_model, generate_dataset, train_model

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


@dataclass(frozen=True)
class Option:
    """A subcommand flag that maps onto a dotted config path."""

    flag: str
    path: str
    type: Callable = str
    help: str = ""
    choices: tuple | None = None


@dataclass(frozen=True)
class Command:
    name: str
    run: Callable[[RunConfig], dict]
    help: str
    options: tuple[Option, ...] = field(default_factory=tuple)


COMMANDS: dict[str, Command] = {
    c.name: c
    for c in (
        Command(
            "gen-data",
            generate_dataset,
            "Generate a paired dataset as JSONL",
            (
                Option("--n", "data.n", int, "Number of paired examples"),
                Option("--split", "data.split", str, "Dataset split", ("train", "calib", "test")),
                Option("--hidden-fraction", "data.hidden_fraction", float, "Lake: fraction of hidden views"),
            ),
        ),
        Command(
            "train",
            train_model,
            "Fit a pair predictor and write model.json",
            (
                Option("--kind", "model.kind", str, "Model kind", ("mlp", "tabular", "oracle")),
                Option("--iterations", "train.iterations", int, "Training iterations"),
            ),
        ),
        Command(
            "eval",
            evaluate_model,
            "Calibration, confidence and ranking metrics",
            (
                Option("--n", "eval.n", int, "Fresh inputs or queries"),
                Option("--perturb-sigma", "eval.perturb_sigma", float, "Self-cheat jitter"),
            ),
        ),
        Command(
            "bound",
            bound_model,
            "Distribution-free adjustment on the calibration split",
            (
                Option("--epsilon", "bound.epsilon", float, "Variance floor"),
                Option("--alpha", "bound.alpha", float, "Failure probability of the bound"),
                Option("--beta", "bound.beta", float, "Interval failure tolerance"),
            ),
        ),
        Command(
            "decode",
            decode_queries,
            "Answer fresh queries with a cheat-corrected decoder",
            (
                Option(
                    "--decoder",
                    "decode.policy.kind",
                    str,
                    "Decoding strategy",
                    ("selective_filter", "rejection_sampling", "top1_search"),
                ),
                Option("--beta", "decode.policy.beta", float, "Confidence tolerance"),
                Option("--threshold-mode", "decode.policy.threshold_mode", str, "Threshold test", ("one_sided", "absolute")),
                Option("--queries", "decode.queries", int, "Number of queries"),
            ),
        ),
        Command("report", build_report, "Render plots and collect summaries"),
    )
}


def read_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigInvalid(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigInvalid(f"config file {path} is not valid JSON: {e}") from e


def build_config(base: dict, flags: dict, overrides: list[str]) -> RunConfig:
    """Merge a config file, explicit flags and ``--set`` overrides (in that order)."""
    flag_overrides = [f"{path}={json.dumps(value)}" for path, value in flags.items() if value is not None]
    return load_run_config(base, flag_overrides + list(overrides))


def run_command(name: str, config: RunConfig) -> dict:
    """Run one stage; errors propagate for the caller to map to exit codes."""
    logger.info("Running %s for task %s (seed %d)", name, config.task, config.seed)
    return COMMANDS[name].run(config)


def exit_code(error: Exception) -> int:
    if isinstance(error, PairCalError):
        return error.exit_code
    return EXIT_RUNTIME


def schema_text() -> str:
    return json.dumps(run_config_schema(), indent=2, sort_keys=True)
