"""Pydantic schemas for run configurations and artifact records."""

from __future__ import annotations

import json
from typing import Any, Literal

from pydantic import BaseModel, Field, ValidationError, field_validator

from core.errors import ConfigInvalid
from decode.decoders import DecodePolicy
from models.mlp import MlpConfig
from models.training import TrainConfig

TaskName = Literal["sin1d", "pi", "lake"]


# ===================
# Run configuration
# ===================


class DataSpec(BaseModel):
    """How many paired examples to draw and from which split."""

    n: int = Field(default=25_000, ge=1, description="Number of paired examples")
    split: Literal["train", "calib", "test"] = Field(
        default="train", description="Dataset split; each split draws from its own random stream"
    )
    hidden_fraction: float = Field(
        default=0.5, ge=0.0, le=1.0, description="Lake task: fraction of examples with the patch hidden"
    )
    workers: int | None = Field(default=None, ge=1, description="Generation workers (capped by PAIRCAL_THREADS)")


class ModelSpec(BaseModel):
    """Which pair predictor the train stage builds."""

    kind: Literal["mlp", "tabular", "oracle"] = Field(
        default="mlp",
        description="mlp: trained network; tabular: empirical pair counts; oracle: exactly calibrated tabular model",
    )
    mlp: MlpConfig = Field(default_factory=MlpConfig)
    n_bins: int = Field(default=100, ge=1, description="sin1d: quantile bins of the grouping")
    members_per_bin: int = Field(default=1000, ge=1, description="sin1d: quadrature points per bin")
    known_limit: int = Field(default=10, ge=0, description="pi: offsets known exactly")
    growth: int = Field(default=2, ge=1, description="pi: bucket growth factor")
    smoothing: float = Field(default=0.0, ge=0.0, description="tabular: additive count smoothing")
    ensemble_members: int = Field(
        default=0,
        ge=0,
        description="mlp: single-response networks trained as an ensemble baseline (0 disables, otherwise at least 2)",
    )


class EvalSpec(BaseModel):
    """Evaluation sizes and binning."""

    n: int = Field(default=100_000, ge=1, description="Fresh inputs (sin1d) or queries (pi, lake)")
    bins: int = Field(default=100, ge=1, description="Equal-count bins for ECE-1/ECE-2")
    betas: list[float] = Field(default_factory=lambda: [0.05, 0.1, 0.25])
    grid: int = Field(default=600, ge=2, description="sin1d: points of the variance profile on [-3, 3]")
    samples_per_query: int = Field(default=10, ge=1, description="pi, lake: responses drawn per query")
    cluster_sizes: list[int] = Field(default_factory=lambda: [10, 120])
    perturb_sigma: float = Field(
        default=0.0, ge=0.0, description="Log-normal jitter on self-cheat probabilities (0 disables)"
    )
    outlier_cutoff: float = Field(default=2.0, gt=0.0)

    @field_validator("betas")
    @classmethod
    def _betas_in_range(cls, value: list[float]) -> list[float]:
        if not value or any(not 0.0 < b < 1.0 for b in value):
            raise ValueError("betas must be a nonempty list of values in (0, 1)")
        return value


class BoundSpec(BaseModel):
    """Distribution-free adjustment settings."""

    epsilon: float = Field(default=0.02**2, gt=0.0, description="Variance floor")
    alpha: float = Field(default=0.05, gt=0.0, lt=1.0, description="Failure probability of the bound")
    beta: float = Field(default=0.05, gt=0.0, lt=1.0, description="Interval failure tolerance")
    n_test: int = Field(default=100_000, ge=1, description="Fresh inputs for the coverage check")
    epsilons: list[float] = Field(default_factory=list, description="Optional sweep over variance floors")


class DecodeSpec(BaseModel):
    """Decoder and how many queries to answer."""

    policy: DecodePolicy = Field(default_factory=DecodePolicy)
    queries: int = Field(default=100, ge=1)


class RunConfig(BaseModel):
    """Complete, serializable description of one experiment."""

    task: TaskName = "sin1d"
    seed: int = Field(..., description="Master seed; every stage derives its random streams from it")
    out: str | None = Field(default=None, description="Output directory (default: PAIRCAL_OUTPUT_DIR)")
    data: DataSpec = Field(default_factory=DataSpec)
    model: ModelSpec = Field(default_factory=ModelSpec)
    train: TrainConfig = Field(default_factory=TrainConfig)
    eval: EvalSpec = Field(default_factory=EvalSpec)
    bound: BoundSpec = Field(default_factory=BoundSpec)
    decode: DecodeSpec = Field(default_factory=DecodeSpec)


def parse_override(item: str) -> tuple[list[str], Any]:
    """Split ``a.b=value``; the value is parsed as JSON when possible."""
    if "=" not in item:
        raise ConfigInvalid(f"override must look like key.path=value, got {item!r}")
    key, raw = item.split("=", 1)
    path = [part for part in key.strip().split(".") if part]
    if not path:
        raise ConfigInvalid(f"empty key in override {item!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path, value


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    """Set dotted-path values in a nested config dictionary."""
    out = json.loads(json.dumps(data))
    for item in overrides:
        path, value = parse_override(item)
        node = out
        for part in path[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigInvalid(f"cannot set {'.'.join(path)}: {part} is not a section")
            node = child
        node[path[-1]] = value
    return out


def load_run_config(data: dict, overrides: list[str] | None = None) -> RunConfig:
    """Validate a config dictionary after applying overrides.

    Raises:
        ConfigInvalid: if validation fails.
    """
    merged = apply_overrides(data, overrides or [])
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigInvalid(f"invalid run configuration:\n{e}") from e


def run_config_schema() -> dict:
    """JSON schema of ``RunConfig``."""
    return RunConfig.model_json_schema()


# ===================
# Artifact records
# ===================


class DatasetHeader(BaseModel):
    """First line of a dataset JSONL file."""

    task: TaskName
    seed: int
    split: str
    n: int
    schema_version: int
    checksum: str
    hidden_fraction: float | None = None


class PairedExampleRecord(BaseModel):
    """One dataset line."""

    task: str = ""
    x: Any
    y1: Any
    y2: Any
    shared_latent: Any = None
    view: Any = None


class BoundReportRecord(BaseModel):
    gamma_plus: float
    epsilon: float
    alpha: float
    n: int
    mean_s: float
    margin: float
    method: str = "hoeffding"


class DecisionRecord(BaseModel):
    x: Any
    decision: Literal["response", "abstain", "exhausted"]
    y: Any = None
    confidence: float | None = None
    attempts: int | None = None
    is_hallucination: bool | None = None
    crosses_lake: bool | None = None


class CheckpointRecord(BaseModel):
    """Model checkpoint; the remaining keys depend on ``kind``."""

    model_config = {"extra": "allow"}

    kind: Literal["mlp", "tabular", "oracle", "lake_oracle"]
    task: TaskName | None = None


class StageResult(BaseModel):
    """What every pipeline stage returns to the command line."""

    success: bool
    stage: str
    artifacts: list[str] = Field(default_factory=list)
    error: str | None = None
    metadata: dict = Field(default_factory=dict)
