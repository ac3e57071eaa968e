"""Training loop: AdamW with linear warmup and cosine decay."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, Field

from core.errors import DivergedLoss, EmptyInput
from models.mlp import MlpPairModel

logger = logging.getLogger(__name__)


class TrainConfig(BaseModel):
    """Optimizer and schedule settings; defaults follow the 1D experiment."""

    iterations: int = Field(default=10_000, ge=1)
    batch_size: int = Field(default=512, ge=1)
    max_lr: float = Field(default=0.002, gt=0.0)
    warmup_steps: int = Field(default=100, ge=0)
    weight_decay: float = Field(default=1e-4, ge=0.0)
    seed: int = 0
    eigen_penalty_weight: float = Field(default=0.0, ge=0.0)
    log_every: int = Field(default=100, ge=1)
    beta1: float = Field(default=0.9, gt=0.0, lt=1.0)
    beta2: float = Field(default=0.999, gt=0.0, lt=1.0)
    adam_eps: float = Field(default=1e-8, gt=0.0)


def learning_rate(step: int, config: TrainConfig) -> float:
    """Learning rate at 1-based ``step``."""
    if config.warmup_steps and step <= config.warmup_steps:
        return config.max_lr * step / config.warmup_steps
    span = max(config.iterations - config.warmup_steps, 1)
    progress = min((step - config.warmup_steps) / span, 1.0)
    return 0.5 * config.max_lr * (1.0 + math.cos(math.pi * progress))


@dataclass(frozen=True)
class LossRecord:
    step: int
    loss: float
    penalty: float


@dataclass
class TrainResult:
    """Trained model plus the sampled loss trace."""

    model: MlpPairModel
    trace: list[LossRecord] = field(default_factory=list)


class AdamW:
    """Adam with decoupled weight decay applied to weight matrices only."""

    def __init__(self, params: dict[str, np.ndarray], config: TrainConfig):
        self.config = config
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float) -> None:
        c = self.config
        self.t += 1
        bias1 = 1.0 - c.beta1**self.t
        bias2 = 1.0 - c.beta2**self.t
        for name, grad in grads.items():
            m = self.m[name]
            v = self.v[name]
            m *= c.beta1
            m += (1.0 - c.beta1) * grad
            v *= c.beta2
            v += (1.0 - c.beta2) * grad * grad
            p = params[name]
            if p.ndim == 2 and c.weight_decay:
                p -= lr * c.weight_decay * p
            p -= lr * (m / bias1) / (np.sqrt(v / bias2) + c.adam_eps)


def encode_targets(model: MlpPairModel, dataset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inputs and label indices for every record of ``dataset``."""
    index = {label: i for i, label in enumerate(model.labels)}
    xs = model.encode([record.x for record in dataset])
    y1 = np.array([index[str(record.y1)] for record in dataset], dtype=np.int64)
    y2 = np.array([index[str(record.y2)] for record in dataset], dtype=np.int64)
    return xs, y1, y2


def train(model: MlpPairModel, dataset, config: TrainConfig) -> TrainResult:
    """Fit ``model`` in place by minimizing the pair cross-entropy.

    Minibatches are drawn with replacement from a generator seeded by
    ``config.seed``, so runs are bit-reproducible.

    Raises:
        DivergedLoss: if the loss becomes non-finite.
    """
    if len(dataset) == 0:
        raise EmptyInput("training set is empty")
    if config.eigen_penalty_weight != model.config.eigen_penalty_weight:
        model.config = model.config.model_copy(
            update={"eigen_penalty_weight": config.eigen_penalty_weight}
        )
    xs, y1, y2 = encode_targets(model, dataset)
    rng = np.random.default_rng(config.seed)
    optimizer = AdamW(model.params, config)
    trace: list[LossRecord] = []

    logger.info(
        "Training %s head for %d iterations on %d records",
        model.config.head,
        config.iterations,
        len(dataset),
    )
    for step in range(1, config.iterations + 1):
        batch = rng.integers(0, len(dataset), size=config.batch_size)
        loss, penalty, grads = model.loss_and_grad(xs[batch], y1[batch], y2[batch])
        if not math.isfinite(loss):
            raise DivergedLoss(f"loss became {loss} at step {step}")
        optimizer.step(model.params, grads, learning_rate(step, config))
        if step % config.log_every == 0 or step == config.iterations:
            trace.append(LossRecord(step, loss, penalty))
            logger.debug("step %d loss %.6f penalty %.3g", step, loss, penalty)

    logger.info("Finished training: final loss %.6f", trace[-1].loss)
    return TrainResult(model, trace)
