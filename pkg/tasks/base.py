"""Abstract base class for synthetic tasks with exact oracles."""

from __future__ import annotations

from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from config import get_settings
from core.types import ProbVector

CHUNK_SIZE = 4096


@dataclass(frozen=True)
class PairedExample:
    """One training/calibration record: input plus two i.i.d. responses."""

    x: Any
    y1: Any
    y2: Any
    shared_latent: Any = None  # audit only; models never see it
    view: Any = None  # what the model is allowed to observe, when it differs from x

    def to_dict(self, task: str = "") -> dict:
        data = {"task": task, "x": self.x, "y1": self.y1, "y2": self.y2}
        if self.shared_latent is not None:
            data["shared_latent"] = self.shared_latent
        if self.view is not None:
            data["view"] = self.view
        return data

    @classmethod
    def from_dict(cls, data: dict) -> PairedExample:
        def _tuple(value):
            return tuple(value) if isinstance(value, list) else value

        return cls(
            x=_tuple(data["x"]),
            y1=data["y1"],
            y2=data["y2"],
            shared_latent=_tuple(data.get("shared_latent")),
            view=_tuple(data.get("view")),
        )


class TaskOracle(ABC):
    """Sampler for p(X) plus exact access to p(y|x).

    Subclasses implement per-chunk generation so datasets are identical
    whether chunks are produced sequentially or in parallel.
    """

    # Task identifier used in dataset headers
    name: str = "base"

    # Finite response alphabet, or None when responses are sequences
    labels: tuple[str, ...] | None = None

    @abstractmethod
    def sample_inputs(self, n: int, rng: np.random.Generator) -> list:
        """Draw ``n`` inputs from p(X)."""

    @abstractmethod
    def prob(self, x, y) -> float:
        """Exact p(y | x)."""

    @abstractmethod
    def sample_response(self, x, rng: np.random.Generator):
        """Draw one response from p(. | x)."""

    def conditional(self, x) -> ProbVector:
        """Full conditional vector over ``labels`` (finite alphabets only)."""
        if self.labels is None:
            raise NotImplementedError(f"{self.name} has no finite response alphabet")
        return ProbVector(np.array([self.prob(x, y) for y in self.labels]))

    def is_hallucination(self, x, y) -> bool:
        """A response is a statistical hallucination when p(y|x) = 0."""
        return self.prob(x, y) == 0.0

    def enumerate_inputs(self) -> tuple[list, np.ndarray] | None:
        """Finite input support with probabilities, or None for continuous inputs."""
        return None

    def _generate_chunk(self, n: int, rng: np.random.Generator) -> list[PairedExample]:
        xs = self.sample_inputs(n, rng)
        return [
            PairedExample(x, self.sample_response(x, rng), self.sample_response(x, rng))
            for x in xs
        ]

    def make_dataset(self, n: int, seed: int | Sequence[int], workers: int | None = None) -> list[PairedExample]:
        """Generate ``n`` paired examples from per-chunk random substreams."""
        if n < 1:
            raise ValueError("dataset size must be at least 1")
        sizes = [min(CHUNK_SIZE, n - start) for start in range(0, n, CHUNK_SIZE)]
        streams = np.random.SeedSequence(seed).spawn(len(sizes))
        jobs = list(zip(sizes, streams))

        def run(job):
            size, stream = job
            return self._generate_chunk(size, np.random.default_rng(stream))

        workers = get_settings().worker_count(workers)
        if workers > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                chunks = list(pool.map(run, jobs))
        else:
            chunks = [run(job) for job in jobs]
        return [example for chunk in chunks for example in chunk]
