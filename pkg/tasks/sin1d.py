"""One-dimensional binary regression task.

X is standard normal and Y | X is Bernoulli with a success probability that
oscillates quickly near zero and slowly further out.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import norm

from tasks.base import PairedExample, TaskOracle


def _softplus_scaled(z: np.ndarray) -> np.ndarray:
    # 0.2 * log(1 + exp((z - 1) / 0.2)) without overflow
    return 0.2 * np.logaddexp(0.0, (z - 1.0) / 0.2)


def sin1d_prob(x):
    """Exact ``p(Y=1 | X=x)``; accepts scalars or arrays.

    Values always lie in [0.01, 0.99] because the inner mixture of cosines is
    bounded by one in magnitude.
    """
    arr = np.asarray(x, dtype=np.float64)
    ax = np.abs(arr)
    v = np.sign(arr) * (120.0 * ax - 112.0 * _softplus_scaled(ax) - 0.0635)
    u = 0.6 * np.cos(v) + 0.4 * np.cos(4.2 * arr)
    p = (0.98 * u + 1.0) / 2.0
    return float(p) if p.ndim == 0 else p


class QuantileBins:
    """Grouping of the real line into equal-mass bins of N(0, 1).

    Bin members are represented by quantile midpoints, which gives an exact
    equal-weight quadrature of p(X) restricted to the bin.
    """

    kind = "quantile_bins"

    def __init__(self, n_bins: int = 100, members_per_bin: int = 1000):
        if n_bins < 1 or members_per_bin < 1:
            raise ValueError("n_bins and members_per_bin must be positive")
        self.n_bins = n_bins
        self.members_per_bin = members_per_bin
        self.edges = norm.ppf(np.linspace(0.0, 1.0, n_bins + 1))

    def __call__(self, x) -> int:
        return int(self.batch(np.asarray([x], dtype=np.float64))[0])

    def batch(self, xs) -> np.ndarray:
        idx = np.searchsorted(self.edges, np.asarray(xs, dtype=np.float64), side="right") - 1
        return np.clip(idx, 0, self.n_bins - 1)

    def groups(self) -> list[int]:
        return list(range(self.n_bins))

    def members(self, group: int) -> tuple[np.ndarray, np.ndarray]:
        """Quadrature points and weights for one bin."""
        m = self.members_per_bin
        levels = (group + (np.arange(m) + 0.5) / m) / self.n_bins
        return norm.ppf(levels), np.full(m, 1.0 / m)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n_bins": self.n_bins, "members_per_bin": self.members_per_bin}


class Sin1dTask(TaskOracle):
    """Oracle for the 1D task; responses are the labels ``"0"`` and ``"1"``."""

    name = "sin1d"
    labels = ("0", "1")

    def sample_inputs(self, n: int, rng: np.random.Generator) -> list:
        return rng.standard_normal(n).tolist()

    def prob(self, x, y) -> float:
        p1 = sin1d_prob(float(x))
        return p1 if str(y) == "1" else 1.0 - p1

    def sample_response(self, x, rng: np.random.Generator):
        return int(rng.random() < sin1d_prob(float(x)))

    def conditional_batch(self, xs) -> np.ndarray:
        """Rows ``(1 - p, p)`` for every input in ``xs``."""
        p = np.atleast_1d(sin1d_prob(np.asarray(xs, dtype=np.float64)))
        return np.stack([1.0 - p, p], axis=1)

    def _generate_chunk(self, n: int, rng: np.random.Generator) -> list[PairedExample]:
        xs = rng.standard_normal(n)
        p = sin1d_prob(xs)
        y = (rng.random((n, 2)) < p[:, None]).astype(int)
        return [
            PairedExample(float(x), int(a), int(b)) for x, (a, b) in zip(xs, y)
        ]


def sin1d_dataset(n: int, seed: int, workers: int | None = None) -> list[PairedExample]:
    """Paired dataset: ``X ~ N(0, 1)`` and two independent Bernoulli responses."""
    return Sin1dTask().make_dataset(n, seed, workers)
