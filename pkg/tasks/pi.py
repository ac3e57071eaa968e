"""Digits-of-pi question answering task.

Queries ask about the I-th digit of pi after the decimal point; responses are
sentences from the digit-conditioned grammar in ``tasks.pcfg``.
"""

from __future__ import annotations

import functools
import hashlib
import logging
from pathlib import Path

import numpy as np

from core.errors import IoFailure
from core.types import ProbVector
from tasks.base import PairedExample, TaskOracle
from tasks.pcfg import equivalence_key, pcfg_enumerate_support, sentence_alphabet

logger = logging.getLogger(__name__)

PI_DIGITS_PATH = Path(__file__).parent / "data" / "pi_digits.txt"
PI_DIGITS_SHA256 = "7406a2be66766f832c8d1e1b66491ef7b2f366b0393d21c4684181044b507ab5"

MAX_OFFSET = 10_000
Q_LOW = 0.001
Q_HIGH = 0.1


@functools.lru_cache(maxsize=1)
def load_pi_digits() -> str:
    """The first 10,000 digits of pi after the decimal point, checksum-verified."""
    try:
        digits = PI_DIGITS_PATH.read_text(encoding="ascii").strip()
    except OSError as e:
        raise IoFailure(f"cannot read {PI_DIGITS_PATH}: {e}") from e
    checksum = hashlib.sha256(digits.encode("ascii")).hexdigest()
    if checksum != PI_DIGITS_SHA256:
        raise IoFailure(f"pi digit table checksum mismatch: {checksum}")
    return digits


def pi_digit(offset: int) -> int:
    """Digit at 1-based ``offset`` after the decimal point (offset 1 is 1, offset 2 is 4)."""
    digits = load_pi_digits()
    if not 1 <= offset <= len(digits):
        raise ValueError(f"offset {offset} outside 1..{len(digits)}")
    return int(digits[offset - 1])


def _arctan_inverse(x: int, scale: int) -> int:
    """``scale * arctan(1/x)`` in integer arithmetic."""
    total = term = scale // x
    x2 = x * x
    n = 1
    sign = -1
    while term:
        term //= x2
        total += sign * (term // (2 * n + 1))
        sign = -sign
        n += 1
    return total


def machin_pi_digits(n: int) -> str:
    """First ``n`` digits after the decimal point, computed from Machin's formula."""
    guard = 10
    scale = 10 ** (n + guard)
    pi_scaled = 4 * (4 * _arctan_inverse(5, scale) - _arctan_inverse(239, scale))
    return str(pi_scaled)[1 : n + 1]


@functools.lru_cache(maxsize=4)
def offset_pmf(limit: int = MAX_OFFSET, q_low: float = Q_LOW, q_high: float = Q_HIGH) -> np.ndarray:
    """Exact distribution of the query offset; entry ``i`` is P(I = i), entry 0 is 0.

    I is geometric (support 1, 2, ...) with a success rate drawn uniformly from
    ``[q_low, q_high]``, conditioned on ``I < limit``.
    """
    i = np.arange(1, limit, dtype=np.float64)

    def antiderivative(s: float) -> np.ndarray:
        # integral of (1 - s) s^(i-1) ds
        return np.power(s, i) / i - np.power(s, i + 1) / (i + 1)

    mass = antiderivative(1.0 - q_low) - antiderivative(1.0 - q_high)
    pmf = np.zeros(limit)
    pmf[1:] = mass / mass.sum()
    pmf.flags.writeable = False
    return pmf


def sample_offsets(n: int, rng: np.random.Generator, limit: int = MAX_OFFSET) -> np.ndarray:
    """Draw ``n`` offsets by rejection: offsets at or beyond ``limit`` are redrawn."""
    out = np.empty(0, dtype=np.int64)
    while out.size < n:
        need = n - out.size
        q = rng.uniform(Q_LOW, Q_HIGH, size=need)
        draws = rng.geometric(q)
        out = np.concatenate([out, draws[draws < limit]])
    return out[:n]


def pi_query_sampler(seed: int | np.random.Generator) -> int:
    """Draw one query offset in ``[1, 9999]``."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return int(sample_offsets(1, rng)[0])


def query_text(offset: int) -> str:
    """Query string with the offset zero-padded to four digits, one token per digit."""
    return f"Tell me about digit {' '.join(f'{offset:04d}')} of pi."


class OffsetBuckets:
    """Grouping of offsets: singletons up to ``known_limit``, then geometrically growing buckets.

    Models built on this grouping know the early digits exactly and are
    uncertain about later ones.
    """

    kind = "offset_buckets"

    def __init__(self, known_limit: int = 10, growth: int = 2, limit: int = MAX_OFFSET):
        if known_limit < 0 or growth < 1:
            raise ValueError("known_limit must be >= 0 and growth >= 1")
        self.known_limit = known_limit
        self.growth = growth
        self.limit = limit
        starts = list(range(1, min(known_limit, limit - 1) + 1))
        start, width = known_limit + 1, growth
        while start < limit:
            starts.append(start)
            start += width
            width *= growth
        self.starts = np.array(starts, dtype=np.int64)

    def __call__(self, offset) -> int:
        return int(np.searchsorted(self.starts, int(offset), side="right") - 1)

    def batch(self, offsets) -> np.ndarray:
        return np.searchsorted(self.starts, np.asarray(offsets, dtype=np.int64), side="right") - 1

    def groups(self) -> list[int]:
        return list(range(len(self.starts)))

    def bounds(self, group: int) -> tuple[int, int]:
        """Half-open offset range ``[lo, hi)`` of a group."""
        hi = int(self.starts[group + 1]) if group + 1 < len(self.starts) else self.limit
        return int(self.starts[group]), hi

    def members(self, group: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.bounds(group)
        offsets = np.arange(lo, hi)
        return offsets, np.asarray(offset_pmf(self.limit)[lo:hi])

    def to_dict(self) -> dict:
        return {"kind": self.kind, "known_limit": self.known_limit, "growth": self.growth}


@functools.lru_cache(maxsize=10)
def _digit_table(digit: int) -> tuple[tuple[str, ...], np.ndarray, dict[str, float]]:
    support = pcfg_enumerate_support(digit)
    sentences = tuple(s for s, _, _ in support)
    probs = np.array([p for _, p, _ in support])
    return sentences, probs / probs.sum(), {s: p for s, p, _ in support}


class PiTask(TaskOracle):
    """Oracle for the digits-of-pi task. Inputs are integer offsets."""

    name = "pi"

    def __init__(self):
        self.labels = sentence_alphabet()
        self._label_index = {s: i for i, s in enumerate(self.labels)}

    def sample_inputs(self, n: int, rng: np.random.Generator) -> list:
        return sample_offsets(n, rng).tolist()

    def prob(self, x, y) -> float:
        sentence = y if isinstance(y, str) else " ".join(y)
        return _digit_table(pi_digit(int(x)))[2].get(sentence, 0.0)

    def sample_response(self, x, rng: np.random.Generator) -> str:
        sentences, probs, _ = _digit_table(pi_digit(int(x)))
        return sentences[rng.choice(len(sentences), p=probs)]

    def conditional(self, x) -> ProbVector:
        return ProbVector(self.conditional_array(x))

    def conditional_array(self, x) -> np.ndarray:
        sentences, probs, _ = _digit_table(pi_digit(int(x)))
        out = np.zeros(len(self.labels))
        out[[self._label_index[s] for s in sentences]] = probs
        return out

    def conditional_batch(self, offsets) -> np.ndarray:
        rows = {d: None for d in range(10)}
        out = np.empty((len(offsets), len(self.labels)))
        for i, offset in enumerate(offsets):
            d = pi_digit(int(offset))
            if rows[d] is None:
                rows[d] = self.conditional_array(offset)
            out[i] = rows[d]
        return out

    def enumerate_inputs(self) -> tuple[list, np.ndarray]:
        pmf = offset_pmf()
        return list(range(1, MAX_OFFSET)), np.asarray(pmf[1:])

    def equivalence_key(self, sentence) -> tuple | None:
        return equivalence_key(sentence)

    def _generate_chunk(self, n: int, rng: np.random.Generator) -> list[PairedExample]:
        offsets = sample_offsets(n, rng)
        return [
            PairedExample(
                int(i),
                self.sample_response(i, rng),
                self.sample_response(i, rng),
                view=query_text(int(i)),
            )
            for i in offsets
        ]
