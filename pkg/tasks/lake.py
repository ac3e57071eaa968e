"""Frozen-lake imitation task with a hidden unsafe patch.

The grid is 5 x 5 with the start at the left-middle cell and the goal at the
right-middle cell. The inner 3 x 3 block is the lake; one of its nine cells is
unsafe and the expert never steps onto it. Cells are ``(col, row)`` with rows
increasing downwards.
"""

from __future__ import annotations

import functools
import logging
import math

import numpy as np
from scipy.special import logsumexp, softmax

from core.errors import NonConvergence, TrajectoryTooLong
from metrics.cheat import CheatScore, cheat_score_from_probs
from models.base import PairPredictor
from tasks.base import PairedExample, TaskOracle

logger = logging.getLogger(__name__)

SIZE = 5
START = (0, 2)
GOAL = (4, 2)
CENTER = (2, 2)
LAKE_CELLS = tuple((c, r) for r in range(1, 4) for c in range(1, 4))

ACTIONS = ("up", "down", "left", "right")
MOVES = {"up": (0, -1), "down": (0, 1), "left": (-1, 0), "right": (1, 0)}

REWARD_GOAL = 40.0
REWARD_BORDER = -3.0
REWARD_LAKE = -5.0
REWARD_CENTER = -10.0
DISCOUNT = 0.9
TEMPERATURE = 2.5
HORIZON = 16

CONVERGENCE_TOL = 1e-10
MAX_SWEEPS = 10_000

HIDDEN = ("hidden",)


def full_view(patch: tuple[int, int]) -> tuple:
    return ("full", int(patch[0]), int(patch[1]))


def _check_patch(patch) -> tuple[int, int]:
    patch = (int(patch[0]), int(patch[1]))
    if patch not in LAKE_CELLS:
        raise ValueError(f"unsafe patch {patch} is not a lake cell")
    return patch


def _state_index(cell: tuple[int, int]) -> int:
    return cell[1] * SIZE + cell[0]


def _cell(index: int) -> tuple[int, int]:
    return index % SIZE, index // SIZE


def step(cell: tuple[int, int], action: str) -> tuple[int, int] | None:
    """Destination of ``action`` from ``cell``; None when it leaves the grid."""
    dc, dr = MOVES[action]
    c, r = cell[0] + dc, cell[1] + dr
    if 0 <= c < SIZE and 0 <= r < SIZE:
        return c, r
    return None


def reward(destination: tuple[int, int] | None, patch: tuple[int, int]) -> float:
    """Reward for moving onto ``destination``; off-grid and patch moves are forbidden."""
    if destination is None or destination == patch:
        return -math.inf
    if destination == GOAL:
        return REWARD_GOAL
    if destination == CENTER:
        return REWARD_CENTER
    if destination in LAKE_CELLS:
        return REWARD_LAKE
    return REWARD_BORDER


def _transition_tables(patch):
    n = SIZE * SIZE
    rewards = np.empty((n, len(ACTIONS)))
    successors = np.zeros((n, len(ACTIONS)), dtype=np.int64)
    continues = np.zeros((n, len(ACTIONS)), dtype=bool)
    for s in range(n):
        for a, action in enumerate(ACTIONS):
            dest = step(_cell(s), action)
            rewards[s, a] = reward(dest, patch)
            if dest is not None and np.isfinite(rewards[s, a]):
                successors[s, a] = _state_index(dest)
                continues[s, a] = dest != GOAL
    return rewards, successors, continues


@functools.lru_cache(maxsize=len(LAKE_CELLS))
def soft_q_values(patch: tuple[int, int]) -> np.ndarray:
    """Fixed point of ``Q(s,a) = r + 0.9 * tau * logsumexp(Q(s', .) / tau)``.

    Moving onto the goal is terminal. Forbidden actions keep ``Q = -inf``.

    Raises:
        NonConvergence: if the sweep cap is reached before the tolerance.
    """
    patch = _check_patch(patch)
    rewards, successors, continues = _transition_tables(patch)
    finite = np.isfinite(rewards)
    q = np.where(finite, 0.0, -np.inf)
    for sweep in range(1, MAX_SWEEPS + 1):
        v = TEMPERATURE * logsumexp(q / TEMPERATURE, axis=1)
        future = np.where(continues, DISCOUNT * v[successors], 0.0)
        q_new = np.where(finite, rewards + future, -np.inf)
        change = float(np.max(np.abs(q_new[finite] - q[finite])))
        q = q_new
        if change < CONVERGENCE_TOL:
            logger.debug("soft Q for patch %s converged after %d sweeps", patch, sweep)
            q.flags.writeable = False
            return q
    raise NonConvergence(f"soft Q iteration for patch {patch} did not converge in {MAX_SWEEPS} sweeps")


@functools.lru_cache(maxsize=len(LAKE_CELLS))
def lake_expert(patch: tuple[int, int]) -> np.ndarray:
    """Expert policy table of shape (25, 4): softmax of soft Q over actions."""
    q = soft_q_values(_check_patch(patch))
    policy = softmax(q / TEMPERATURE, axis=1)
    policy.flags.writeable = False
    return policy


def parse_trajectory(trajectory) -> tuple[str, ...]:
    actions = tuple(trajectory.split()) if isinstance(trajectory, str) else tuple(trajectory)
    if len(actions) > HORIZON:
        raise TrajectoryTooLong(f"trajectory has {len(actions)} steps, horizon is {HORIZON}")
    unknown = [a for a in actions if a not in MOVES]
    if unknown:
        raise ValueError(f"unknown actions {unknown}")
    return actions


def visited_cells(trajectory) -> list[tuple[int, int]]:
    """Cells visited after each action, stopping early at an off-grid move."""
    cell = START
    cells = []
    for action in parse_trajectory(trajectory):
        cell = step(cell, action)
        if cell is None:
            break
        cells.append(cell)
    return cells


def crosses_lake(trajectory) -> bool:
    return any(cell in LAKE_CELLS for cell in visited_cells(trajectory))


def trajectory_prob(trajectory, patch: tuple[int, int]) -> float:
    """Probability that the expert for ``patch`` produces exactly this episode.

    Complete episodes either end on the goal or run the full horizon.
    """
    actions = parse_trajectory(trajectory)
    policy = lake_expert(_check_patch(patch))
    cell = START
    prob = 1.0
    for action in actions:
        if cell == GOAL:
            return 0.0
        prob *= policy[_state_index(cell), ACTIONS.index(action)]
        if prob == 0.0:
            return 0.0
        cell = step(cell, action)
    if cell != GOAL and len(actions) < HORIZON:
        return 0.0
    return float(prob)


def sample_trajectory(patch: tuple[int, int], rng: np.random.Generator) -> str:
    policy = lake_expert(_check_patch(patch))
    cell = START
    actions = []
    while cell != GOAL and len(actions) < HORIZON:
        a = rng.choice(len(ACTIONS), p=policy[_state_index(cell)])
        actions.append(ACTIONS[a])
        cell = step(cell, ACTIONS[a])
    return " ".join(actions)


def view_grid(view) -> list[str]:
    """Token grid of what the model sees: P border, I safe lake, C unsafe, ? unknown."""
    view = tuple(view)
    patch = (view[1], view[2]) if view[0] == "full" else None
    rows = []
    for r in range(SIZE):
        tokens = []
        for c in range(SIZE):
            cell = (c, r)
            if cell == START:
                tokens.append("S")
            elif cell == GOAL:
                tokens.append("G")
            elif cell in LAKE_CELLS:
                tokens.append("?" if patch is None else ("C" if cell == patch else "I"))
            else:
                tokens.append("P")
        rows.append(" ".join(tokens))
    return rows


class LakePairOracle(PairPredictor):
    """Exactly calibrated pair model over trajectories for each view.

    A full view ``("full", col, row)`` pins the patch, so the two responses
    are independent. The hidden view ``("hidden",)`` mixes the nine experts
    with equal weight, and both responses share the mixture component.
    """

    name = "lake_oracle"
    display_name = "Frozen Lake Mixture Oracle"

    def patches(self, view) -> list[tuple[int, int]]:
        view = tuple(view)
        if view[0] == "full":
            return [_check_patch((view[1], view[2]))]
        if view[0] == "hidden":
            return list(LAKE_CELLS)
        raise ValueError(f"unknown lake view {view!r}")

    def component_probs(self, view, y) -> np.ndarray:
        return np.array([trajectory_prob(y, patch) for patch in self.patches(view)])

    def pair_probs(self, view, y) -> tuple[float, float]:
        """``p(y | view)`` and ``p(y, y | view)``."""
        q = self.component_probs(view, y)
        return float(q.mean()), float(np.mean(q * q))

    def prob(self, view, y) -> float:
        return self.pair_probs(view, y)[0]

    def log_prob(self, view, y) -> float:
        p = self.prob(view, y)
        return math.log(p) if p > 0 else -math.inf

    def cheat_score(self, view, y) -> CheatScore:
        p, p_pair = self.pair_probs(view, y)
        p_self = p_pair / p if p > 0 else 0.0
        return cheat_score_from_probs(y if isinstance(y, str) else " ".join(y), p, min(p_self, 1.0))

    def sample(self, view, rng: np.random.Generator) -> str:
        patches = self.patches(view)
        patch = patches[rng.integers(len(patches))] if len(patches) > 1 else patches[0]
        return sample_trajectory(patch, rng)


@functools.lru_cache(maxsize=1)
def lake_pair_oracle() -> LakePairOracle:
    """Shared oracle instance; views are passed per query."""
    return LakePairOracle()


class LakeTask(TaskOracle):
    """Task oracle whose inputs are views of the environment."""

    name = "lake"

    def __init__(self, hidden_fraction: float = 0.5):
        if not 0.0 <= hidden_fraction <= 1.0:
            raise ValueError("hidden_fraction must lie in [0, 1]")
        self.hidden_fraction = hidden_fraction
        self.oracle = lake_pair_oracle()

    def sample_inputs(self, n: int, rng: np.random.Generator) -> list:
        patches = rng.integers(len(LAKE_CELLS), size=n)
        hidden = rng.random(n) < self.hidden_fraction
        return [HIDDEN if h else full_view(LAKE_CELLS[p]) for p, h in zip(patches, hidden)]

    def prob(self, x, y) -> float:
        return self.oracle.prob(x, y)

    def sample_response(self, x, rng: np.random.Generator):
        return self.oracle.sample(x, rng)

    def _generate_chunk(self, n: int, rng: np.random.Generator) -> list[PairedExample]:
        out = []
        for _ in range(n):
            patch = LAKE_CELLS[rng.integers(len(LAKE_CELLS))]
            view = HIDDEN if rng.random() < self.hidden_fraction else full_view(patch)
            y1 = sample_trajectory(patch, rng)
            y2 = sample_trajectory(patch, rng)
            out.append(PairedExample(view, y1, y2, shared_latent=patch, view=tuple(view_grid(view))))
        return out


def lake_dataset(
    n: int, seed: int, hidden_fraction: float = 0.5, workers: int | None = None
) -> list[PairedExample]:
    """Pairs of expert trajectories that share the unsafe patch."""
    return LakeTask(hidden_fraction).make_dataset(n, seed, workers)
