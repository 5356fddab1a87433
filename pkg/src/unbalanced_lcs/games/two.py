"""Rollouts of the lower-bound game on the pair ``(Delta, F)``.

``F`` records whether the two particles sit on equal symbols. A decrement of
``Delta`` hands the adversary the choice of the next ``F``; the adversary wants
``Delta`` small.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..rng import MASK64, RngStream

STRATEGIES = {
    "always-same": kernels.STRATEGY_SAME,
    "always-diff": kernels.STRATEGY_DIFF,
    "chain": kernels.STRATEGY_CHAIN,
}


@dataclass(frozen=True)
class TwoGameRollout:
    delta: int
    good_turns: int
    heads: int


def two_game_batch(k: int, L: int, strategy: str, rng: RngStream, count: int) -> np.ndarray:
    """``count`` rollouts on consecutive streams; columns are Delta, good turns, heads."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {sorted(STRATEGIES)}")
    out = np.zeros((count, 3), dtype=np.int64)
    kernels.two_game_batch(np.uint64(rng.seed & MASK64), rng.stream_index, count, k, L, STRATEGIES[strategy], out)
    return out


def two_game_simulate(k: int, L: int, strategy: str, rng: RngStream) -> TwoGameRollout:
    """One rollout of ``L`` turns under a built-in adversary rule.

    ``"chain"`` redraws ``F`` honestly (equal symbols with probability ``1/k``).
    """
    delta, good, heads = two_game_batch(k, L, strategy, rng, 1)[0]
    return TwoGameRollout(int(delta), int(good), int(heads))
