"""Backward induction for the gap game between two neighbouring particles.

Each turn the adversary picks a vector ``v`` in ``Z^k`` that is zero or a
permutation of ``(+1, -1, 0, ..., 0)``, may decrement one coordinate, and then a
uniform coordinate of ``v`` is added to the gap ``Delta`` (floored at 1). Only
the distribution of the chosen coordinate matters, so the adversary's moves
collapse to a handful of increment laws.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Callable

import numpy as np

# an action is a tuple of (increment, probability) pairs
Action = tuple[tuple[int, float], ...]


def canonical_actions(k: int) -> dict[str, Action]:
    """The distinct increment laws available to the adversary."""
    if k < 2:
        raise ValueError("k must be at least 2")
    q = 1.0 / k
    actions = {
        "idle": ((0, 1.0),),
        "drop": ((-1, q), (0, 1.0 - q)),
        "pair": ((1, q), (-1, q), (0, 1.0 - 2 * q)),
        "pair-deepen": ((1, q), (-2, q), (0, 1.0 - 2 * q)),
    }
    if k >= 3:
        actions["pair-extra"] = ((1, q), (-1, 2 * q), (0, 1.0 - 3 * q))
    return {name: tuple((x, p) for x, p in law if p > 0) for name, law in actions.items()}


def enumerate_vectors(k: int) -> set[tuple[int, ...]]:
    """Every vector ``u + w`` the adversary may present, listed coordinate-wise."""
    base = [(0,) * k] + list(set(permutations((1, -1) + (0,) * (k - 2))))
    out = set()
    for u in base:
        out.add(u)
        for i in range(k):
            v = list(u)
            v[i] -= 1
            out.add(tuple(v))
    return out


def full_actions(k: int) -> dict[str, Action]:
    """Increment laws from brute-force enumeration of vectors (exact, deduplicated)."""
    laws = {}
    for v in sorted(enumerate_vectors(k)):
        counts: dict[int, int] = {}
        for x in v:
            counts[x] = counts.get(x, 0) + 1
        law = tuple(sorted((x, Fraction(c, k)) for x, c in counts.items()))
        laws[law] = v
    return {str(v): tuple((x, float(p)) for x, p in law) for law, v in laws.items()}


@dataclass
class GameValueTable:
    """``values[t, delta]``: optimal objective with ``t`` turns played and gap ``delta``."""

    k: int
    L: int
    values: np.ndarray
    policy: list[list[str]]
    actions: dict[str, Action]
    objective: Callable[[int], float]

    @property
    def cap(self) -> int:
        return self.values.shape[1] - 1

    @property
    def value(self) -> float:
        return float(self.values[0, 1])

    def expand(self, t: int, delta: int, action: str) -> float:
        """Expected continuation value of ``action`` at turn ``t``."""
        return sum(p * self.values[t + 1, min(max(delta + x, 1), self.cap)] for x, p in self.actions[action])

    def check_recursion(self, t: int, delta: int, tol: float = 1e-12) -> bool:
        best = max(self.expand(t, delta, a) for a in self.actions)
        return abs(best - self.values[t, delta]) <= tol * max(1.0, abs(best))


def solve_delta_game(
    k: int,
    L: int,
    objective: Callable[[int], float] = float,
    *,
    delta_cap: int | None = None,
    reduced: bool = True,
) -> GameValueTable:
    """Maximise ``E[objective(Delta(L))]`` over adversary strategies."""
    if L < 0:
        raise ValueError("L must be non-negative")
    cap = L + 2 if delta_cap is None else delta_cap
    if cap < L + 1:
        raise ValueError("delta_cap must be at least L + 1")
    actions = canonical_actions(k) if reduced else full_actions(k)
    values = np.zeros((L + 1, cap + 1))
    values[L, 1:] = [objective(x) for x in range(1, cap + 1)]
    policy: list[list[str]] = [[""] * (cap + 1) for _ in range(L)]
    for t in range(L - 1, -1, -1):
        nxt = values[t + 1]
        for delta in range(1, cap + 1):
            best_name, best = "", -np.inf
            for name, law in actions.items():
                val = sum(p * nxt[min(max(delta + x, 1), cap)] for x, p in law)
                if val > best + 1e-15:
                    best_name, best = name, val
            values[t, delta] = best
            policy[t][delta] = best_name
    return GameValueTable(k, L, values, policy, actions, objective)


def delta_game_optimal_value(k: int, L: int, delta_cap: int | None = None) -> float:
    """Largest achievable ``E[Delta(L)]``."""
    return solve_delta_game(k, L, float, delta_cap=delta_cap).value


def delta_game_second_moment(k: int, L: int, delta_cap: int | None = None) -> float:
    """Largest achievable ``E[(Delta(L) - 1/2)^2]``."""
    return solve_delta_game(k, L, lambda x: (x - 0.5) ** 2, delta_cap=delta_cap).value
