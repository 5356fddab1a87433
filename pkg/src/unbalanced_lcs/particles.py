"""Match-and-bump particle dynamics for the waiting times ``P_0 < ... < P_d``.

Exposing one more symbol of ``w'`` advances every particle sitting on that
symbol; a particle that is not advanced is still pushed to one past its left
neighbour's new position. ``P_i(L)`` is then the longest prefix of ``w`` that
is ``i``-almost contained in ``w'[:L]``.

Q-particles run in lockstep on the same words: excited particles jump to the
next vacant cell instead of bumping, so sorted Q-positions equal P-positions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .rng import TAG_W, TAG_WPRIME, RngStream
from .words import LazyWord, Word

# P_{-1}: strictly below every position, so max(P_0, P_{-1} + 1) == P_0
NEG_INF = -(1 << 62)


@dataclass(frozen=True)
class ParticleState:
    positions: tuple[int, ...]

    def __post_init__(self):
        pos = tuple(int(p) for p in self.positions)
        if not pos:
            raise ValueError("need at least one particle")
        if pos[0] < 0 or any(a >= b for a, b in zip(pos, pos[1:])):
            raise ValueError(f"positions must be strictly increasing and non-negative: {pos}")
        object.__setattr__(self, "positions", pos)

    @classmethod
    def initial(cls, d: int) -> "ParticleState":
        return cls(tuple(range(d + 1)))

    @property
    def d(self) -> int:
        return len(self.positions) - 1

    def __getitem__(self, i: int) -> int:
        return self.positions[i]


@dataclass(frozen=True)
class ExpectantPartition:
    """Particle indices grouped by the symbol they sit on."""

    parts: dict[int, frozenset[int]]
    k: int

    @property
    def is_trivial(self) -> bool:
        return all(len(p) == 1 for p in self.parts.values())

    def blocks(self) -> list[frozenset[int]]:
        return sorted(self.parts.values(), key=min)


def expectant_partition(state: ParticleState, w, k: int | None = None) -> ExpectantPartition:
    parts: dict[int, set[int]] = {}
    for i, p in enumerate(state.positions):
        parts.setdefault(w[p], set()).add(i)
    if k is None:
        k = getattr(w, "k", max(parts) + 1)
    return ExpectantPartition({s: frozenset(v) for s, v in parts.items()}, k)


def advance(positions: Sequence[int], a_set) -> tuple[int, ...]:
    """Apply the in-order advance/bump rule for a chosen set of particle indices."""
    out = []
    prev = NEG_INF
    for i, p in enumerate(positions):
        p = p + 1 if i in a_set else max(p, prev + 1)
        out.append(p)
        prev = p
    return tuple(out)


def evolve_step(state: ParticleState, w, symbol: int) -> tuple[ParticleState, tuple[int, ...]]:
    """One exposure of ``w'``: returns the new state and ``A`` in descending order."""
    a_set = tuple(i for i in range(state.d, -1, -1) if w[state.positions[i]] == symbol)
    return ParticleState(advance(state.positions, set(a_set))), a_set


def q_step(q_positions: Sequence[int], w, symbol: int) -> tuple[int, ...]:
    """Excited Q-particles, rightmost first, jump to the next vacant cell."""
    q = list(q_positions)
    occupied = set(q)
    excited = sorted((i for i, p in enumerate(q) if w[p] == symbol), key=lambda i: -q[i])
    for i in excited:
        occupied.discard(q[i])
        target = q[i] + 1
        while target in occupied:
            target += 1
        q[i] = target
        occupied.add(target)
    return tuple(q)


@dataclass
class Trajectory:
    """Record of one run: ``states[l]`` and ``q_states[l]`` hold positions at time ``l``."""

    k: int
    d: int
    w: Word
    w_prime: Word
    states: list[ParticleState] = field(default_factory=list)
    q_states: list[tuple[int, ...]] = field(default_factory=list)
    a_sets: list[tuple[int, ...]] = field(default_factory=list)
    trivial: list[bool] = field(default_factory=list)

    @property
    def length(self) -> int:
        return len(self.a_sets)

    @property
    def final(self) -> ParticleState:
        return self.states[-1]

    @property
    def nontrivial_count(self) -> int:
        return sum(not t for t in self.trivial)

    def a_word(self) -> list[int]:
        """The concatenation ``A[0] A[1] ... A[L-1]``."""
        return [i for a in self.a_sets for i in a]

    def to_jsonl(self) -> str:
        lines = []
        for step in range(self.length):
            lines.append(json.dumps({
                "step": step,
                "symbol": int(self.w_prime[step]),
                "A": list(self.a_sets[step]),
                "trivial": self.trivial[step],
                "P": list(self.states[step + 1].positions),
                "Q": list(self.q_states[step + 1]),
            }))
        return "\n".join(lines) + ("\n" if lines else "")


def run_dynamics(
    k: int,
    d: int,
    L: int,
    rng: RngStream | None = None,
    *,
    w: Word | Iterable[int] | None = None,
    w_prime: Sequence[int] | None = None,
) -> Trajectory:
    """Run ``L`` steps; words come from ``rng`` unless given explicitly."""
    if k < 1 or d < 0 or L < 0:
        raise ValueError("need k >= 1, d >= 0, L >= 0")
    if w is None or w_prime is None:
        if rng is None:
            raise ValueError("either rng or both words must be given")
    lazy = LazyWord(rng, k, tag=TAG_W) if w is None else None
    word = lazy if lazy is not None else (w if isinstance(w, Word) else Word(list(w), k))
    wp = list(w_prime) if w_prime is not None else rng.symbols(k, L, tag=TAG_WPRIME).tolist()
    if len(wp) < L:
        raise ValueError("w_prime shorter than L")

    state = ParticleState.initial(d)
    q = state.positions
    traj = Trajectory(k, d, Word([], k), Word(wp[:L], k), [state], [q])
    for step in range(L):
        traj.trivial.append(expectant_partition(state, word, k).is_trivial)
        q = q_step(q, word, wp[step])
        state, a_set = evolve_step(state, word, wp[step])
        traj.a_sets.append(a_set)
        traj.states.append(state)
        traj.q_states.append(q)
    reach = max(max(state.positions), max(q)) + 1
    traj.w = lazy.prefix(reach) if lazy is not None else word[:reach]
    return traj


def triviality_stats(traj: Trajectory) -> tuple[int, dict[tuple[int, int], int]]:
    """``|B|`` and ``|B_ij|`` for every pair ``i < j``, counted from Q-positions."""
    w = traj.w
    pair_counts = {pair: 0 for pair in combinations(range(traj.d + 1), 2)}
    b_count = 0
    for q in traj.q_states[:traj.length]:
        hit = False
        for i, j in pair_counts:
            if w[q[i]] == w[q[j]]:
                pair_counts[(i, j)] += 1
                hit = True
        b_count += hit
    return b_count, pair_counts
