"""The reduced chain on ``(|S|, b)`` that counts coinciding-symbol turns.

States are ``(s, b)`` with ``s`` in ``0..k`` and ``b`` in ``{"out", "in"}``,
minus ``(0, "in")`` and ``(k, "out")``. Starred transitions are the turns
counted towards the non-trivial partition total.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .. import kernels
from ..report import EstimateReport
from ..rng import MASK64, RngStream

State = tuple[int, str]


class NonConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class Transition:
    src: int
    dst: int
    prob: Fraction
    star: bool


@dataclass
class ChainSpec:
    states: list[State]
    transitions: list[Transition]

    def index(self, state: State) -> int:
        return self.states.index(state)

    def matrix(self, exact: bool = False):
        n = len(self.states)
        if exact:
            P = [[Fraction(0)] * n for _ in range(n)]
            for t in self.transitions:
                P[t.src][t.dst] += t.prob
            return P
        P = np.zeros((n, n))
        for t in self.transitions:
            P[t.src, t.dst] += float(t.prob)
        return P

    def star_mass(self) -> list[Fraction]:
        """Probability of a starred transition out of each state."""
        mass = [Fraction(0)] * len(self.states)
        for t in self.transitions:
            if t.star:
                mass[t.src] += t.prob
        return mass

    def validate(self, tol: float = 1e-12) -> None:
        if any(t.prob < 0 for t in self.transitions):
            raise ValueError("negative transition probability")
        sums = self.matrix().sum(axis=1)
        if np.max(np.abs(sums - 1.0)) > tol:
            raise ValueError(f"rows do not sum to 1: {sums}")

    def to_json(self) -> str:
        return json.dumps({
            "schema": "chainspec/1",
            "states": [[s, b] for s, b in self.states],
            "rows": self.matrix().tolist(),
            "transitions": [
                {"from": t.src, "to": t.dst, "p": str(t.prob), "star": t.star} for t in self.transitions
            ],
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ChainSpec":
        data = json.loads(text)
        states = [(int(s), str(b)) for s, b in data["states"]]
        trans = [Transition(t["from"], t["to"], Fraction(t["p"]), bool(t["star"])) for t in data["transitions"]]
        return cls(states, trans)


def chain_states(k: int) -> list[State]:
    states: list[State] = [(0, "out")]
    for s in range(1, k + 1):
        if s < k:
            states.append((s, "out"))
        states.append((s, "in"))
    return states


def trivial_chain_spec(k: int) -> ChainSpec:
    if k < 2:
        raise ValueError("k must be at least 2")
    states = chain_states(k)
    idx = {st: i for i, st in enumerate(states)}
    q = Fraction(1, k)
    trans: list[Transition] = []

    def add(src: State, dst: State, p: Fraction, star: bool = False) -> None:
        if p:
            trans.append(Transition(idx[src], idx[dst], p, star))

    add((0, "out"), (k, "in"), q, True)
    add((0, "out"), (0, "out"), 1 - q, True)
    for s in range(1, k + 1):
        if s < k:
            add((s, "out"), (s, "in"), q)
            add((s, "out"), (k, "in"), q)
            add((s, "out"), (s, "out"), 1 - 2 * q)
        inv = Fraction(1, s)
        add((s, "in"), (k, "in"), q * inv, True)
        add((s, "in"), (0, "out"), inv * (1 - q), True)
        if s > 1:
            add((s, "in"), (s - 1, "in"), (1 - inv) * q)
            add((s, "in"), (k, "in"), (1 - inv) * q)
            add((s, "in"), (s - 1, "out"), (1 - inv) * (1 - 2 * q))
    return ChainSpec(states, trans)


def _gth(P):
    """Grassmann-Taksar-Heyman elimination; works on floats or Fractions."""
    n = len(P)
    A = [list(row) for row in P]
    for m in range(n - 1, 0, -1):
        s = sum(A[m][:m])
        if s == 0:
            raise NonConvergence(f"state {m} cannot reach lower-indexed states")
        for i in range(m):
            A[i][m] = A[i][m] / s
        for i in range(m):
            aim = A[i][m]
            if aim:
                for j in range(m):
                    A[i][j] += aim * A[m][j]
    pi = [A[0][0] * 0 + 1]
    for m in range(1, n):
        pi.append(sum(pi[i] * A[i][m] for i in range(m)))
    total = sum(pi)
    return [x / total for x in pi]


def stationary_distribution(spec: ChainSpec, *, exact: bool = False, tol: float = 1e-12, max_iter: int = 1000):
    """Stationary vector of ``spec``; a list of Fractions when ``exact``.

    The float path polishes the elimination result by power iteration and
    raises :class:`NonConvergence` if the residual stays above ``tol``.
    """
    if exact:
        return _gth(spec.matrix(exact=True))
    P = spec.matrix()
    pi = np.array(_gth(P.tolist()))
    for _ in range(max_iter):
        if np.max(np.abs(pi @ P - pi)) < tol:
            return pi
        pi = pi @ P
        pi /= pi.sum()
    raise NonConvergence(f"residual {np.max(np.abs(pi @ P - pi)):.3e} after {max_iter} iterations")


def closed_form_stationary(k: int) -> dict[State, Fraction]:
    norm = Fraction(1, k * k * 2 ** (k - 1))
    pi = {(0, "out"): norm * (2**k - 1) * (k - 1)}
    for s in range(1, k + 1):
        pi[(s, "in")] = norm * s * 2 ** (s - 1)
        if s < k:
            pi[(s, "out")] = norm * s * 2 ** (s - 1) * (k - 2)
    return pi


def star_probability(k: int) -> Fraction:
    """Stationary probability of a starred transition, ``(2^k - 1) / (k 2^(k-1))``."""
    if k < 2:
        raise ValueError("k must be at least 2")
    return Fraction(2**k - 1, k * 2 ** (k - 1))


def star_probability_from_chain(spec: ChainSpec, pi) -> Fraction:
    return sum((p * m for p, m in zip(pi, spec.star_mass())), Fraction(0))


def chain_transition_tables(spec: ChainSpec):
    """Per-state cumulative probabilities, destinations and star flags for sampling."""
    n = len(spec.states)
    rows: list[list[Transition]] = [[] for _ in range(n)]
    for t in spec.transitions:
        rows[t.src].append(t)
    width = max(len(r) for r in rows)
    cum = np.ones((n, width))
    dest = np.zeros((n, width), dtype=np.int64)
    star = np.zeros((n, width), dtype=np.bool_)
    for i, row in enumerate(rows):
        acc = Fraction(0)
        for j, t in enumerate(row):
            acc += t.prob
            cum[i, j] = float(acc)
            dest[i, j] = t.dst
            star[i, j] = t.star
        # pad with copies of the last transition; its cumulative stays 1
        for j in range(len(row), width):
            dest[i, j] = row[-1].dst
            star[i, j] = row[-1].star
        cum[i, len(row) - 1:] = 1.0
    return cum, dest, star


def sample_bbar(k: int, L: int, samples: int, rng: RngStream, start: State | None = None) -> np.ndarray:
    """Starred-transition counts over ``L`` steps, one per sample stream."""
    spec = trivial_chain_spec(k)
    cum, dest, star = chain_transition_tables(spec)
    out = np.zeros(samples, dtype=np.int64)
    s0 = spec.index(start or (k, "in"))
    kernels.chain_batch(np.uint64(rng.seed & MASK64), rng.stream_index, samples, s0, L, cum, dest, star, out)
    return out


def expected_bbar(k: int, L: int, start: State | None = None) -> float:
    """``E[Bbar]`` over ``L`` steps, by propagating the state distribution."""
    spec = trivial_chain_spec(k)
    P = spec.matrix()
    mass = np.array([float(m) for m in spec.star_mass()])
    mu = np.zeros(len(spec.states))
    mu[spec.index(start or (k, "in"))] = 1.0
    total = 0.0
    for _ in range(L):
        total += float(mu @ mass)
        mu = mu @ P
    return total


def chain_bbar_tail(k: int, L: int, samples: int, rng: RngStream) -> EstimateReport:
    """Frequency of ``Bbar >= 3 p L`` over ``L`` steps started at ``(k, in)``.

    The mean of the indicator is the tail estimate; its stderr is the
    binomial one. Extras carry the bound ``min(1, 2L exp(-p sqrt(2L/k)))``
    and the mean of ``Bbar / L``.
    """
    if L < 0:
        raise ValueError("L must be non-negative")
    p = star_probability(k)
    bbar = sample_bbar(k, L, samples, rng)
    threshold = 3 * p * L
    # Bbar >= 3pL compared in integers: Bbar * den >= 3 * num * L
    hits = (bbar.astype(object) * p.denominator >= 3 * p.numerator * L).astype(float)
    # at L = 0 the event is certain and the bound degenerates to 1
    bound = min(1.0, 2 * L * math.exp(-float(p) * math.sqrt(2 * L / k))) if L else 1.0
    return EstimateReport.from_values(
        "chain_bbar_tail", {"k": k, "L": L}, hits, rng.seed, rng.stream_index,
        threshold=float(threshold), bound=bound, p=p,
        bbar_over_L=float(bbar.mean() / L) if L else 0.0,
    )


# --- the adversarial game behind the chain -------------------------------


def _game_turn(k: int, s: int, b: str, choose):
    """Outcomes of one turn as ``(prob, star, next_state)``; ``choose`` resolves adversary moves."""
    q = Fraction(1, k)
    if b == "in":
        first = [(Fraction(1, s), (0, "out")), (1 - Fraction(1, s), (s - 1, "out"))]
    else:
        first = [(Fraction(1), (s, b))]
    out = []
    for p1, (s1, b1) in first:
        if not p1:
            continue
        star = s1 == 0
        if s1 > 0:
            options = [(s1, "in"), (k, "in")] + ([(s1, "out")] if s1 < k else [])
            branches = [(q, [(k, "in")]), (q, options), (1 - 2 * q, [(s1, b1)])]
        else:
            branches = [(q, [(k, "in")]), (1 - q, [(0, "out")])]
        for p2, opts in branches:
            if p2:
                out.append((p1 * p2, star, choose(opts)))
    return out


def trivial_game_check(k: int, T: int) -> list[dict]:
    """Compare the greedy adversary with the optimum of the reduced game.

    For each threshold ``m`` the optimal ``Pr[count >= m]`` is computed by exact
    backward induction over every adversary choice, and compared to the greedy
    rule (keep ``w[Qmin]`` inside ``S``, never jump). Returns one row per
    threshold; ``greedy_optimal`` is False on any counterexample.
    """
    rows = []
    for m in range(T + 1):
        @lru_cache(maxsize=None)
        def best(t: int, s: int, b: str, c: int) -> Fraction:
            if t == T:
                return Fraction(int(c >= m))
            total = Fraction(0)
            for p, star, choice in _game_turn(k, s, b, lambda opts: tuple(opts)):
                c2 = min(c + star, m)
                total += p * max(best(t + 1, s2, b2, c2) for s2, b2 in choice)
            return total

        @lru_cache(maxsize=None)
        def greedy(t: int, s: int, b: str, c: int) -> Fraction:
            if t == T:
                return Fraction(int(c >= m))
            total = Fraction(0)
            for p, star, nxt in _game_turn(k, s, b, lambda opts: opts[0]):
                total += p * greedy(t + 1, nxt[0], nxt[1], min(c + star, m))
            return total

        opt, gr = best(0, k, "in", 0), greedy(0, k, "in", 0)
        rows.append({"k": k, "T": T, "threshold": m, "optimal": opt, "greedy": gr, "greedy_optimal": opt == gr})
    return rows


def greedy_game_transitions(k: int) -> dict[State, dict[tuple[State, bool], Fraction]]:
    """One-step law of the game under the greedy rule: ``(next state, star) -> prob``."""
    law: dict[State, dict[tuple[State, bool], Fraction]] = {}
    for s, b in chain_states(k):
        row: dict[tuple[State, bool], Fraction] = {}
        for p, star, nxt in _game_turn(k, s, b, lambda opts: opts[0]):
            row[(nxt, star)] = row.get((nxt, star), Fraction(0)) + p
        law[(s, b)] = row
    return law
