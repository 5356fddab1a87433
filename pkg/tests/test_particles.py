import json
import random
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import lnds_restricted_quadratic, waiting_time_by_deletions
from unbalanced_lcs import kernels
from unbalanced_lcs.estimators import sample_dynamics
from unbalanced_lcs.particles import (
    NEG_INF, ParticleState, advance, evolve_step, expectant_partition, q_step, run_dynamics, triviality_stats,
)
from unbalanced_lcs.rng import RngStream
from unbalanced_lcs.seqalgs import lnds_restricted
from unbalanced_lcs.words import Word, waiting_time

FIG_W = Word.parse("1323121", 3, one_based=True)
FIG_WP = list(Word.parse("231", 3, one_based=True))


def test_state_validation():
    with pytest.raises(ValueError):
        ParticleState((0, 0))
    with pytest.raises(ValueError):
        ParticleState((-1, 2))
    with pytest.raises(ValueError):
        ParticleState(())
    assert ParticleState.initial(3).positions == (0, 1, 2, 3)
    assert NEG_INF + 1 < 0


def test_worked_example_step_by_step():
    state = ParticleState.initial(3)
    expected = [((0, 1, 3, 4), (2,)), ((0, 2, 4, 5), (2, 1)), ((1, 2, 5, 6), (2, 0))]
    for symbol, (positions, a_set) in zip(FIG_WP, expected):
        state, got = evolve_step(state, FIG_W, symbol)
        assert state.positions == positions
        assert got == a_set


def test_worked_example_partitions():
    traj = run_dynamics(3, 3, 3, w=FIG_W, w_prime=FIG_WP)
    first = expectant_partition(traj.states[0], FIG_W, 3).blocks()
    last = expectant_partition(traj.states[3], FIG_W, 3).blocks()
    assert first == [frozenset({0}), frozenset({1, 3}), frozenset({2})]
    assert last == [frozenset({0}), frozenset({1, 2}), frozenset({3})]
    assert traj.final.positions == (1, 2, 5, 6)
    assert traj.a_word() == [2, 2, 1, 2, 0]
    assert lnds_restricted(traj.a_word(), 3) == 3


def test_zero_steps_leave_initial_state():
    traj = run_dynamics(4, 2, 0, RngStream(1))
    assert traj.final == ParticleState.initial(2)
    assert traj.length == 0 and traj.to_jsonl() == ""


def test_single_particle_partition_is_trivial():
    part = expectant_partition(ParticleState((5,)), Word([0] * 8, 2), 2)
    assert part.is_trivial and len(part.blocks()) == 1


def test_empty_match_leaves_state_unchanged():
    state = ParticleState((0, 2, 3))
    w = Word([0, 0, 0, 0, 0], 2)
    new, a_set = evolve_step(state, w, 1)
    assert a_set == () and new == state


def test_drift_matches_waiting_times_for_seeded_run():
    traj = run_dynamics(2, 1, 6, RngStream(2718))
    wp = list(traj.w_prime)
    w = Word(list(traj.w) + [0] * 10, 2)
    gap = traj.final[1] - traj.final[0]
    assert gap == waiting_time(w, wp, 1) - waiting_time(w, wp, 0)


@given(st.integers(2, 4), st.integers(0, 3), st.integers(0, 7), st.randoms(use_true_random=False))
def test_positions_equal_deletion_oracle(k, d, L, gen):
    w = [gen.randrange(k) for _ in range(L + d + 2)]
    wp = [gen.randrange(k) for _ in range(L)]
    traj = run_dynamics(k, d, L, w=Word(w, k), w_prime=wp)
    for i in range(d + 1):
        assert traj.final[i] == waiting_time_by_deletions(w, wp, i)


def test_order_is_kept_over_many_random_updates():
    gen = random.Random(0)
    steps = 0
    while steps < 1_000_000:
        d = gen.randint(0, 6)
        pos = tuple(range(d + 1))
        for _ in range(1000):
            pos = advance(pos, {i for i in range(d + 1) if gen.random() < 0.3})
            assert all(a < b for a, b in zip(pos, pos[1:]))
        steps += 1000


def _lockstep(k, d, w, wp):
    state = ParticleState.initial(d)
    q = state.positions
    a_word = []
    for c in wp:
        q = q_step(q, w, c)
        state, a_set = evolve_step(state, w, c)
        a_word.extend(a_set)
        assert tuple(sorted(q)) == state.positions
    return state, a_word


@pytest.mark.parametrize("k,d,L", [(2, 3, 5), (2, 1, 6), (3, 2, 3), (3, 3, 2)])
def test_restricted_lnds_identity_exhaustive(k, d, L):
    for w in product(range(k), repeat=L + d + 1):
        for wp in product(range(k), repeat=L):
            state, a_word = _lockstep(k, d, w, wp)
            for i in range(d + 1):
                assert lnds_restricted_quadratic(a_word, i) == state[i] - i


def test_restricted_lnds_identity_on_long_runs():
    for seed in range(40):
        traj = run_dynamics(5, 4, 300, RngStream(seed, 77))
        for i in range(5):
            assert lnds_restricted(traj.a_word(), i) == traj.final[i] - i


def test_q_step_example():
    w = Word([1 if p in (0, 2, 6, 7) else 0 for p in range(12)], 2)
    assert q_step((3, 7, 0, 6, 2, 8), w, 1) == (3, 9, 1, 7, 4, 8)
    # the complementary symbol excites the particles on cells 3 and 8
    assert q_step((3, 7, 0, 6, 2, 8), w, 0) == (4, 7, 0, 6, 2, 9)


def test_q_step_with_no_excited_particle():
    w = Word([0] * 10, 2)
    assert q_step((4, 1, 7), w, 1) == (4, 1, 7)


def test_sorted_q_equals_p_on_random_words():
    gen = random.Random(12)
    for _ in range(2000):
        k, d, L = gen.randint(2, 3), gen.randint(0, 3), gen.randint(0, 8)
        w = [gen.randrange(k) for _ in range(L + d + 1)]
        wp = [gen.randrange(k) for _ in range(L)]
        _lockstep(k, d, w, wp)


def test_nontrivial_count_matches_pair_coincidences():
    for seed in range(30):
        traj = run_dynamics(3, 3, 60, RngStream(seed, 5))
        b, pairs = triviality_stats(traj)
        assert b == traj.nontrivial_count
        assert max(pairs.values()) <= b <= sum(pairs.values())


def test_single_particle_has_no_nontrivial_steps():
    traj = run_dynamics(2, 0, 50, RngStream(4))
    assert triviality_stats(traj) == (0, {})


def test_two_particles_over_all_short_words():
    # with two particles a step is non-trivial exactly when both sit on the same symbol
    for L in range(5):
        for w in product(range(2), repeat=L + 2):
            for wp in product(range(2), repeat=L):
                traj = run_dynamics(2, 1, L, w=Word(w, 2), w_prime=wp)
                b, pairs = triviality_stats(traj)
                same = sum(w[s[0]] == w[s[1]] for s in (st.positions for st in traj.states[:L]))
                assert b == pairs[(0, 1)] == same


def test_partition_invariants():
    gen = random.Random(3)
    for _ in range(500):
        k, d = gen.randint(2, 5), gen.randint(0, 6)
        w = Word([gen.randrange(k) for _ in range(40)], k)
        state = ParticleState(tuple(sorted(gen.sample(range(40), d + 1))))
        blocks = expectant_partition(state, w, k).blocks()
        assert sorted(i for b in blocks for i in b) == list(range(d + 1))
        assert len(blocks) <= min(d + 1, k)


def test_jsonl_export():
    traj = run_dynamics(3, 3, 3, w=FIG_W, w_prime=FIG_WP)
    rows = [json.loads(line) for line in traj.to_jsonl().splitlines()]
    assert [r["A"] for r in rows] == [[2], [2, 1], [2, 0]]
    assert rows[-1]["P"] == [1, 2, 5, 6]
    assert sorted(rows[-1]["Q"]) == rows[-1]["P"]
    assert set(rows[0]) == {"step", "symbol", "A", "trivial", "P", "Q"}


def test_compiled_kernel_matches_python_dynamics():
    rng = RngStream(31, 1000)
    pos, b = sample_dynamics(4, 3, 150, 20, rng, count_nontrivial=True, threads=1)
    for s in range(20):
        traj = run_dynamics(4, 3, 150, rng.spawn(s))
        assert tuple(pos[s]) == traj.final.positions
        assert b[s] == traj.nontrivial_count


def test_kernel_matches_waiting_times_on_long_words():
    rng = RngStream(5, 9)
    pos, _ = sample_dynamics(50, 3, 1000, 3, rng, threads=1)
    for s in range(3):
        sub = rng.spawn(s)
        w = Word(sub.symbols(50, 1200), 50)
        wp = sub.symbols(50, 1000, tag=2).tolist()
        assert [waiting_time(w, wp, i) for i in range(4)] == pos[s].tolist()


def test_sharding_does_not_change_samples():
    a, _ = sample_dynamics(3, 2, 200, 101, RngStream(8), threads=1)
    b, _ = sample_dynamics(3, 2, 200, 101, RngStream(8), threads=4)
    assert np.array_equal(a, b)


def test_dynamics_rejects_bad_arguments():
    with pytest.raises(ValueError):
        run_dynamics(2, -1, 3, RngStream(0))
    with pytest.raises(ValueError):
        run_dynamics(2, 1, 3)
    with pytest.raises(ValueError):
        run_dynamics(2, 1, 3, w=Word([0] * 9, 2), w_prime=[0])
    assert kernels.STRATEGY_SAME != kernels.STRATEGY_DIFF
