import json
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from oracles import reflected_walk_paths
from unbalanced_lcs.games import chain as gchain
from unbalanced_lcs.games.delta import (
    canonical_actions, delta_game_optimal_value, delta_game_second_moment, full_actions, solve_delta_game,
)
from unbalanced_lcs.games.two import two_game_batch, two_game_simulate
from unbalanced_lcs.games.walk import (
    enumerate_abs_expectation, enumerate_reflected_walk, good_turn_walk_value, random_walk_abs_expectation,
)
from unbalanced_lcs.rng import RngStream

# --- Delta game -----------------------------------------------------------------


def test_delta_game_small_values():
    assert delta_game_optimal_value(2, 0) == 1
    assert delta_game_optimal_value(2, 1) == 1.5
    assert delta_game_second_moment(3, 0) == 0.25
    assert delta_game_second_moment(2, 1) == 1.25


def test_every_increment_law_is_a_distribution():
    for k in range(2, 7):
        for law in canonical_actions(k).values():
            assert math.isclose(sum(p for _, p in law), 1.0)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_reduced_actions_cover_brute_force_laws(k):
    def norm(law):
        return tuple(sorted((x, round(p, 12)) for x, p in law))

    assert {norm(a) for a in canonical_actions(k).values()} == {norm(a) for a in full_actions(k).values()}


@pytest.mark.parametrize("k,L", [(2, 6), (3, 6), (4, 5)])
def test_reduced_and_full_action_sets_give_same_values(k, L):
    a = solve_delta_game(k, L, reduced=True)
    b = solve_delta_game(k, L, reduced=False)
    assert np.allclose(a.values, b.values, atol=1e-12)


def test_delta_game_bounds_on_small_grid():
    for k in range(2, 6):
        for L in range(0, 51, 5):
            assert delta_game_optimal_value(k, L) <= math.sqrt(2 * L / k) + 1 + 1e-12
            assert delta_game_second_moment(k, L) <= 0.25 + 2 * L / k + 1e-12


def test_delta_game_value_is_monotone_in_turns():
    for k in (2, 3, 5):
        values = [delta_game_optimal_value(k, L) for L in range(30)]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


def test_larger_cap_changes_nothing():
    assert delta_game_optimal_value(3, 12) == delta_game_optimal_value(3, 12, delta_cap=40)
    with pytest.raises(ValueError):
        solve_delta_game(3, 12, delta_cap=5)


def test_backward_induction_recursion_on_random_states():
    table = solve_delta_game(3, 40, lambda x: (x - 0.5) ** 2)
    gen = random.Random(0)
    for _ in range(100):
        t, delta = gen.randrange(40), gen.randint(1, table.cap)
        assert table.check_recursion(t, delta)
        assert table.expand(t, delta, table.policy[t][delta]) == pytest.approx(table.values[t, delta])
    assert np.all(table.values[40, 1:] == [(x - 0.5) ** 2 for x in range(1, table.cap + 1)])


# --- random walk -------------------------------------------------------------------


def test_walk_small_values():
    assert random_walk_abs_expectation(0) == Fraction(1, 2)
    assert random_walk_abs_expectation(1) == 1
    assert random_walk_abs_expectation(2) == Fraction(5, 4)
    assert good_turn_walk_value(0) == 1
    assert good_turn_walk_value(2) == Fraction(7, 4)


def test_walk_formula_against_path_enumeration():
    for T in range(17):
        assert random_walk_abs_expectation(T) == enumerate_abs_expectation(T)
    for T in range(11):
        assert random_walk_abs_expectation(T) == reflected_walk_paths(T)


def test_reflected_gap_equals_half_plus_walk():
    for T in range(15):
        assert enumerate_reflected_walk(T) == good_turn_walk_value(T)


def test_good_turn_value_identity_up_to_64():
    for T in range(65):
        assert good_turn_walk_value(T) == Fraction(1, 2) + random_walk_abs_expectation(T)


def test_walk_exact_at_large_T():
    value = random_walk_abs_expectation(1000)
    assert isinstance(value, Fraction)
    assert abs(float(value) - math.sqrt(2 * 1000 / math.pi)) < 0.05


# --- two-player games -----------------------------------------------------------------


def test_two_game_without_turns():
    assert two_game_simulate(2, 0, "chain", RngStream(1)).delta == 1


def test_two_game_bookkeeping_on_every_rollout():
    for name in ("always-same", "always-diff", "chain"):
        out = two_game_batch(3, 200, name, RngStream(4), 5000)
        assert np.all(out[:, 0] >= 1)
        assert np.all(out[:, 1] >= out[:, 2] - 1)


def test_two_game_lower_bound():
    k, L = 2, 400
    for name in ("always-same", "always-diff", "chain"):
        delta = two_game_batch(k, L, name, RngStream(6), 100_000)[:, 0].astype(float)
        se = delta.std(ddof=1) / math.sqrt(delta.size)
        assert delta.mean() - 3 * se >= 0.5 + math.sqrt(L / (7 * k))


def test_two_game_rejects_unknown_rule():
    with pytest.raises(ValueError):
        two_game_simulate(2, 5, "random", RngStream(1))


# --- reduced chain -------------------------------------------------------------------


def test_chain_states_for_two_letters():
    spec = gchain.trivial_chain_spec(2)
    assert spec.states == [(0, "out"), (1, "out"), (1, "in"), (2, "in")]


@pytest.mark.parametrize("k", range(2, 9))
def test_chain_rows_and_mass_into_full_state(k):
    spec = gchain.trivial_chain_spec(k)
    P = spec.matrix(exact=True)
    target = spec.index((k, "in"))
    for row in P:
        assert sum(row) == 1 and min(row) >= 0
        assert row[target] == Fraction(1, k)


def test_stationary_law_for_two_letters():
    spec = gchain.trivial_chain_spec(2)
    pi = gchain.stationary_distribution(spec, exact=True)
    assert pi == [Fraction(3, 8), 0, Fraction(1, 8), Fraction(1, 2)]
    assert sum(pi) == 1


@pytest.mark.parametrize("k", range(2, 21))
def test_stationary_law_matches_closed_form(k):
    spec = gchain.trivial_chain_spec(k)
    pi = gchain.stationary_distribution(spec)
    closed = gchain.closed_form_stationary(k)
    assert max(abs(pi[i] - float(closed[s])) for i, s in enumerate(spec.states)) < 1e-10
    assert np.max(np.abs(pi @ spec.matrix() - pi)) < 1e-12


@pytest.mark.parametrize("k", range(2, 9))
def test_exact_stationary_law_equals_closed_form(k):
    spec = gchain.trivial_chain_spec(k)
    closed = gchain.closed_form_stationary(k)
    assert gchain.stationary_distribution(spec, exact=True) == [closed[s] for s in spec.states]


def test_star_probability_values():
    assert gchain.star_probability(2) == Fraction(3, 4)
    assert gchain.star_probability(3) == Fraction(7, 12)
    for k in range(2, 65):
        p = gchain.star_probability(k)
        assert Fraction(1, k) <= p <= Fraction(2, k)
    for k in range(2, 12):
        spec = gchain.trivial_chain_spec(k)
        pi = gchain.stationary_distribution(spec, exact=True)
        assert gchain.star_probability_from_chain(spec, pi) == gchain.star_probability(k)


def test_non_convergence_is_signalled():
    spec = gchain.ChainSpec([(0, "out"), (1, "in")], [gchain.Transition(0, 0, Fraction(1), False),
                                                        gchain.Transition(1, 1, Fraction(1), False)])
    with pytest.raises(gchain.NonConvergence):
        gchain.stationary_distribution(spec)


def test_chain_json_round_trip():
    spec = gchain.trivial_chain_spec(4)
    data = json.loads(spec.to_json())
    assert data["schema"] == "chainspec/1"
    assert len(data["rows"]) == len(spec.states)
    again = gchain.ChainSpec.from_json(spec.to_json())
    assert again.states == spec.states and again.transitions == spec.transitions


def test_bbar_tail_without_steps():
    r = gchain.chain_bbar_tail(2, 0, 100, RngStream(1))
    assert r.mean == 1.0 and r.extras["bound"] == 1.0


def test_bbar_tail_bound():
    r = gchain.chain_bbar_tail(2, 64, 100_000, RngStream(2))
    se = math.sqrt(r.mean * (1 - r.mean) / r.samples)
    assert r.mean <= r.extras["bound"] + 3 * se


def test_expected_bbar_converges_to_star_probability():
    p = float(gchain.star_probability(2))
    errors = [abs(gchain.expected_bbar(2, 2**e) / 2**e - p) for e in range(6, 13)]
    assert all(b < a for a, b in zip(errors, errors[1:]))


def test_sampled_bbar_mean_matches_propagation():
    for k, L in [(2, 64), (5, 200)]:
        b = gchain.sample_bbar(k, L, 20_000, RngStream(3, k)).astype(float)
        se = b.std(ddof=1) / math.sqrt(b.size)
        assert abs(b.mean() - gchain.expected_bbar(k, L)) <= 4 * se


def test_greedy_adversary_is_optimal_in_small_reduced_games():
    for k in (2, 3, 4):
        assert all(row["greedy_optimal"] for row in gchain.trivial_game_check(k, 6))


def test_greedy_law_matches_chain():
    for k in (2, 3, 5):
        spec = gchain.trivial_chain_spec(k)
        law = gchain.greedy_game_transitions(k)
        for i, state in enumerate(spec.states):
            expected: dict = {}
            for t in spec.transitions:
                if t.src == i:
                    key = (spec.states[t.dst], t.star)
                    expected[key] = expected.get(key, Fraction(0)) + t.prob
            assert law[state] == expected
