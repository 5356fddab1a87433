"""Exact solvers and simulators for the adversarial games and the reduced chain."""

from .chain import (
    ChainSpec, NonConvergence, chain_bbar_tail, closed_form_stationary, expected_bbar, star_probability,
    stationary_distribution, trivial_chain_spec,
)
from .delta import GameValueTable, delta_game_optimal_value, delta_game_second_moment, solve_delta_game
from .two import STRATEGIES, TwoGameRollout, two_game_simulate
from .walk import good_turn_walk_value, random_walk_abs_expectation

__all__ = [
    "ChainSpec", "GameValueTable", "NonConvergence", "STRATEGIES", "TwoGameRollout", "chain_bbar_tail",
    "closed_form_stationary", "delta_game_optimal_value", "delta_game_second_moment", "expected_bbar",
    "good_turn_walk_value", "random_walk_abs_expectation", "solve_delta_game", "star_probability",
    "stationary_distribution", "trivial_chain_spec", "two_game_simulate",
]
