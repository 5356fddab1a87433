"""Expected modulus of a simple random walk started at 1/2, in exact arithmetic."""

from __future__ import annotations

from fractions import Fraction
from math import comb


def random_walk_abs_expectation(T: int) -> Fraction:
    """``E|X_T|`` for a +-1 walk on ``Z + 1/2`` started at ``1/2``."""
    if T < 0:
        raise ValueError("T must be non-negative")
    if T % 2 == 0:
        return Fraction(2 * T + 1, 2) * comb(T, T // 2) / 2**T
    return Fraction(2 * T * comb(T - 1, (T - 1) // 2), 2**T)


def enumerate_abs_expectation(T: int) -> Fraction:
    """Same quantity by summing over all ``2^T`` paths."""
    total = Fraction(0)
    for path in range(2**T):
        ups = path.bit_count()
        total += abs(Fraction(1, 2) + 2 * ups - T)
    return total / 2**T


def enumerate_reflected_walk(T: int) -> Fraction:
    """``E[Delta]`` after ``T`` good turns, Delta starting at 1 and reset from 0 to 1."""
    total = Fraction(0)
    for path in range(2**T):
        delta = 1
        for step in range(T):
            delta += 1 if (path >> step) & 1 else -1
            if delta < 1:
                delta = 1
        total += delta
    return total / 2**T


def good_turn_walk_value(T: int) -> Fraction:
    """Value of the good-turn game under optimal play with ``T`` forced good turns."""
    return Fraction(1, 2) + random_walk_abs_expectation(T)
