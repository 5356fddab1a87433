import math

import numpy as np
import pytest

from unbalanced_lcs import estimators as est
from unbalanced_lcs.rng import RngStream


def within(report_mean, target, se, z=4.0):
    return abs(report_mean - target) <= z * se


def test_gamma_single_symbol_words():
    r = est.estimate_gamma(2, 1, 10_000, RngStream(1))
    assert within(r.mean, 0.5, r.stderr)


def test_gamma_rejects_unary_alphabet():
    with pytest.raises(ValueError):
        est.estimate_gamma(1, 10, 10, RngStream(1))


def test_gamma_two_letters_is_below_the_upper_constant():
    r = est.estimate_gamma(2, 5000, 40, RngStream(2))
    assert 0.76 < r.mean < 0.826280
    assert r.extras["reference_band"] == [0.788071, 0.826280]


def test_gamma_eps_is_at_most_one():
    r = est.estimate_gamma_eps(2, 0.3, 2000, 200, RngStream(3))
    assert r.mean <= 1
    assert r.params["n_prime"] == math.floor(0.7 * 2 * 2000)


def test_gamma_eps_near_the_boundary_stays_above_floor():
    r = est.estimate_gamma_eps(2, 0.45, 2000, 200, RngStream(4))
    assert r.mean - 3 * r.stderr >= 1 - 0.45 - 0.02


def test_gamma_eps_lower_window_with_slack():
    r = est.estimate_gamma_eps(3, 0.1, 5000, 100, RngStream(5))
    assert r.mean >= 1 - 8 * 0.1**2 - 3 * r.stderr - 0.02
    assert r.extras["window"] == pytest.approx([1 - 8 * 0.01, 1 - 0.01 / 72])


def test_gamma_eps_warns_when_longer_word_is_short():
    with pytest.warns(RuntimeWarning):
        est.estimate_gamma_eps(2, 0.6, 100, 5, RngStream(6))
    with pytest.raises(ValueError):
        est.estimate_gamma_eps(2, 1.0, 100, 5, RngStream(6))


def test_leading_particle_moves_at_rate_one_over_k():
    r = est.estimate_drift(3, 1, 30, 100_000, RngStream(7))
    assert within(r.extras["p0_mean"], 10, r.extras["p0_stderr"])


def test_drift_lower_bound_for_one_deletion():
    r = est.estimate_drift(2, 1, 400, 100_000, RngStream(8))
    assert r.mean - 3 * r.stderr >= math.sqrt(400 / 14)


def test_drift_upper_bound_example():
    r = est.estimate_drift(4, 3, 1000, 10_000, RngStream(9))
    assert r.mean + 3 * r.stderr <= 3 * math.sqrt(2 * 1000 / 4) + 3
    assert r.extras["upper_bound"] == pytest.approx(3 * math.sqrt(500) + 3)


def test_zero_budget_drift_vanishes():
    r = est.estimate_drift(3, 0, 50, 100, RngStream(1))
    assert r.mean == 0 and r.variance == 0


def test_concat_rejects_large_eps():
    with pytest.raises(ValueError):
        est.estimate_concat_lower(2, 0.2, 1, 1 / math.sqrt(7), 40, 4000, 10, RngStream(1))


def test_concat_construction_statistics():
    r = est.estimate_concat_lower(2, 0.04, 1, 1 / math.sqrt(7), 40, 4000, 2000, RngStream(10))
    x = r.extras
    assert r.mean + 3 * r.stderr >= x["expected_lower"]
    assert abs(x["var_y"] - x["sum_var_blocks"]) < 5 * x["var_diff_stderr"]
    assert x["lcs_lower"] == 4000 - r.params["M"]


def test_lnds_unary_alphabet_is_degenerate():
    r = est.estimate_lnds_mean(1, 50, 20, RngStream(1))
    assert r.mean == 50 and r.extras["normalized"] == 0


def test_lnds_single_symbol():
    r = est.estimate_lnds_mean(5, 1, 50, RngStream(1))
    assert r.mean == 1 and r.variance == 0


def test_lnds_window():
    r = est.estimate_lnds_mean(64, 4096, 2000, RngStream(11))
    assert 0.80 <= r.extras["normalized"] <= 1.05


def test_lnds_binomial_window():
    r = est.estimate_lnds_binomial(32, 8192, 0.5, 2000, RngStream(12))
    assert 0.75 <= r.extras["normalized"] <= 1.10


def test_binomial_with_p_one_matches_fixed_length():
    a = est.estimate_lnds_mean(8, 500, 3000, RngStream(13))
    b = est.estimate_lnds_binomial(8, 500, 1.0, 3000, RngStream(14))
    assert abs(a.mean - b.mean) <= 3 * math.hypot(a.stderr, b.stderr)
    assert b.extras["length_mean"] == 500


def test_binomial_lengths_have_the_right_mean():
    m = est.binomial_lengths(1000, 0.3, 20_000, RngStream(15)).astype(float)
    assert within(m.mean(), 300, m.std(ddof=1) / math.sqrt(m.size), 3)
    assert m.min() >= 0 and m.max() <= 1000


def test_lnds_binomial_rejects_bad_p():
    with pytest.raises(ValueError):
        est.estimate_lnds_binomial(4, 10, 0, 10, RngStream(1))


def test_nontrivial_tail_report():
    r = est.estimate_nontrivial_tail(16, 2, 512, 500, RngStream(16))
    assert 0 <= r.mean <= 1
    assert r.extras["threshold"] == 6 * 4 * 512 / 16


@pytest.mark.parametrize("make", [
    lambda rng, t: est.estimate_gamma(2, 300, 37, rng, threads=t),
    lambda rng, t: est.estimate_drift(3, 2, 300, 501, rng, threads=t),
    lambda rng, t: est.estimate_lnds_binomial(4, 300, 0.4, 333, rng, threads=t),
    lambda rng, t: est.estimate_concat_lower(2, 0.04, 1, 1 / math.sqrt(7), 40, 800, 65, rng, threads=t),
])
def test_reports_do_not_depend_on_thread_count(make):
    texts = {make(RngStream(2024, 5), t).to_json() for t in (1, 2, 3, 8)}
    assert len(texts) == 1


def test_thread_count_from_environment(monkeypatch):
    monkeypatch.setenv(est.THREADS_ENV, "3")
    assert est.default_threads() == 3


def test_run_sharded_keeps_order():
    out = est.run_sharded(lambda off, n: np.arange(off, off + n), 17, threads=4)
    assert out.tolist() == list(range(17))
