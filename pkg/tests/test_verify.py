import pytest

from unbalanced_lcs import verify
from unbalanced_lcs.report import FAIL, INCONCLUSIVE, PASS


def test_every_suite_has_defaults_and_a_runner():
    assert set(verify.SUITES) == set(verify._RUNNERS)
    assert set(verify.SUITES) == {"thm1", "thm2", "thm3", "thm4", "thm5", "lemma11", "chain", "walk", "props"}


def test_unknown_suite():
    with pytest.raises(KeyError):
        verify.run_suite("thm9", 1)


def test_window_statuses():
    assert verify.check_window("a", 1.0, 0.1, 0.75, 1.25).status == PASS
    assert verify.check_window("a", 0.7, 0.1, 0.75, 1.25).status == INCONCLUSIVE
    assert verify.check_window("a", 0.3, 0.1, 0.75, 1.25).status == FAIL


def test_worked_examples():
    fig = verify.figure1()
    assert fig["states"] == verify.FIGURE1_STATES
    assert fig["a_sets"] == verify.FIGURE1_A_SETS
    assert verify.figure2() == verify.FIGURE2_AFTER


def test_props_suite_passes():
    checks = verify.run_suite("props", 3, instances=200, fuzz_steps=5000)
    assert all(c.status == PASS for c in checks)


def test_rows_use_disjoint_stream_blocks():
    streams = verify._Streams(5)
    a, b = streams.next(), streams.next()
    assert b.stream_index - a.stream_index == verify.STREAM_BLOCK
