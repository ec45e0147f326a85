import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuce.corpus import builtin_suite
from fuce.dsl import parse_design
from fuce.executor import (ENTRY_EDGE, FAULT_DIV_BY_ZERO, FAULT_STEP_LIMIT,
                           CoverageMap, bucket_of, coverage_of, edge_index,
                           execute, merge_coverage)
from fuce.testcase import TestCase


def tc(*words):
    return TestCase(words=tuple(words))


def test_echo_identity(echo):
    trace = execute(echo, tc(7))
    assert trace.outputs == (7,)
    assert trace.decisions == ()
    assert trace.fault is None


def test_controller_guard_true_edge_first():
    entry = next(e for e in builtin_suite() if e.name == "controller_swm")
    trace = execute(entry.dut, tc(23978, 5678, 9, 9, 9), step_limit=10_000_000)
    assert trace.decisions[0] == (0, True)


def test_step_limit_fault(spin):
    trace = execute(spin, tc(0), step_limit=1)
    assert trace.fault == FAULT_STEP_LIMIT


def test_div_by_zero_fault():
    d = parse_design("design d { inputs 2; output(in[0] / in[1]); }")
    trace = execute(d, tc(4, 0))
    assert trace.fault == FAULT_DIV_BY_ZERO
    assert execute(d, tc(4, 2)).outputs == (2,)


def test_execute_is_deterministic(counted_loop):
    a = execute(counted_loop, tc(37))
    b = execute(counted_loop, tc(37))
    assert a == b


def test_wrapping_arithmetic():
    d = parse_design("design d { inputs 2; output(in[0] + in[1]); output(in[0] * in[1]); output(-in[0]); }")
    trace = execute(d, tc(0xFFFFFFFF, 2))
    assert trace.outputs == (1, 0xFFFFFFFE, 1)


def test_shift_semantics_mod_32():
    d = parse_design("design d { inputs 2; output(in[0] << in[1]); output(in[0] >> in[1]); }")
    assert execute(d, tc(1, 33)).outputs == (2, 0)  # shift counts are taken mod 32


def test_next_input_exhaustion_yields_zero():
    d = parse_design("design d { inputs 1; a = next_input(); b = next_input(); output(a); output(b); }")
    trace = execute(d, tc(5, 9))
    assert trace.outputs == (9, 0)
    assert trace.input_exhausted


def test_short_words_feed_zero_to_slots(two_ifs):
    trace = execute(two_ifs, TestCase(words=()))
    assert trace.decisions == ((0, True), (1, False))
    assert trace.input_exhausted


def test_halt_stops_execution():
    d = parse_design("design d { inputs 1; output(1); halt; output(2); }")
    assert execute(d, tc(0)).outputs == (1,)


# -- coverage_of -------------------------------------------------------------

def test_pairing_rule_entry_plus_consecutive(two_ifs):
    # decisions (b0,T),(b1,F) -> keys {(entry,b0T), (b0T,b1F)} each in bucket "1"
    trace = execute(two_ifs, tc(0, 0))
    assert trace.decisions == ((0, True), (1, False))
    delta = coverage_of(trace)
    b0T = edge_index(0, True)
    b1F = edge_index(1, False)
    assert delta.pair_counts == {(ENTRY_EDGE, b0T): 1, (b0T, b1F): 1}


def test_empty_decision_list_empty_delta(echo):
    delta = coverage_of(execute(echo, tc(3)))
    assert delta.pair_counts == {}
    assert delta.edge_counts == {}


def test_consecutive_loop_pair_bucket(counted_loop):
    # 5 consecutive true decisions of the loop -> self-pair count 4 -> bucket 4-7
    trace = execute(counted_loop, tc(5))
    loop_true = edge_index(0, True)
    delta = coverage_of(trace)
    assert delta.pair_counts[(loop_true, loop_true)] == 4
    assert bucket_of(4) == 3  # the "4-7" class


def test_pairing_soundness_counts_match_decisions(counted_loop, two_ifs):
    for design, words in ((counted_loop, (9,)), (two_ifs, (1, 1)), (two_ifs, (0, 1))):
        trace = execute(design, TestCase(words=words))
        delta = coverage_of(trace)
        assert sum(delta.pair_counts.values()) == len(trace.decisions)
        assert sum(delta.edge_counts.values()) == len(trace.decisions)


def test_bucket_classes():
    expected = {1: 0, 2: 1, 3: 2, 4: 3, 7: 3, 8: 4, 15: 4, 16: 5, 31: 5,
                32: 6, 127: 6, 128: 7, 1000: 7}
    for count, bucket in expected.items():
        assert bucket_of(count) == bucket


# -- merge_coverage ----------------------------------------------------------

def test_first_merge_novel(two_ifs):
    cov = CoverageMap()
    delta = coverage_of(execute(two_ifs, tc(0, 1)))
    assert merge_coverage(cov, delta) is True


def test_remerge_identical_delta_not_novel(two_ifs):
    cov = CoverageMap()
    delta = coverage_of(execute(two_ifs, tc(0, 1)))
    merge_coverage(cov, delta)
    assert merge_coverage(cov, coverage_of(execute(two_ifs, tc(0, 1)))) is False


def test_new_bucket_on_known_pair_is_novel(counted_loop):
    cov = CoverageMap()
    merge_coverage(cov, coverage_of(execute(counted_loop, tc(2))))  # self-pair count 1
    assert merge_coverage(cov, coverage_of(execute(counted_loop, tc(6)))) is True  # bucket 4-7


def test_coverage_percentage(two_ifs):
    cov = CoverageMap()
    merge_coverage(cov, coverage_of(execute(two_ifs, tc(0, 1))))
    assert cov.branch_coverage_pct(two_ifs) == 50.0
    merge_coverage(cov, coverage_of(execute(two_ifs, tc(1, 0))))
    assert cov.branch_coverage_pct(two_ifs) == 100.0


def test_zero_branch_design_is_fully_covered(echo):
    assert CoverageMap().branch_coverage_pct(echo) == 100.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=40), min_size=1, max_size=12))
def test_coverage_monotone_over_merges(lengths):
    from fuce.dsl import parse_design as pd
    design = pd("design d { inputs 1; i = 0; while (i < in[0]) { i = i + 1; } output(i); }")
    cov = CoverageMap()
    seen_pairs = 0
    covered = 0
    for n in lengths:
        merge_coverage(cov, coverage_of(execute(design, tc(n))))
        bucket_bits = sum(bin(mask).count("1") for mask in cov.buckets.values())
        assert bucket_bits >= seen_pairs
        seen_pairs = bucket_bits
        now_covered = len(cov.covered_edges())
        assert now_covered >= covered
        covered = now_covered
