import random

from fuce.clock import VirtualClock
from fuce.concolic import (ExecutionTree, build_predicate, concolic_phase,
                           emission_words, frontier, to_dot)
from fuce.corpus import entry_by_name
from fuce.dsl import parse_design
from fuce.executor import CoverageMap, coverage_of, execute, merge_coverage
from fuce.symex import SAnd, SCmp, SConst, SInput, shadow_execute
from fuce.testcase import TestCase


def grow_from(design, tree, words, step_limit=100_000):
    result = shadow_execute(design, TestCase(words=tuple(words)), step_limit)
    tree.grow(result.records, tuple(words))
    return result


def test_tree_path_length_matches_trace(two_ifs):
    tree = ExecutionTree()
    result = grow_from(two_ifs, tree, (0, 0))
    assert tree.node_count == len(result.records) == 2


def test_tree_growth_idempotent(two_ifs):
    tree = ExecutionTree()
    grow_from(two_ifs, tree, (0, 0))
    count = tree.node_count
    grow_from(two_ifs, tree, (0, 0))
    assert tree.node_count == count


def test_divergence_creates_sibling():
    design = parse_design("""
    design d {
      inputs 3;
      if (in[0] == 1) { output(1); }
      if (in[1] == 1) { output(2); }
      if (in[2] == 1) { output(3); }
    }
    """)
    tree = ExecutionTree()
    grow_from(design, tree, (1, 1, 0))
    grow_from(design, tree, (1, 1, 1))  # diverges at the third decision
    preorder = tree.nodes_preorder()
    third = [n for n in preorder if n.branch_id == 2]
    assert len(third) == 1
    assert third[0].taken == {True, False}


def test_fully_two_sided_tree_has_empty_frontier(two_ifs):
    tree = ExecutionTree()
    for words in ((0, 1), (0, 0), (1, 1), (1, 0)):
        grow_from(two_ifs, tree, words)
    assert frontier(tree, {}) == []


def test_linear_one_sided_trace_frontier_in_dfs_order():
    design = parse_design("""
    design d {
      inputs 3;
      if (in[0] == 1) { output(1); }
      if (in[1] == 1) { output(2); }
      if (in[2] == 1) { output(3); }
    }
    """)
    tree = ExecutionTree()
    grow_from(design, tree, (0, 0, 0))
    targets = frontier(tree, {})
    assert [(t.node.branch_id, t.missing) for t in targets] == [
        (0, True), (1, True), (2, True)]


def test_frontier_prefers_never_covered_static_edge():
    design = parse_design("""
    design d {
      inputs 2;
      if (in[0] == 1) { output(1); }
      if (in[1] == 1) { output(2); }
    }
    """)
    tree = ExecutionTree()
    grow_from(design, tree, (0, 0))
    # Pretend branch 0's true edge was already hit somewhere else.
    from fuce.executor import edge_index
    edge_hits = {edge_index(0, True): 3}
    targets = frontier(tree, edge_hits)
    assert [(t.node.branch_id, t.missing) for t in targets] == [
        (1, True), (0, True)]


def test_occurrence_cap_limits_loop_targets(counted_loop):
    tree = ExecutionTree()
    grow_from(counted_loop, tree, (10,))
    targets = frontier(tree, {}, occurrence_cap=4)
    loop_targets = [t for t in targets if t.node.branch_id == 0]
    assert len(loop_targets) == 4
    assert sorted(t.node.occurrence for t in loop_targets) == [0, 1, 2, 3]


def test_predicate_for_root_level_node(two_ifs):
    tree = ExecutionTree()
    grow_from(two_ifs, tree, (9, 0))
    targets = frontier(tree, {})
    root_target = [t for t in targets if t.node.branch_id == 0][0]
    predicate = build_predicate(root_target)
    assert len(predicate.conjuncts) == 1
    assert predicate.conjuncts[0].required is True


def test_predicate_depth_two_has_prefix(two_ifs):
    tree = ExecutionTree()
    grow_from(two_ifs, tree, (9, 0))
    second = [t for t in frontier(tree, {}) if t.node.branch_id == 1][0]
    predicate = build_predicate(second)
    assert len(predicate.conjuncts) == 2
    assert predicate.conjuncts[0].required is False  # observed prefix polarity
    assert predicate.conjuncts[1].required is True


def test_controller_guard_predicate_exact():
    entry = entry_by_name("controller_swm")
    tree = ExecutionTree()
    grow_from(entry.dut, tree, (7, 7, 3, 3))
    targets = frontier(tree, {})
    assert len(targets) == 1
    predicate = build_predicate(targets[0])
    assert predicate.conjuncts == (
        (SAnd(SCmp("==", SInput(0), SConst(23978)),
              SCmp("==", SInput(1), SConst(5678))), True),)


def test_emission_words_override_and_extend():
    assert emission_words((1, 2, 3), {0: 9}) == (9, 2, 3)
    assert emission_words((1,), {2: 5}) == (1, 0, 5)


def test_phase_solves_single_equality():
    design = parse_design(
        "design d { inputs 1; if (in[0] == 1234) { output(1); } }")
    clock = VirtualClock()
    emitted = []
    outcome = concolic_phase(design, [TestCase(words=(0,))], time_budget=60,
                             clock=clock, edge_hits={},
                             sink=lambda t, ok: emitted.append((t, ok)) or True)
    assert outcome.tests_emitted == 1
    assert outcome.emissions_on_target == 1
    (test, on_target), = emitted
    assert test.words[0] == 1234
    assert on_target


def test_phase_on_branchless_design_emits_nothing(echo):
    clock = VirtualClock()
    outcome = concolic_phase(echo, [TestCase(words=(5,))], time_budget=10,
                             clock=clock, edge_hits={}, sink=lambda t, ok: True)
    assert outcome.tests_emitted == 0
    assert not outcome.budget_exhausted


def test_phase_unlocks_controller_guard():
    entry = entry_by_name("controller_swm")
    seeds = [TestCase(words=(3, 1, 5, 0)), TestCase(words=(200, 9, 17, 4))]
    clock = VirtualClock()
    emitted = []
    outcome = concolic_phase(entry.dut, seeds, time_budget=120, clock=clock,
                             edge_hits={},
                             sink=lambda t, ok: emitted.append((t, ok)) or True)
    assert outcome.tests_emitted >= 1
    guard_tests = [t for t, ok in emitted
                   if t.words[0] == 23978 and t.words[1] == 5678 and ok]
    assert guard_tests, "no emission satisfied the guard"
    # Replay covers the guard's true edge.
    trace = execute(entry.dut, guard_tests[0], 1_000_000)
    assert trace.decisions[0] == (0, True)


def test_phase_budget_compliance():
    entry = entry_by_name("controller_swm")
    clock = VirtualClock(ticks_per_second=100)
    seeds = [TestCase(words=(i, i, 200, 1)) for i in range(50)]
    budget = 2.0
    outcome = concolic_phase(entry.dut, seeds, time_budget=budget, clock=clock,
                             edge_hits={}, sink=lambda t, ok: True)
    assert outcome.budget_exhausted
    assert clock.now() <= budget + 3.0  # one call granularity of slack


def test_sink_can_stop_phase():
    design = parse_design("""
    design d {
      inputs 2;
      if (in[0] == 11) { output(1); }
      if (in[1] == 22) { output(2); }
    }
    """)
    clock = VirtualClock()
    outcome = concolic_phase(design, [TestCase(words=(0, 0))], time_budget=60,
                             clock=clock, edge_hits={}, sink=lambda t, ok: False)
    assert outcome.stopped_by_sink
    assert outcome.tests_emitted == 1


def test_dot_dump_mentions_every_node(two_ifs):
    tree = ExecutionTree()
    grow_from(two_ifs, tree, (0, 0))
    dot = to_dot(tree)
    assert "digraph" in dot
    assert "b0#0" in dot and "b1#0" in dot


def test_emissions_feed_merge_like_campaign():
    # Emission coverage merges exactly like fuzz children do.
    design = parse_design(
        "design d { inputs 1; if (in[0] == 77) { output(1); } }")
    cov = CoverageMap()
    seed = TestCase(words=(0,))
    merge_coverage(cov, coverage_of(execute(design, seed, 10_000)))
    clock = VirtualClock()
    accepted = []

    def sink(test, on_target):
        novel = merge_coverage(cov, coverage_of(execute(design, test, 10_000)))
        accepted.append((test, novel, on_target))
        return True

    concolic_phase(design, [seed], 30, clock, cov.edge_hits, sink=sink)
    assert accepted and accepted[0][1] and accepted[0][2]
    assert cov.branch_coverage_pct(design) == 100.0
