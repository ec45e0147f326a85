import random

from designgen import random_design, random_test

from fuce.corpus import builtin_suite
from fuce.dsl import parse_design
from fuce.executor import execute
from fuce.symex import (SAnd, SBin, SCmp, SConst, SInput, eval_sym,
                        shadow_execute, sym_inputs)
from fuce.testcase import TestCase


def test_branchless_design_yields_no_records(echo):
    result = shadow_execute(echo, TestCase(words=(7,)))
    assert result.records == ()
    assert result.trace.outputs == (7,)


def test_single_condition_symbolic_form():
    d = parse_design("design d { inputs 1; if (in[0] + 1 == 5) { output(1); } }")
    result = shadow_execute(d, TestCase(words=(4,)))
    (rec,) = result.records
    assert rec.taken is True
    assert rec.sym_cond == SCmp("==", SBin("+", SInput(0), SConst(1)), SConst(5))


def test_controller_guard_symbolic_condition():
    entry = next(e for e in builtin_suite() if e.name == "controller_swm")
    result = shadow_execute(entry.dut, TestCase(words=(0, 0, 0, 0)))
    guard = result.records[0]
    assert guard.branch_id == 0
    assert guard.taken is False
    assert guard.sym_cond == SAnd(SCmp("==", SInput(0), SConst(23978)),
                                  SCmp("==", SInput(1), SConst(5678)))


def test_counter_conditions_fold_to_constants():
    d = parse_design(
        "design d { inputs 1; i = 0; while (i < 3) { i = i + 1; } output(i); }")
    result = shadow_execute(d, TestCase(words=(9,)))
    assert len(result.records) == 4
    for rec in result.records:
        assert isinstance(rec.sym_cond, SConst)
        assert bool(rec.sym_cond.value) == rec.taken


def test_occurrence_indices_count_per_branch(counted_loop):
    result = shadow_execute(counted_loop, TestCase(words=(3,)))
    assert [r.occurrence for r in result.records] == [0, 1, 2, 3]


def test_next_input_symbols_use_word_indices():
    d = parse_design(
        "design d { inputs 1; a = next_input(); if (a == 9) { output(1); } }")
    result = shadow_execute(d, TestCase(words=(5, 9)))
    (rec,) = result.records
    assert rec.sym_cond == SCmp("==", SInput(1), SConst(9))
    assert rec.taken is True


def test_exhausted_reads_stay_symbolic():
    d = parse_design(
        "design d { inputs 1; a = next_input(); if (a == 0) { output(1); } }")
    result = shadow_execute(d, TestCase(words=(5,)))
    (rec,) = result.records
    assert rec.sym_cond == SCmp("==", SInput(1), SConst(0))
    assert rec.taken is True  # exhausted read is 0
    assert eval_sym(rec.sym_cond, (5,)) is True
    assert eval_sym(rec.sym_cond, (5, 4)) is False


def test_sym_inputs_collection():
    expr = SAnd(SCmp("==", SInput(0), SConst(1)), SCmp("<", SInput(3), SInput(0)))
    assert sym_inputs(expr) == {0, 3}


def test_shadow_matches_concrete_on_corpus_trigger_tests():
    for entry in builtin_suite():
        if entry.trigger_test is None:
            continue
        concrete = execute(entry.dut, entry.trigger_test)
        shadow = shadow_execute(entry.dut, entry.trigger_test)
        assert shadow.trace == concrete


def test_shadow_consistency_property_sample():
    # Small pre-acceptance sample of the criterion-5 suite.
    rng = random.Random(99)
    for _ in range(150):
        design = random_design(rng)
        test = random_test(rng, design.input_arity)
        concrete = execute(design, test, step_limit=20_000)
        shadow = shadow_execute(design, test, step_limit=20_000)
        assert shadow.trace == concrete
        for rec in shadow.records:
            assert bool(eval_sym(rec.sym_cond, test.words)) == rec.taken
