import random

from fuce.solver import Conjunct, PathPredicate, solve
from fuce.symex import (SAnd, SBin, SCmp, SConst, SInput, SNot, SOr,
                        eval_sym)


def pred(*conjuncts):
    return PathPredicate(conjuncts=tuple(Conjunct(c, r) for c, r in conjuncts))


def eq(expr, value):
    return SCmp("==", expr, SConst(value))


def check_model(predicate, verdict):
    assert verdict.is_sat
    words_len = max(verdict.model) + 1
    words = tuple(verdict.model.get(i, 0) for i in range(words_len))
    for conj in predicate.conjuncts:
        assert bool(eval_sym(conj.cond, words)) == conj.required


def test_guard_equalities_solved_by_propagation():
    p = pred((SAnd(eq(SInput(0), 23978), eq(SInput(1), 5678)), True))
    verdict = solve(p, base=(0, 0))
    assert verdict.is_sat
    assert verdict.model[0] == 23978
    assert verdict.model[1] == 5678
    assert verdict.stats.search_nodes == 0  # no search needed


def test_unsigned_lower_bound_unsat():
    p = pred((SCmp("<", SInput(0), SConst(0)), True))
    verdict = solve(p, base=(7,))
    assert verdict.status == "unsat"


def test_conflicting_equalities_unsat():
    p = pred((eq(SInput(0), 5), True), (eq(SInput(0), 7), True))
    assert solve(p, base=(0,)).status == "unsat"


def test_contradictory_intervals_unsat():
    p = pred((SCmp("<", SInput(0), SConst(10)), True),
             (SCmp(">", SInput(0), SConst(20)), True))
    assert solve(p, base=(0,)).status == "unsat"


def test_constant_false_conjunct_unsat():
    p = pred((SCmp(">=", SConst(3), SConst(4095)), True))
    assert solve(p, base=(0,)).status == "unsat"


def test_affine_modular_residue():
    # (in0 * 3 + 7) % 256 == 19; brute force confirms x = 4 (mod 256) works.
    assert any((3 * x + 7) % 256 == 19 for x in range(256))
    expr = SBin("%", SBin("+", SBin("*", SInput(0), SConst(3)), SConst(7)),
                SConst(256))
    p = pred((eq(expr, 19), True))
    verdict = solve(p, base=(0,), deadline=10.0)
    check_model(p, verdict)
    assert (3 * verdict.model[0] + 7) % 256 == 19


def test_bijective_chain_inversion():
    # ((x ^ 0xAA) + 100) * 3 == k has a unique solution found without search.
    x = 123456
    k = (((x ^ 0xAA) + 100) * 3) & 0xFFFFFFFF
    expr = SBin("*", SBin("+", SBin("^", SInput(0), SConst(0xAA)),
                          SConst(100)), SConst(3))
    verdict = solve(pred((eq(expr, k), True)), base=(0,))
    assert verdict.is_sat
    assert verdict.model[0] == x
    assert verdict.stats.search_nodes == 0


def test_masked_inequality_solved_by_search():
    p = pred((SCmp("<", SConst(200), SBin("&", SInput(0), SConst(8191))), True))
    verdict = solve(p, base=(200,), deadline=10.0)
    check_model(p, verdict)


def test_interval_plus_search_two_symbols():
    p = pred((SCmp(">", SInput(0), SConst(1000)), True),
             (eq(SBin("+", SInput(0), SInput(1)), 5000), True))
    verdict = solve(p, base=(0, 0), deadline=10.0)
    check_model(p, verdict)
    assert verdict.model[0] > 1000
    assert (verdict.model[0] + verdict.model[1]) & 0xFFFFFFFF == 5000


def test_exhaustive_single_narrow_symbol():
    # Narrow interval, non-invertible condition: the sweep must find it.
    p = pred((SCmp("<=", SInput(0), SConst(4000)), True),
             (eq(SBin("%", SInput(0), SConst(97)), 13), True),
             (SCmp(">=", SInput(0), SConst(3900)), True))
    verdict = solve(p, base=(0,), deadline=10.0)
    check_model(p, verdict)


def test_negated_disjunction_splits():
    p = pred((SOr(eq(SInput(0), 4), SCmp("<", SInput(1), SConst(5))), False))
    verdict = solve(p, base=(4, 0), deadline=10.0)
    check_model(p, verdict)
    assert verdict.model[0] != 4
    assert verdict.model[1] >= 5


def test_not_pushes_polarity():
    p = pred((SNot(eq(SInput(0), 9)), False))
    verdict = solve(p, base=(0,))
    assert verdict.is_sat
    assert verdict.model[0] == 9


def test_unconstrained_base_values_pass_through():
    p = pred((eq(SInput(2), 77), True))
    verdict = solve(p, base=(11, 22, 0, 44))
    assert verdict.is_sat
    assert verdict.model == {2: 77}


def test_deterministic_for_fixed_seed():
    p = pred((eq(SBin("&", SInput(0), SConst(0xFFFF)), 0xBEEF), True),
             (SCmp(">", SInput(1), SConst(100)), True))
    a = solve(p, base=(0, 0), rng=random.Random(7), deadline=10.0)
    b = solve(p, base=(0, 0), rng=random.Random(7), deadline=10.0)
    assert a.status == b.status
    assert a.model == b.model


def test_never_unsat_on_satisfiable_random_predicates():
    # Model-first generation: build random conjuncts that a chosen model
    # satisfies, then demand the solver never declares them Unsat.
    rng = random.Random(1234)
    for _ in range(300):
        n_syms = rng.randint(1, 4)
        model = {i: rng.getrandbits(32) for i in range(n_syms)}
        words = tuple(model[i] for i in range(n_syms))
        conjuncts = []
        for _ in range(rng.randint(1, 4)):
            sym = SInput(rng.randrange(n_syms))
            kind = rng.random()
            if kind < 0.5:
                offset = rng.getrandbits(8)
                expr = SBin("+", sym, SConst(offset))
                value = eval_sym(expr, words)
                conjuncts.append(Conjunct(eq(expr, value), True))
            elif kind < 0.8:
                concrete = eval_sym(sym, words)
                op = rng.choice(("<=", ">="))
                bound = (concrete if op == "<=" else concrete)
                conjuncts.append(Conjunct(SCmp(op, sym, SConst(bound)), True))
            else:
                mask = rng.getrandbits(12)
                expr = SBin("&", sym, SConst(mask))
                conjuncts.append(Conjunct(eq(expr, eval_sym(expr, words)), True))
        predicate = PathPredicate(conjuncts=tuple(conjuncts))
        verdict = solve(predicate, base=words, deadline=0.5,
                        rng=random.Random(1))
        assert verdict.status != "unsat"
        if verdict.is_sat:
            check_model(predicate, verdict)


def test_stats_recorded():
    p = pred((eq(SInput(0), 3), True))
    verdict = solve(p, base=(0,))
    assert verdict.stats.propagations >= 1
    assert verdict.stats.elapsed >= 0.0
