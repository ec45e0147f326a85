"""Word-level predicate solving over input symbols.

The pipeline: (1) split conjunctions and pin symbols reachable through
bijective chains of an equality (+c, -c, ^c, *odd-c are invertible mod
2^32, so the pinned value is the conjunct's unique solution); (2) narrow
unsigned intervals from bare-symbol comparisons, declaring Unsat only when
a domain empties or a conjunct folds to a false constant; (3) hill-climb
from the concrete witness on a branch-distance fitness with bit-flip and
small-delta moves plus random restarts; (4) exhaustively sweep the last
free symbol when its interval is narrow.  Every Sat model is re-checked
against the full predicate before it is returned.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .dsl import WORD_MASK
from .symex import (SAnd, SBin, SCmp, SConst, SInput, SNot, SOr, SymExpr,
                    eval_sym, s_and, s_bin, s_cmp, s_not, s_or, sym_inputs)

_INF = 1 << 48
_EXHAUSTIVE_WIDTH = 1 << 16
_DEADLINE_POLL = 64

MIN_DEADLINE_SECONDS = 0.05


class Conjunct(NamedTuple):
    cond: SymExpr
    required: bool


@dataclass(frozen=True)
class PathPredicate:
    """Prefix conjuncts with observed polarities plus one negated target."""
    conjuncts: tuple[Conjunct, ...]


@dataclass
class SolverStats:
    propagations: int = 0
    search_nodes: int = 0
    elapsed: float = 0.0


@dataclass
class SolverVerdict:
    status: str  # 'sat' | 'unsat' | 'unknown'
    model: Optional[dict[int, int]] = None  # input word index -> value
    reason: Optional[str] = None
    stats: SolverStats = field(default_factory=SolverStats)

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"


class _NullClock:
    def now(self) -> float:
        return 0.0

    def tick(self, n: int = 1) -> None:
        pass


class _UnsatError(Exception):
    def __init__(self, reason: str):
        self.reason = reason


def _substitute(expr: SymExpr, pinned: dict[int, int]) -> SymExpr:
    if isinstance(expr, SConst):
        return expr
    if isinstance(expr, SInput):
        value = pinned.get(expr.index)
        return expr if value is None else SConst(value)
    if isinstance(expr, SBin):
        left = _substitute(expr.left, pinned)
        right = _substitute(expr.right, pinned)
        try:
            return s_bin(expr.op, left, right)
        except ZeroDivisionError:
            return SBin(expr.op, left, right)
    if isinstance(expr, SCmp):
        return s_cmp(expr.op, _substitute(expr.left, pinned),
                     _substitute(expr.right, pinned))
    if isinstance(expr, SAnd):
        return s_and(_substitute(expr.left, pinned),
                     _substitute(expr.right, pinned))
    if isinstance(expr, SOr):
        return s_or(_substitute(expr.left, pinned),
                    _substitute(expr.right, pinned))
    if isinstance(expr, SNot):
        return s_not(_substitute(expr.operand, pinned))
    raise TypeError(f"unknown symbolic node {expr!r}")


def _flatten(cond: SymExpr, required: bool, out: list[Conjunct]) -> None:
    """Split what splits soundly; drop satisfied constants; raise on false."""
    if isinstance(cond, SNot):
        _flatten(cond.operand, not required, out)
        return
    if isinstance(cond, SAnd) and required:
        _flatten(cond.left, True, out)
        _flatten(cond.right, True, out)
        return
    if isinstance(cond, SOr) and not required:
        _flatten(cond.left, False, out)
        _flatten(cond.right, False, out)
        return
    if isinstance(cond, SConst):
        if bool(cond.value) != required:
            raise _UnsatError("constant-false conjunct")
        return
    if not sym_inputs(cond):
        try:
            value = eval_sym(cond, ())
        except ZeroDivisionError:
            out.append(Conjunct(cond, required))
            return
        if bool(value) != required:
            raise _UnsatError("constant-false conjunct")
        return
    out.append(Conjunct(cond, required))


# Bijective-chain inversion: returns (symbol index, solved value) or None.
_MUL_ODD_INVERTIBLE = True


def _invert_equality(lhs: SymExpr, rhs: SymExpr) -> Optional[tuple[int, int]]:
    if isinstance(lhs, SConst) and not isinstance(rhs, SConst):
        lhs, rhs = rhs, lhs
    if not isinstance(rhs, SConst):
        return None
    target = rhs.value
    expr = lhs
    while True:
        if isinstance(expr, SInput):
            return expr.index, target
        if not isinstance(expr, SBin):
            return None
        op, left, right = expr.op, expr.left, expr.right
        if isinstance(right, SConst):
            c = right.value
            if op == "+":
                target = (target - c) & WORD_MASK
            elif op == "-":
                target = (target + c) & WORD_MASK
            elif op == "^":
                target = target ^ c
            elif op == "*" and c % 2 == 1:
                target = (target * pow(c, -1, 1 << 32)) & WORD_MASK
            else:
                return None
            expr = left
        elif isinstance(left, SConst):
            c = left.value
            if op == "+":
                target = (target - c) & WORD_MASK
            elif op == "-":
                target = (c - target) & WORD_MASK  # c - X == t  =>  X == c - t
            elif op == "^":
                target = target ^ c
            elif op == "*" and c % 2 == 1:
                target = (target * pow(c, -1, 1 << 32)) & WORD_MASK
            else:
                return None
            expr = right
        else:
            return None


def _propagate_equalities(conjuncts: list[Conjunct], pinned: dict[int, int],
                          stats: SolverStats, clock) -> list[Conjunct]:
    """Fixpoint of: pin uniquely-determined symbols, substitute, re-flatten."""
    while True:
        stats.propagations += 1
        clock.tick(1)
        new_pin = None
        for cond, required in conjuncts:
            if not isinstance(cond, SCmp):
                continue
            is_eq = (cond.op == "==" and required) or (cond.op == "!=" and not required)
            if not is_eq:
                continue
            inverted = _invert_equality(cond.left, cond.right)
            if inverted is not None and inverted[0] not in pinned:
                new_pin = inverted
                break
        if new_pin is None:
            return conjuncts
        index, value = new_pin
        if index in pinned and pinned[index] != value:
            raise _UnsatError("conflicting equality pins")
        pinned[index] = value
        refreshed: list[Conjunct] = []
        for cond, required in conjuncts:
            _flatten(_substitute(cond, pinned), required, refreshed)
        conjuncts = refreshed


_FULL = (0, WORD_MASK)


def _narrow(dom: dict[int, tuple[int, int]], index: int, lo: int, hi: int) -> None:
    old_lo, old_hi = dom.get(index, _FULL)
    new_lo, new_hi = max(old_lo, lo), min(old_hi, hi)
    if new_lo > new_hi:
        raise _UnsatError(f"empty interval for input {index}")
    dom[index] = (new_lo, new_hi)


def _interval_pass(conjuncts: list[Conjunct], pinned: dict[int, int],
                   stats: SolverStats, clock) -> dict[int, tuple[int, int]]:
    dom: dict[int, tuple[int, int]] = {}
    for index, value in pinned.items():
        _narrow(dom, index, value, value)
    stats.propagations += 1
    clock.tick(1)
    for cond, required in conjuncts:
        if not isinstance(cond, SCmp):
            continue
        left, right = cond.left, cond.right
        op = cond.op
        if isinstance(left, SConst) and isinstance(right, SInput):
            # Mirror so the symbol sits on the left.
            mirror = {"<": ">", "<=": ">=", ">": "<", ">=": "<=",
                      "==": "==", "!=": "!="}
            left, right, op = right, left, mirror[op]
        if not (isinstance(left, SInput) and isinstance(right, SConst)):
            continue
        if not required:
            op = {"==": "!=", "!=": "==", "<": ">=", ">=": "<",
                  ">": "<=", "<=": ">"}[op]
        c = right.value
        index = left.index
        if op == "==":
            _narrow(dom, index, c, c)
        elif op == "<":
            if c == 0:
                raise _UnsatError(f"input {index} < 0 over unsigned words")
            _narrow(dom, index, 0, c - 1)
        elif op == "<=":
            _narrow(dom, index, 0, c)
        elif op == ">":
            if c == WORD_MASK:
                raise _UnsatError(f"input {index} > {WORD_MASK}")
            _narrow(dom, index, c + 1, WORD_MASK)
        elif op == ">=":
            _narrow(dom, index, c, WORD_MASK)
        # '!=' narrows nothing; kept sound.
    return dom


def _distance(cond: SymExpr, required: bool, words: tuple) -> int:
    """Classic branch distance: 0 iff the conjunct holds."""
    if isinstance(cond, SConst):
        return 0 if bool(cond.value) == required else _INF
    if isinstance(cond, SNot):
        return _distance(cond.operand, not required, words)
    if isinstance(cond, SAnd):
        left = _distance(cond.left, required, words)
        right = _distance(cond.right, required, words)
        return left + right if required else min(left, right)
    if isinstance(cond, SOr):
        left = _distance(cond.left, required, words)
        right = _distance(cond.right, required, words)
        return min(left, right) if required else left + right
    if isinstance(cond, SCmp):
        try:
            a = eval_sym(cond.left, words)
            b = eval_sym(cond.right, words)
        except ZeroDivisionError:
            return _INF
        op = cond.op
        if not required:
            op = {"==": "!=", "!=": "==", "<": ">=", ">=": "<",
                  ">": "<=", "<=": ">"}[op]
        if op == "==":
            return abs(a - b)
        if op == "!=":
            return 0 if a != b else 1
        if op == "<":
            return 0 if a < b else a - b + 1
        if op == "<=":
            return 0 if a <= b else a - b
        if op == ">":
            return 0 if a > b else b - a + 1
        return 0 if a >= b else b - a
    raise TypeError(f"non-boolean conjunct {cond!r}")


def _verify(predicate: PathPredicate, words: tuple) -> bool:
    try:
        return all(bool(eval_sym(c.cond, words)) == c.required
                   for c in predicate.conjuncts)
    except ZeroDivisionError:
        return False


def solve(predicate: PathPredicate, base: tuple[int, ...],
          deadline: float = 1.0, rng: Optional[random.Random] = None,
          clock=None, max_nodes: int = 500_000) -> SolverVerdict:
    """Decide a path predicate; `base` is the witness of its prefix.

    Models are checked by concrete evaluation before Sat is returned, so a
    Sat verdict is sound by construction.  Unsat only comes with an
    interval or constant certificate; everything else times out to Unknown.
    """
    rng = rng or random.Random(0)
    clock = clock if clock is not None else _NullClock()
    stats = SolverStats()
    start = clock.now()

    def elapsed() -> float:
        return clock.now() - start

    def out_of_budget() -> bool:
        return elapsed() > deadline or stats.search_nodes > max_nodes

    def finish(verdict: SolverVerdict) -> SolverVerdict:
        stats.elapsed = elapsed()
        verdict.stats = stats
        return verdict

    pinned: dict[int, int] = {}
    try:
        conjuncts: list[Conjunct] = []
        for conj in predicate.conjuncts:
            _flatten(conj.cond, conj.required, conjuncts)
        conjuncts = _propagate_equalities(conjuncts, pinned, stats, clock)
        dom = _interval_pass(conjuncts, pinned, stats, clock)
    except _UnsatError as unsat:
        return finish(SolverVerdict("unsat", reason=unsat.reason))

    free = sorted({index
                   for cond, _ in conjuncts
                   for index in sym_inputs(cond)
                   if index not in pinned})

    def words_for(assignment: dict[int, int]) -> tuple:
        needed = max(list(pinned) + free + [len(base) - 1], default=-1) + 1
        words = list(base[:needed]) + [0] * (needed - len(base))
        for index, value in pinned.items():
            words[index] = value
        for index, value in assignment.items():
            words[index] = value
        return tuple(words)

    def model_from(assignment: dict[int, int]) -> dict[int, int]:
        words = words_for(assignment)
        symbols = set(pinned) | set(free)
        for conj in predicate.conjuncts:
            symbols |= sym_inputs(conj.cond)
        return {index: (words[index] if index < len(words) else 0)
                for index in sorted(symbols)}

    def try_model(assignment: dict[int, int]) -> Optional[SolverVerdict]:
        if _verify(predicate, words_for(assignment)):
            return finish(SolverVerdict("sat", model=model_from(assignment)))
        return None

    if not conjuncts:
        verdict = try_model({})
        if verdict is not None:
            return verdict
        return finish(SolverVerdict("unknown", reason="verification failed"))

    def clamp(index: int, value: int) -> int:
        lo, hi = dom.get(index, _FULL)
        return min(max(value, lo), hi)

    assignment = {index: clamp(index, base[index] if index < len(base) else 0)
                  for index in free}

    def fitness(candidate: dict[int, int]) -> int:
        stats.search_nodes += 1
        clock.tick(1)
        words = words_for(candidate)
        return sum(_distance(cond, required, words) for cond, required in conjuncts)

    # Bounded exhaustion decides narrow single-symbol residues outright.
    if len(free) == 1:
        index = free[0]
        lo, hi = dom.get(index, _FULL)
        if hi - lo + 1 <= _EXHAUSTIVE_WIDTH:
            for offset, value in enumerate(range(lo, hi + 1)):
                if offset % _DEADLINE_POLL == 0 and out_of_budget():
                    return finish(SolverVerdict("unknown", reason="deadline"))
                if fitness({index: value}) == 0:
                    verdict = try_model({index: value})
                    if verdict is not None:
                        return verdict
            return finish(SolverVerdict("unknown", reason="domain exhausted"))

    if not free:
        verdict = try_model({})
        if verdict is not None:
            return verdict
        return finish(SolverVerdict("unknown", reason="no free symbols"))

    # Guided local search: first-improvement over bit flips and small deltas.
    current = fitness(assignment)
    polls = 0
    while current != 0:
        improved = False
        for index in free:
            lo, hi = dom.get(index, _FULL)
            value = assignment[index]
            moves = [value ^ (1 << bit) for bit in range(32)]
            moves.extend((value + d) & WORD_MASK for d in (1, 2, 3))
            moves.extend((value - d) & WORD_MASK for d in (1, 2, 3))
            for candidate in moves:
                if not lo <= candidate <= hi:
                    continue
                polls += 1
                if polls % _DEADLINE_POLL == 0 and out_of_budget():
                    return finish(SolverVerdict("unknown", reason="deadline"))
                assignment[index] = candidate
                score = fitness(assignment)
                if score < current:
                    current = score
                    improved = True
                    break
                assignment[index] = value
            if improved:
                break
        if not improved:
            if out_of_budget():
                return finish(SolverVerdict("unknown", reason="deadline"))
            for index in free:  # random restart
                lo, hi = dom.get(index, _FULL)
                assignment[index] = rng.randint(lo, hi)
            current = fitness(assignment)

    verdict = try_model(assignment)
    if verdict is not None:
        return verdict
    return finish(SolverVerdict("unknown", reason="verification failed"))
