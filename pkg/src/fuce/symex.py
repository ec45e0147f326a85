"""Concrete execution with a symbolic shadow store.

shadow_execute() runs a design exactly like the concrete executor (same
step accounting, same fault points) while carrying, for every variable, an
expression tree over the input words.  Each conditional decision is
recorded with its symbolic condition; values that never depend on input
fold down to constants, which is what lets the solver discard
counter-driven branches immediately.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .dsl import (Assign, Bin, Cmp, Const, Design, Halt, If, InSlot,
                  InputRead, Logic, NextInput, Not, Output, Unary, Var,
                  While, WORD_MASK)
from .executor import (DEFAULT_STEP_LIMIT, FAULT_DIV_BY_ZERO,
                       FAULT_STEP_LIMIT, ExecutionTrace)
from .testcase import TestCase

# Virtual-time cost model: symbolic interpretation runs a few times slower
# per step than the concrete executor and pays a larger setup overhead.
SHADOW_STEP_FACTOR = 4
SHADOW_OVERHEAD_TICKS = 50


@dataclass(frozen=True)
class SConst:
    value: int


@dataclass(frozen=True)
class SInput:
    index: int  # word index into the test vector


@dataclass(frozen=True)
class SBin:
    op: str
    left: "SymExpr"
    right: "SymExpr"


@dataclass(frozen=True)
class SCmp:
    op: str
    left: "SymExpr"
    right: "SymExpr"


@dataclass(frozen=True)
class SAnd:
    left: "SymExpr"
    right: "SymExpr"


@dataclass(frozen=True)
class SOr:
    left: "SymExpr"
    right: "SymExpr"


@dataclass(frozen=True)
class SNot:
    operand: "SymExpr"


SymExpr = Union[SConst, SInput, SBin, SCmp, SAnd, SOr, SNot]


def _apply_bin(op: str, a: int, b: int) -> int:
    if op == "+":
        return (a + b) & WORD_MASK
    if op == "-":
        return (a - b) & WORD_MASK
    if op == "*":
        return (a * b) & WORD_MASK
    if op == "/":
        if b == 0:
            raise ZeroDivisionError
        return a // b
    if op == "%":
        if b == 0:
            raise ZeroDivisionError
        return a % b
    if op == "&":
        return a & b
    if op == "|":
        return a | b
    if op == "^":
        return a ^ b
    if op == "<<":
        return (a << (b & 31)) & WORD_MASK
    if op == ">>":
        return a >> (b & 31)
    raise ValueError(f"unknown binary op {op!r}")


def _apply_cmp(op: str, a: int, b: int) -> bool:
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ValueError(f"unknown comparison {op!r}")


def s_bin(op: str, left: SymExpr, right: SymExpr) -> SymExpr:
    if isinstance(left, SConst) and isinstance(right, SConst):
        return SConst(_apply_bin(op, left.value, right.value))
    return SBin(op, left, right)


def s_unary(op: str, operand: SymExpr) -> SymExpr:
    if isinstance(operand, SConst):
        v = operand.value
        return SConst((-v) & WORD_MASK if op == "-" else v ^ WORD_MASK)
    if op == "-":
        return SBin("-", SConst(0), operand)
    return SBin("^", operand, SConst(WORD_MASK))


def s_cmp(op: str, left: SymExpr, right: SymExpr) -> SymExpr:
    if isinstance(left, SConst) and isinstance(right, SConst):
        return SConst(1 if _apply_cmp(op, left.value, right.value) else 0)
    return SCmp(op, left, right)


def s_and(left: SymExpr, right: SymExpr) -> SymExpr:
    if isinstance(left, SConst) and isinstance(right, SConst):
        return SConst(1 if (left.value and right.value) else 0)
    return SAnd(left, right)


def s_or(left: SymExpr, right: SymExpr) -> SymExpr:
    if isinstance(left, SConst) and isinstance(right, SConst):
        return SConst(1 if (left.value or right.value) else 0)
    return SOr(left, right)


def s_not(operand: SymExpr) -> SymExpr:
    if isinstance(operand, SConst):
        return SConst(0 if operand.value else 1)
    return SNot(operand)


def eval_sym(expr: SymExpr, words: tuple[int, ...]):
    """Evaluate a symbolic expression under a concrete word vector.

    Indices beyond the vector read as 0, mirroring the executor's
    input-exhaustion rule.  May raise ZeroDivisionError.
    """
    if isinstance(expr, SConst):
        return expr.value
    if isinstance(expr, SInput):
        return words[expr.index] if expr.index < len(words) else 0
    if isinstance(expr, SBin):
        return _apply_bin(expr.op, eval_sym(expr.left, words),
                          eval_sym(expr.right, words))
    if isinstance(expr, SCmp):
        return _apply_cmp(expr.op, eval_sym(expr.left, words),
                          eval_sym(expr.right, words))
    if isinstance(expr, SAnd):
        a = eval_sym(expr.left, words)
        b = eval_sym(expr.right, words)
        return bool(a) and bool(b)
    if isinstance(expr, SOr):
        a = eval_sym(expr.left, words)
        b = eval_sym(expr.right, words)
        return bool(a) or bool(b)
    if isinstance(expr, SNot):
        return not eval_sym(expr.operand, words)
    raise TypeError(f"unknown symbolic node {expr!r}")


def sym_inputs(expr: SymExpr) -> set[int]:
    """Word indices an expression depends on."""
    out: set[int] = set()

    def walk(e: SymExpr) -> None:
        if isinstance(e, SInput):
            out.add(e.index)
        elif isinstance(e, (SBin, SCmp, SAnd, SOr)):
            walk(e.left)
            walk(e.right)
        elif isinstance(e, SNot):
            walk(e.operand)

    walk(expr)
    return out


@dataclass(frozen=True)
class ConditionRecord:
    branch_id: int
    occurrence: int  # 0-based dynamic occurrence of this branch in the trace
    sym_cond: SymExpr
    taken: bool


@dataclass(frozen=True)
class ShadowResult:
    records: tuple[ConditionRecord, ...]
    trace: ExecutionTrace


class _ShadowFault(Exception):
    def __init__(self, kind: str):
        self.kind = kind


class _ShadowHalt(Exception):
    pass


class _Shadow:
    def __init__(self, design: Design, test: TestCase, step_limit: int):
        self.words = test.words
        self.arity = design.input_arity
        self.cursor = design.input_arity
        self.env: dict[str, tuple[int, SymExpr]] = {}
        self.limit = step_limit
        self.steps = 0
        self.exhausted = False
        self.decisions: list = []
        self.outputs: list = []
        self.records: list[ConditionRecord] = []
        self.occurrences: dict[int, int] = {}

    def read_word(self, index: int) -> tuple[int, SymExpr]:
        if index < len(self.words):
            value = self.words[index]
        else:
            value = 0
            self.exhausted = True
        return value, SInput(index)

    def eval(self, e) -> tuple[int, SymExpr]:
        if isinstance(e, Const):
            return e.value, SConst(e.value)
        if isinstance(e, Var):
            return self.env.get(e.name, (0, SConst(0)))
        if isinstance(e, InSlot):
            return self.read_word(e.slot)
        if isinstance(e, NextInput):
            index = self.cursor
            self.cursor += 1
            return self.read_word(index)
        if isinstance(e, Unary):
            val, sym = self.eval(e.operand)
            if e.op == "-":
                return (-val) & WORD_MASK, s_unary("-", sym)
            return val ^ WORD_MASK, s_unary("~", sym)
        if isinstance(e, Bin):
            lv, ls = self.eval(e.left)
            rv, rs = self.eval(e.right)
            try:
                value = _apply_bin(e.op, lv, rv)
            except ZeroDivisionError:
                raise _ShadowFault(FAULT_DIV_BY_ZERO) from None
            return value, s_bin(e.op, ls, rs)
        if isinstance(e, Cmp):
            lv, ls = self.eval(e.left)
            rv, rs = self.eval(e.right)
            return _apply_cmp(e.op, lv, rv), s_cmp(e.op, ls, rs)
        if isinstance(e, Logic):
            lv, ls = self.eval(e.left)
            rv, rs = self.eval(e.right)
            if e.op == "&&":
                return (bool(lv) and bool(rv)), s_and(ls, rs)
            return (bool(lv) or bool(rv)), s_or(ls, rs)
        if isinstance(e, Not):
            val, sym = self.eval(e.operand)
            return (not val), s_not(sym)
        raise TypeError(f"unknown expression node {e!r}")

    def step(self) -> None:
        self.steps += 1
        if self.steps > self.limit:
            raise _ShadowFault(FAULT_STEP_LIMIT)

    def decide(self, branch_id: int, cond) -> bool:
        value, sym = self.eval(cond)
        taken = bool(value)
        occ = self.occurrences.get(branch_id, 0)
        self.occurrences[branch_id] = occ + 1
        self.decisions.append((branch_id, taken))
        self.records.append(ConditionRecord(branch_id, occ, sym, taken))
        return taken

    def run_block(self, body: tuple) -> None:
        for st in body:
            self.step()
            if isinstance(st, Assign):
                self.env[st.var] = self.eval(st.expr)
            elif isinstance(st, InputRead):
                self.env[st.var] = self.read_word(st.slot)
            elif isinstance(st, Output):
                value, _sym = self.eval(st.expr)
                self.outputs.append(value)
            elif isinstance(st, Halt):
                raise _ShadowHalt()
            elif isinstance(st, If):
                if self.decide(st.branch_id, st.cond):
                    self.run_block(st.then_body)
                else:
                    self.run_block(st.else_body)
            elif isinstance(st, While):
                while self.decide(st.branch_id, st.cond):
                    self.run_block(st.body)
                    self.step()
            else:
                raise TypeError(f"unknown statement node {st!r}")


def shadow_execute(design: Design, test: TestCase,
                   step_limit: int = DEFAULT_STEP_LIMIT,
                   clock=None) -> ShadowResult:
    """Concrete execution annotated with symbolic conditions, in lock step
    with execute(): identical decisions, outputs, step counts and faults.
    """
    shadow = _Shadow(design, test, step_limit)
    fault: Optional[str] = None
    try:
        shadow.run_block(design.body)
    except _ShadowHalt:
        pass
    except _ShadowFault as f:
        fault = f.kind
    if clock is not None:
        clock.tick(SHADOW_STEP_FACTOR * max(shadow.steps, 1)
                   + SHADOW_OVERHEAD_TICKS)
    trace = ExecutionTrace(
        decisions=tuple(shadow.decisions),
        outputs=tuple(shadow.outputs),
        steps_used=shadow.steps,
        fault=fault,
        input_exhausted=shadow.exhausted,
    )
    return ShadowResult(records=tuple(shadow.records), trace=trace)
