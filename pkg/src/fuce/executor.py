"""Concrete execution with branch-pair instrumentation.

execute() runs a design on a test case and records every conditional
decision, the emitted outputs, and any runtime fault.  Faults are data on
the trace, never exceptions: the fuzzer treats faulting inputs as
perfectly executable.

Coverage follows the AFL scheme: the fitness unit is the ordered pair of
consecutively executed branch edges (plus a synthetic entry edge before
the first decision), and each pair's per-run hit count is classed into one
of eight buckets.  An input is novel when it touches a (pair, bucket)
combination never seen before.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

from .dsl import (Assign, Bin, BranchEdge, Cmp, Const, Design, Halt, If,
                  InSlot, InputRead, Logic, NextInput, Not, Output, Unary,
                  Var, While, WORD_MASK)
from .testcase import TestCase

FAULT_DIV_BY_ZERO = "div_by_zero"
FAULT_STEP_LIMIT = "step_limit"

DEFAULT_STEP_LIMIT = 1_000_000

# Synthetic edge paired with the first real decision of a trace.
ENTRY_EDGE = -1

# Virtual-time cost model: harness overhead charged per execution on top of
# interpreter steps (mirrors fork/exec dominating tiny targets).
EXEC_OVERHEAD_TICKS = 25

# AFL-style hit-count classes: 1, 2, 3, 4-7, 8-15, 16-31, 32-127, 128+.
_BUCKET_BOUNDS = (1, 2, 3, 7, 15, 31, 127)


def bucket_of(count: int) -> int:
    for idx, bound in enumerate(_BUCKET_BOUNDS):
        if count <= bound:
            return idx
    return 7


def edge_index(branch_id: int, polarity: bool) -> int:
    return branch_id * 2 + (1 if polarity else 0)


def edge_from_index(idx: int) -> BranchEdge:
    return BranchEdge(idx // 2, bool(idx % 2))


@dataclass(frozen=True)
class ExecutionTrace:
    decisions: tuple  # ((branch_id, polarity), ...) in dynamic order
    outputs: tuple
    steps_used: int
    fault: Optional[str] = None
    input_exhausted: bool = False


class _Fault(Exception):
    def __init__(self, kind: str):
        self.kind = kind


class _HaltSignal(Exception):
    pass


class _Ctx:
    __slots__ = ("words", "nwords", "env", "cursor", "exhausted")

    def __init__(self, words: tuple[int, ...], arity: int):
        self.words = words
        self.nwords = len(words)
        self.env: dict[str, int] = {}
        self.cursor = arity
        self.exhausted = False


# --------------------------------------------------------------------------
# Expression compilation (AST -> closures over _Ctx)
# --------------------------------------------------------------------------

def _compile_expr(e) -> Callable[[_Ctx], int]:
    if isinstance(e, Const):
        v = e.value
        return lambda ctx: v
    if isinstance(e, Var):
        name = e.name
        return lambda ctx: ctx.env.get(name, 0)
    if isinstance(e, InSlot):
        slot = e.slot

        def read_slot(ctx: _Ctx) -> int:
            if slot < ctx.nwords:
                return ctx.words[slot]
            ctx.exhausted = True
            return 0

        return read_slot
    if isinstance(e, NextInput):
        def read_next(ctx: _Ctx) -> int:
            cur = ctx.cursor
            ctx.cursor = cur + 1
            if cur < ctx.nwords:
                return ctx.words[cur]
            ctx.exhausted = True
            return 0

        return read_next
    if isinstance(e, Unary):
        sub = _compile_expr(e.operand)
        if e.op == "-":
            return lambda ctx: (-sub(ctx)) & WORD_MASK
        return lambda ctx: sub(ctx) ^ WORD_MASK
    if isinstance(e, Bin):
        lf = _compile_expr(e.left)
        rf = _compile_expr(e.right)
        op = e.op
        if op == "+":
            return lambda ctx: (lf(ctx) + rf(ctx)) & WORD_MASK
        if op == "-":
            return lambda ctx: (lf(ctx) - rf(ctx)) & WORD_MASK
        if op == "*":
            return lambda ctx: (lf(ctx) * rf(ctx)) & WORD_MASK
        if op == "/":
            def div(ctx: _Ctx) -> int:
                a = lf(ctx)
                d = rf(ctx)
                if d == 0:
                    raise _Fault(FAULT_DIV_BY_ZERO)
                return a // d

            return div
        if op == "%":
            def mod(ctx: _Ctx) -> int:
                a = lf(ctx)
                d = rf(ctx)
                if d == 0:
                    raise _Fault(FAULT_DIV_BY_ZERO)
                return a % d

            return mod
        if op == "&":
            return lambda ctx: lf(ctx) & rf(ctx)
        if op == "|":
            return lambda ctx: lf(ctx) | rf(ctx)
        if op == "^":
            return lambda ctx: lf(ctx) ^ rf(ctx)
        if op == "<<":
            return lambda ctx: (lf(ctx) << (rf(ctx) & 31)) & WORD_MASK
        if op == ">>":
            return lambda ctx: lf(ctx) >> (rf(ctx) & 31)
        raise ValueError(f"unknown binary op {op!r}")
    if isinstance(e, Cmp):
        lf = _compile_expr(e.left)
        rf = _compile_expr(e.right)
        op = e.op
        if op == "==":
            return lambda ctx: lf(ctx) == rf(ctx)
        if op == "!=":
            return lambda ctx: lf(ctx) != rf(ctx)
        if op == "<":
            return lambda ctx: lf(ctx) < rf(ctx)
        if op == "<=":
            return lambda ctx: lf(ctx) <= rf(ctx)
        if op == ">":
            return lambda ctx: lf(ctx) > rf(ctx)
        if op == ">=":
            return lambda ctx: lf(ctx) >= rf(ctx)
        raise ValueError(f"unknown comparison {op!r}")
    if isinstance(e, Logic):
        lf = _compile_expr(e.left)
        rf = _compile_expr(e.right)
        # Both operands always evaluate (combinational-logic semantics, no
        # short circuit); keeps the symbolic shadow in lock step.
        if e.op == "&&":
            def and_(ctx: _Ctx) -> bool:
                a = lf(ctx)
                b = rf(ctx)
                return bool(a) and bool(b)

            return and_

        def or_(ctx: _Ctx) -> bool:
            a = lf(ctx)
            b = rf(ctx)
            return bool(a) or bool(b)

        return or_
    if isinstance(e, Not):
        sub = _compile_expr(e.operand)
        return lambda ctx: not sub(ctx)
    raise TypeError(f"unknown expression node {e!r}")


def _compile_body(body: tuple) -> tuple:
    compiled = []
    for st in body:
        if isinstance(st, Assign):
            compiled.append(("assign", st.var, _compile_expr(st.expr)))
        elif isinstance(st, InputRead):
            compiled.append(("assign", st.var, _compile_expr(InSlot(st.slot))))
        elif isinstance(st, Output):
            compiled.append(("output", _compile_expr(st.expr)))
        elif isinstance(st, Halt):
            compiled.append(("halt",))
        elif isinstance(st, If):
            compiled.append(("if", st.branch_id, _compile_expr(st.cond),
                             _compile_body(st.then_body), _compile_body(st.else_body)))
        elif isinstance(st, While):
            compiled.append(("while", st.branch_id, _compile_expr(st.cond),
                             _compile_body(st.body)))
        else:
            raise TypeError(f"unknown statement node {st!r}")
    return tuple(compiled)


@lru_cache(maxsize=256)
def _compiled(design: Design) -> tuple:
    return _compile_body(design.body)


class _Machine:
    __slots__ = ("ctx", "limit", "steps", "decisions", "outputs")

    def __init__(self, ctx: _Ctx, limit: int):
        self.ctx = ctx
        self.limit = limit
        self.steps = 0
        self.decisions: list = []
        self.outputs: list = []

    def run_block(self, block: tuple) -> None:
        ctx = self.ctx
        for st in block:
            op = st[0]
            self.steps += 1
            if self.steps > self.limit:
                raise _Fault(FAULT_STEP_LIMIT)
            if op == "assign":
                ctx.env[st[1]] = st[2](ctx)
            elif op == "if":
                taken = bool(st[2](ctx))
                self.decisions.append((st[1], taken))
                self.run_block(st[3] if taken else st[4])
            elif op == "while":
                branch_id, cond, body = st[1], st[2], st[3]
                while True:
                    taken = bool(cond(ctx))
                    self.decisions.append((branch_id, taken))
                    if not taken:
                        break
                    self.run_block(body)
                    self.steps += 1
                    if self.steps > self.limit:
                        raise _Fault(FAULT_STEP_LIMIT)
            elif op == "output":
                self.outputs.append(st[1](ctx))
            else:  # halt
                raise _HaltSignal()


def execute(design: Design, test: TestCase,
            step_limit: int = DEFAULT_STEP_LIMIT,
            clock=None) -> ExecutionTrace:
    """Run a design on a test case; deterministic given its arguments.

    The clock, when given, advances by one tick per interpreter step after
    the run completes (virtual-time granularity is one execution).
    """
    if step_limit <= 0:
        raise ValueError("step_limit must be positive")
    ctx = _Ctx(test.words, design.input_arity)
    machine = _Machine(ctx, step_limit)
    fault = None
    try:
        machine.run_block(_compiled(design))
    except _HaltSignal:
        pass
    except _Fault as f:
        fault = f.kind
    if clock is not None:
        clock.tick(max(machine.steps, 1) + EXEC_OVERHEAD_TICKS)
    return ExecutionTrace(
        decisions=tuple(machine.decisions),
        outputs=tuple(machine.outputs),
        steps_used=machine.steps,
        fault=fault,
        input_exhausted=ctx.exhausted,
    )


# --------------------------------------------------------------------------
# Coverage
# --------------------------------------------------------------------------

@dataclass
class CoverageDelta:
    """Per-run coverage: branch-pair hit counts and per-edge hit counts."""
    pair_counts: dict  # (prev_edge_idx, cur_edge_idx) -> run-local count
    edge_counts: dict  # edge_idx -> run-local count


def coverage_of(trace: ExecutionTrace) -> CoverageDelta:
    pair_counts: dict = {}
    edge_counts: dict = {}
    prev = ENTRY_EDGE
    for branch_id, polarity in trace.decisions:
        cur = branch_id * 2 + (1 if polarity else 0)
        key = (prev, cur)
        pair_counts[key] = pair_counts.get(key, 0) + 1
        edge_counts[cur] = edge_counts.get(cur, 0) + 1
        prev = cur
    return CoverageDelta(pair_counts, edge_counts)


@dataclass
class CoverageMap:
    """Campaign-global ledger: bucket sets per branch pair + edge totals."""
    buckets: dict = field(default_factory=dict)  # pair key -> bucket bitmask
    edge_hits: dict = field(default_factory=dict)  # edge_idx -> total hits

    def covered_edges(self) -> set[BranchEdge]:
        return {edge_from_index(i) for i, n in self.edge_hits.items() if n > 0}

    def branch_coverage_pct(self, design: Design) -> float:
        total = 2 * design.branch_count
        if total == 0:
            return 100.0
        return 100.0 * len(self.covered_edges()) / total


def merge_coverage(cov: CoverageMap, delta: CoverageDelta) -> bool:
    """Fold a run's delta into the global map; True iff anything was new."""
    novel = False
    buckets = cov.buckets
    for key, count in delta.pair_counts.items():
        bit = 1 << bucket_of(count)
        old = buckets.get(key, 0)
        if old | bit != old:
            buckets[key] = old | bit
            novel = True
    edge_hits = cov.edge_hits
    for edge, count in delta.edge_counts.items():
        edge_hits[edge] = edge_hits.get(edge, 0) + count
    return novel
