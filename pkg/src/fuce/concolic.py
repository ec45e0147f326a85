"""Execution-tree construction and targeted test emission.

Seeds are shadow-executed into a trie of branch decisions; one-sided nodes
form the frontier of uncovered edges.  Frontier entries whose static edge
has never been hit anywhere rank first (coverage-maximizing), then DFS
pre-order.  Per branch, only the few shallowest uncovered occurrence
levels are attempted per phase, which is what keeps symbolic loops from
exploding the way an unconstrained forking engine would.

Every SAT model is replayed concretely before emission and checked to
cover its targeted (node, polarity) edge; a miss is an engine bug, counted
and surfaced, never silently accepted.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .dsl import Design
from .executor import DEFAULT_STEP_LIMIT, edge_index, execute
from .solver import (MIN_DEADLINE_SECONDS, Conjunct, PathPredicate,
                     SolverVerdict, solve)
from .symex import ConditionRecord, shadow_execute
from .testcase import ORIGIN_CONCOLIC, TestCase

DEFAULT_OCCURRENCE_CAP = 4


class TreeNode:
    __slots__ = ("branch_id", "occurrence", "cond", "witness", "taken",
                 "children", "parent", "parent_polarity")

    def __init__(self, branch_id: int, occurrence: int, cond, witness,
                 parent: Optional["TreeNode"], parent_polarity: Optional[bool]):
        self.branch_id = branch_id
        self.occurrence = occurrence
        self.cond = cond  # symbolic condition from the first trace here
        self.witness = witness  # words of the first test reaching this node
        self.taken: set[bool] = set()
        self.children: dict[bool, TreeNode] = {}
        self.parent = parent
        self.parent_polarity = parent_polarity


class ExecutionTree:
    """Trie over decision prefixes of all observed traces."""

    def __init__(self):
        self.first: Optional[TreeNode] = None
        self.node_count = 0

    def grow(self, records: tuple[ConditionRecord, ...],
             witness: tuple[int, ...]) -> None:
        """Extend the trie with one trace; idempotent for repeats."""
        parent: Optional[TreeNode] = None
        polarity: Optional[bool] = None
        slot = self.first
        for rec in records:
            if slot is None:
                slot = TreeNode(rec.branch_id, rec.occurrence, rec.sym_cond,
                                witness, parent, polarity)
                self.node_count += 1
                if parent is None:
                    self.first = slot
                else:
                    parent.children[polarity] = slot
            elif slot.branch_id != rec.branch_id:
                raise AssertionError(
                    f"trace divergence: node {slot.branch_id} vs record "
                    f"{rec.branch_id}; the executor is not deterministic")
            slot.taken.add(rec.taken)
            parent, polarity = slot, rec.taken
            slot = slot.children.get(rec.taken)

    def nodes_preorder(self) -> list[TreeNode]:
        out: list[TreeNode] = []
        stack = [self.first] if self.first is not None else []
        while stack:
            node = stack.pop()
            out.append(node)
            for polarity in (True, False):  # reversed push => False first
                child = node.children.get(polarity)
                if child is not None:
                    stack.append(child)
        return out


@dataclass(frozen=True)
class FrontierTarget:
    node: TreeNode
    missing: bool
    preorder: int


def frontier(tree: ExecutionTree, edge_hits: dict,
             occurrence_cap: int = DEFAULT_OCCURRENCE_CAP) -> list[FrontierTarget]:
    """Ordered uncovered edges: never-hit static edges first, then DFS order.

    Per branch id, only the `occurrence_cap` smallest uncovered occurrence
    levels are admitted (controlled forking in loops).
    """
    candidates: list[FrontierTarget] = []
    for idx, node in enumerate(tree.nodes_preorder()):
        if len(node.taken) == 1:
            missing = not next(iter(node.taken))
            candidates.append(FrontierTarget(node, missing, idx))

    allowed: dict[int, set[int]] = {}
    by_branch: dict[int, set[int]] = {}
    for target in candidates:
        by_branch.setdefault(target.node.branch_id, set()).add(
            target.node.occurrence)
    for branch_id, occs in by_branch.items():
        allowed[branch_id] = set(sorted(occs)[:occurrence_cap])

    kept = [t for t in candidates
            if t.node.occurrence in allowed[t.node.branch_id]]

    def rank(target: FrontierTarget):
        edge = edge_index(target.node.branch_id, target.missing)
        never_hit = edge_hits.get(edge, 0) == 0
        return (0 if never_hit else 1, target.preorder, target.node.branch_id)

    return sorted(kept, key=rank)


def build_predicate(target: FrontierTarget) -> PathPredicate:
    """Path prefix with taken polarities; the target conjunct is flipped."""
    prefix: list[Conjunct] = []
    node = target.node
    anc, pol = node.parent, node.parent_polarity
    while anc is not None:
        prefix.append(Conjunct(anc.cond, pol))
        anc, pol = anc.parent, anc.parent_polarity
    prefix.reverse()
    prefix.append(Conjunct(node.cond, target.missing))
    return PathPredicate(conjuncts=tuple(prefix))


def emission_words(base: tuple[int, ...], model: dict[int, int]) -> tuple[int, ...]:
    """Model values override the witness; unconstrained words pass through."""
    length = max([len(base)] + [i + 1 for i in model])
    words = list(base) + [0] * (length - len(base))
    for index, value in model.items():
        words[index] = value
    return tuple(words)


def to_dot(tree: ExecutionTree) -> str:
    """Execution tree as a DOT graph (debugging aid)."""
    lines = ["digraph exec_tree {", '  entry [shape=point];']
    nodes = tree.nodes_preorder()
    ids = {id(node): f"n{i}" for i, node in enumerate(nodes)}
    for i, node in enumerate(nodes):
        label = f"b{node.branch_id}#{node.occurrence}"
        missing = {True, False} - node.taken
        shape = "doublecircle" if missing else "circle"
        lines.append(f'  n{i} [label="{label}", shape={shape}];')
        src = "entry" if node.parent is None else ids[id(node.parent)]
        if node.parent is None:
            lines.append(f"  entry -> n{i};")
    for i, node in enumerate(nodes):
        for polarity, child in sorted(node.children.items()):
            edge = "T" if polarity else "F"
            lines.append(f'  n{i} -> {ids[id(child)]} [label="{edge}"];')
    lines.append("}")
    return "\n".join(lines)


@dataclass
class ConcolicOutcome:
    tests_emitted: int = 0
    emissions_on_target: int = 0  # replay covered the targeted edge
    sat: int = 0
    unsat: int = 0
    unknown: int = 0
    seeds_traced: int = 0
    budget_exhausted: bool = False
    stopped_by_sink: bool = False


def concolic_phase(design: Design, seeds: list[TestCase], time_budget: float,
                   clock, edge_hits: dict,
                   sink: Callable[[TestCase, bool], bool],
                   rng: Optional[random.Random] = None,
                   step_limit: int = DEFAULT_STEP_LIMIT,
                   occurrence_cap: int = DEFAULT_OCCURRENCE_CAP,
                   phase: str = "conc_1",
                   tree_out: Optional[list] = None) -> ConcolicOutcome:
    """One engine invocation: trace all seeds, then walk the frontier.

    `sink` receives each emitted test (with its replay-verified on-target
    flag) as soon as the solver produces it, enabling mid-phase detection;
    returning False stops the phase.  The phase ends when the frontier is
    done or the budget expires; budget overrun is at most one solver call.
    """
    rng = rng or random.Random(0)
    outcome = ConcolicOutcome()
    start = clock.now()

    def over_budget() -> bool:
        return clock.now() - start > time_budget

    tree = ExecutionTree()
    for seed in seeds:
        if over_budget():
            outcome.budget_exhausted = True
            return outcome
        result = shadow_execute(design, seed, step_limit, clock)
        tree.grow(result.records, seed.words)
        outcome.seeds_traced += 1
    if tree_out is not None:
        tree_out.append(tree)

    targets = frontier(tree, edge_hits, occurrence_cap)
    if not targets:
        return outcome
    per_call = max(time_budget / len(targets), MIN_DEADLINE_SECONDS)

    for target in targets:
        if over_budget():
            outcome.budget_exhausted = True
            break
        predicate = build_predicate(target)
        remaining = time_budget - (clock.now() - start)
        verdict: SolverVerdict = solve(
            predicate, base=target.node.witness,
            deadline=max(min(per_call, remaining), MIN_DEADLINE_SECONDS),
            rng=rng, clock=clock)
        if verdict.status == "unsat":
            outcome.unsat += 1
            continue
        if verdict.status == "unknown":
            outcome.unknown += 1
            continue
        outcome.sat += 1
        test = TestCase(words=emission_words(target.node.witness, verdict.model),
                        origin=ORIGIN_CONCOLIC, phase=phase)
        trace = execute(design, test, step_limit, clock)
        depth = len(predicate.conjuncts)
        on_target = (len(trace.decisions) >= depth
                     and trace.decisions[depth - 1]
                     == (target.node.branch_id, target.missing))
        outcome.tests_emitted += 1
        if on_target:
            outcome.emissions_on_target += 1
        if not sink(test, on_target):
            outcome.stopped_by_sink = True
            break
    return outcome
