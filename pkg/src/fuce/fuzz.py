"""Coverage-guided greybox fuzzing: energy, mutation stages, queue.

A queue entry gets one full deterministic pass (bit flips, byte flips,
lane arithmetic, interesting-value substitution) on its first visit, then
an energy-scaled number of havoc trials on every visit.  Children are kept
only when they touch a new (branch-pair, bucket) combination; the queue is
append-only for the whole campaign.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .dsl import Design, harvest_literals
from .executor import (CoverageDelta, CoverageMap, ExecutionTrace,
                       coverage_of, execute, merge_coverage)
from .testcase import (ORIGIN_DETERMINISTIC, ORIGIN_HAVOC, TestCase)

# Boundary constants a magic-value comparison is likely to sit on.
INTERESTING_VALUES = (
    0, 1, 2 ** 7 - 1, 2 ** 7, 2 ** 8 - 1, 2 ** 15 - 1, 2 ** 15,
    2 ** 16 - 1, 2 ** 20 - 1, 2 ** 31 - 1, 2 ** 32 - 1,
)

DEFAULT_K_BASE = 64
DEFAULT_K_MAX = 1024
DEFAULT_MAX_WORDS = 4096

_ARITH_DELTAS = (1, 4, 16, 32)
_HAVOC_OPS = ("bit_flip", "byte_set", "word_set", "delete", "clone", "swap")


@dataclass
class SeedMetrics:
    exec_time_steps: int
    bitmap_size: int  # branch-pair keys covered by the entry's own trace
    depth: int  # derivation depth: seeds 0, children parent + 1


def _clamp(x: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, x))


def calculate_energy(metrics: SeedMetrics, avg_steps: float, avg_bitmap: float,
                     k_base: int = DEFAULT_K_BASE,
                     k_max: int = DEFAULT_K_MAX) -> int:
    """Havoc trials for one entry: fast, well-covering, deep seeds get more."""
    steps = max(1, metrics.exec_time_steps)
    f_speed = _clamp(max(avg_steps, 1.0) / steps, 0.25, 4.0)
    f_cov = _clamp(metrics.bitmap_size / avg_bitmap, 0.25, 4.0) if avg_bitmap > 0 else 1.0
    f_depth = 1.0 + min(metrics.depth, 8) / 8.0
    return int(_clamp(round(k_base * f_speed * f_cov * f_depth), 1, k_max))


# --------------------------------------------------------------------------
# Mutation stages
# --------------------------------------------------------------------------

def interesting_table(design: Optional[Design] = None,
                      harvest: bool = True) -> tuple[int, ...]:
    values = set(INTERESTING_VALUES)
    if design is not None and harvest:
        values.update(harvest_literals(design))
    return tuple(sorted(values))


def deterministic_children(words: tuple[int, ...],
                           table: tuple[int, ...] = INTERESTING_VALUES
                           ) -> Iterator[tuple[int, ...]]:
    """The full deterministic stage for one input, in fixed order.

    Single-bit flips, byte flips, +/-{1,4,16,32} on byte, 16-bit and 32-bit
    lanes (wrapping within the lane), then each word substituted with each
    interesting value.  Children identical to the parent are skipped.
    """
    n = len(words)
    for idx in range(n):
        for bit in range(32):
            child = list(words)
            child[idx] ^= 1 << bit
            yield tuple(child)
    for idx in range(n):
        for lane in range(4):
            child = list(words)
            child[idx] ^= 0xFF << (8 * lane)
            yield tuple(child)
    for idx in range(n):
        w = words[idx]
        for lane in range(4):  # byte lanes
            shift = 8 * lane
            byte = (w >> shift) & 0xFF
            for delta in _ARITH_DELTAS:
                for signed in (delta, -delta):
                    nb = (byte + signed) & 0xFF
                    if nb == byte:
                        continue
                    child = list(words)
                    child[idx] = (w & ~(0xFF << shift)) | (nb << shift)
                    yield tuple(child)
        for lane in range(2):  # 16-bit lanes
            shift = 16 * lane
            half = (w >> shift) & 0xFFFF
            for delta in _ARITH_DELTAS:
                for signed in (delta, -delta):
                    nh = (half + signed) & 0xFFFF
                    if nh == half:
                        continue
                    child = list(words)
                    child[idx] = (w & ~(0xFFFF << shift)) | (nh << shift)
                    yield tuple(child)
        for delta in _ARITH_DELTAS:  # full-word lane
            for signed in (delta, -delta):
                nw = (w + signed) & 0xFFFFFFFF
                if nw == w:
                    continue
                child = list(words)
                child[idx] = nw
                yield tuple(child)
    for idx in range(n):
        for value in table:
            if value == words[idx]:
                continue
            child = list(words)
            child[idx] = value
            yield tuple(child)


def mutate_deterministic(test: TestCase,
                         table: tuple[int, ...] = INTERESTING_VALUES,
                         phase: str = "fuzz_1",
                         parent: Optional[int] = None) -> Iterator[TestCase]:
    for words in deterministic_children(test.words, table):
        yield TestCase(words=words, origin=ORIGIN_DETERMINISTIC,
                       phase=phase, parent=parent)


def mutate_havoc(test: TestCase, rng: random.Random,
                 max_words: int = DEFAULT_MAX_WORDS,
                 phase: str = "fuzz_1",
                 parent: Optional[int] = None) -> TestCase:
    """Stack 1-16 random havoc operations on a copy of the input."""
    words = list(test.words)
    for _ in range(rng.randint(1, 16)):
        op = _HAVOC_OPS[rng.randrange(len(_HAVOC_OPS))]
        if op == "bit_flip" and words:
            idx = rng.randrange(len(words))
            words[idx] ^= 1 << rng.randrange(32)
        elif op == "byte_set":
            if words:
                idx = rng.randrange(len(words))
                shift = 8 * rng.randrange(4)
                words[idx] = ((words[idx] & ~(0xFF << shift))
                              | (rng.randrange(256) << shift))
            elif max_words > 0:
                words.append(rng.randrange(256))
        elif op == "word_set":
            if words:
                words[rng.randrange(len(words))] = rng.getrandbits(32)
            elif max_words > 0:
                words.append(rng.getrandbits(32))
        elif op == "delete" and words:
            i = rng.randrange(len(words))
            j = rng.randint(i + 1, len(words))
            del words[i:j]
        elif op == "clone" and words:
            i = rng.randrange(len(words))
            j = rng.randint(i + 1, len(words))
            piece = words[i:j]
            if len(words) + len(piece) <= max_words:
                at = rng.randint(0, len(words))
                words[at:at] = piece
        elif op == "swap" and len(words) >= 2:
            i = rng.randrange(len(words))
            j = rng.randrange(len(words))
            words[i], words[j] = words[j], words[i]
    return TestCase(words=tuple(words), origin=ORIGIN_HAVOC,
                    phase=phase, parent=parent)


# --------------------------------------------------------------------------
# Queue
# --------------------------------------------------------------------------

@dataclass
class QueueEntry:
    id: int
    test: TestCase
    metrics: SeedMetrics
    det_next: int = 0  # resume index into the deterministic stage
    det_done: bool = False


@dataclass
class RoundOutcome:
    executed: int = 0
    retained: int = 0
    stopped_early: bool = False


class FuzzQueue:
    """Append-only interesting-inputs queue with a wrapping cursor."""

    def __init__(self, rng_seed: int, table: tuple[int, ...],
                 max_words: int = DEFAULT_MAX_WORDS):
        self.entries: list[QueueEntry] = []
        self.cursor = 0
        self.rng = random.Random(rng_seed)
        self.table = table
        self.max_words = max_words
        self._sum_steps = 0
        self._sum_bitmap = 0

    def __len__(self) -> int:
        return len(self.entries)

    def append(self, test: TestCase, metrics: SeedMetrics) -> QueueEntry:
        entry = QueueEntry(id=len(self.entries), test=test, metrics=metrics)
        self.entries.append(entry)
        self._sum_steps += metrics.exec_time_steps
        self._sum_bitmap += metrics.bitmap_size
        return entry

    def averages(self) -> tuple[float, float]:
        n = max(len(self.entries), 1)
        return self._sum_steps / n, self._sum_bitmap / n

    def snapshot(self) -> list[TestCase]:
        """Point-in-time copy of the queue's tests, in queue order."""
        return [entry.test for entry in self.entries]

    def current(self) -> QueueEntry:
        return self.entries[self.cursor]

    def advance(self) -> None:
        self.cursor = (self.cursor + 1) % len(self.entries)


def metrics_for(trace: ExecutionTrace, delta: CoverageDelta, depth: int) -> SeedMetrics:
    return SeedMetrics(exec_time_steps=trace.steps_used,
                       bitmap_size=len(delta.pair_counts),
                       depth=depth)


def is_interesting(design: Design, child: TestCase, coverage: CoverageMap,
                   step_limit: int, clock=None
                   ) -> tuple[bool, ExecutionTrace, CoverageDelta]:
    """Execute a child and fold its coverage into the global map.

    Novel means some (branch-pair, bucket) was never seen before; faulting
    children are executable and may still be novel.
    """
    trace = execute(design, child, step_limit, clock)
    delta = coverage_of(trace)
    novel = merge_coverage(coverage, delta)
    return novel, trace, delta


def fuzz_round(design: Design, queue: FuzzQueue, coverage: CoverageMap,
               phase: str, step_limit: int, clock,
               on_retained: Callable[[QueueEntry, ExecutionTrace], None],
               should_stop: Callable[[], bool],
               k_base: int = DEFAULT_K_BASE,
               k_max: int = DEFAULT_K_MAX) -> RoundOutcome:
    """Fuzz one queue entry: finish its deterministic stage, then K havoc
    trials.  `should_stop` is polled after every execution so the campaign
    can switch phases mid-entry; an interrupted deterministic stage resumes
    where it left off on the entry's next visit.
    """
    if not queue.entries:
        raise ValueError("fuzz_round needs a non-empty queue")
    outcome = RoundOutcome()
    entry = queue.current()

    def consider(child: TestCase) -> None:
        novel, trace, delta = is_interesting(design, child, coverage,
                                             step_limit, clock)
        outcome.executed += 1
        if novel:
            metrics = metrics_for(trace, delta, entry.metrics.depth + 1)
            new_entry = queue.append(child, metrics)
            outcome.retained += 1
            on_retained(new_entry, trace)

    if not entry.det_done:
        children = deterministic_children(entry.test.words, queue.table)
        for idx, words in enumerate(children):
            if idx < entry.det_next:
                continue
            consider(TestCase(words=words, origin=ORIGIN_DETERMINISTIC,
                              phase=phase, parent=entry.id))
            entry.det_next = idx + 1
            if should_stop():
                outcome.stopped_early = True
                queue.advance()
                return outcome
        entry.det_done = True

    avg_steps, avg_bitmap = queue.averages()
    energy = calculate_energy(entry.metrics, avg_steps, avg_bitmap, k_base, k_max)
    for _ in range(energy):
        consider(mutate_havoc(entry.test, queue.rng, queue.max_words,
                              phase=phase, parent=entry.id))
        if should_stop():
            outcome.stopped_early = True
            break
    queue.advance()
    return outcome
