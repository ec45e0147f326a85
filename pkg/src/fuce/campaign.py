"""Campaign orchestration: alternate fuzzing and concolic phases.

The loop fuzzes until no interesting input has been retained for
`time_threshold` seconds, hands the whole queue to the concolic engine
under `time_budget`, feeds emissions back (checking each with the
detector), and stops on detection, full branch coverage, or
`time_cutoff`.  The fuzz-only and concolic-only baselines reuse the same
machinery with the switching disabled.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .clock import DEFAULT_TICKS_PER_SECOND, VirtualClock, WallClock
from .concolic import DEFAULT_OCCURRENCE_CAP, concolic_phase, to_dot
from .corpus import BenchmarkEntry
from .detector import GoldenModel, GoldenUnavailable, check
from .dsl import Design
from .executor import (DEFAULT_STEP_LIMIT, CoverageMap, coverage_of, execute,
                       merge_coverage)
from .fuzz import (DEFAULT_K_BASE, DEFAULT_K_MAX, DEFAULT_MAX_WORDS,
                   FuzzQueue, fuzz_round, interesting_table, is_interesting,
                   metrics_for)
from .testcase import ORIGIN_SEED, TestCase

MODE_FUCE = "fuce"
MODE_FUZZ_ONLY = "fuzz-only"
MODE_CONCOLIC_ONLY = "concolic-only"
MODES = (MODE_FUCE, MODE_FUZZ_ONLY, MODE_CONCOLIC_ONLY)

GOAL_DETECT = "detect"
GOAL_COVERAGE = "coverage"
GOALS = (GOAL_DETECT, GOAL_COVERAGE)


@dataclass(frozen=True)
class PhaseId:
    kind: str  # 'fuzz' | 'conc'
    index: int

    @property
    def label(self) -> str:
        return f"{self.kind}_{self.index}"


@dataclass
class CampaignConfig:
    time_cutoff: float = 7200.0
    time_threshold: float = 5.0
    time_budget: float = 1800.0
    rng_seed: int = 0
    goal: str = GOAL_DETECT
    mode: str = MODE_FUCE
    step_limit: int = DEFAULT_STEP_LIMIT
    k_base: int = DEFAULT_K_BASE
    k_max: int = DEFAULT_K_MAX
    max_words: int = DEFAULT_MAX_WORDS
    occurrence_cap: int = DEFAULT_OCCURRENCE_CAP
    harvest_literals: bool = True
    virtual_clock: bool = False
    ticks_per_second: int = DEFAULT_TICKS_PER_SECOND

    def __post_init__(self):
        if not (0 < self.time_threshold < self.time_budget <= self.time_cutoff):
            raise ValueError(
                "need 0 < time_threshold < time_budget <= time_cutoff, got "
                f"{self.time_threshold}/{self.time_budget}/{self.time_cutoff}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.goal not in GOALS:
            raise ValueError(f"unknown goal {self.goal!r}")
        if self.step_limit <= 0:
            raise ValueError("step_limit must be positive")

    def as_dict(self) -> dict:
        return {
            "time_cutoff": self.time_cutoff,
            "time_threshold": self.time_threshold,
            "time_budget": self.time_budget,
            "rng_seed": self.rng_seed,
            "goal": self.goal,
            "mode": self.mode,
            "step_limit": self.step_limit,
            "k_base": self.k_base,
            "k_max": self.k_max,
            "max_words": self.max_words,
            "occurrence_cap": self.occurrence_cap,
            "harvest_literals": self.harvest_literals,
            "virtual_clock": self.virtual_clock,
            "ticks_per_second": self.ticks_per_second,
        }


@dataclass
class PhaseRow:
    phase: str
    tests_generated: int
    wall_seconds: float


@dataclass
class CampaignReport:
    schema: int
    design: str
    mode: str
    goal: str
    config: dict
    phases: list[PhaseRow]
    branch_coverage_pct: float  # ground-truth recomputation from the queue
    incremental_coverage_pct: float  # running CoverageMap view; must agree
    detected: bool
    witness: Optional[dict]
    outcome: str  # 'detected' | 'covered' | 'TO'
    total_tests: int
    total_seconds: float
    timeline: list  # [t_seconds, coverage_pct, phase] samples
    stats: dict


def report_coverage(tests: list[TestCase], design: Design,
                    step_limit: int = DEFAULT_STEP_LIMIT
                    ) -> tuple[float, CoverageMap]:
    """Ground-truth branch coverage: replay a test set on a fresh map."""
    cov = CoverageMap()
    for test in tests:
        merge_coverage(cov, coverage_of(execute(design, test, step_limit)))
    return cov.branch_coverage_pct(design), cov


def generate_seeds(rng: random.Random, count: int, words_per_seed: int
                   ) -> list[TestCase]:
    """Default seed policy: byte-valued words, like small seed files."""
    return [TestCase(words=tuple(rng.randrange(256)
                                 for _ in range(words_per_seed)),
                     origin=ORIGIN_SEED)
            for _ in range(count)]


class _Campaign:
    def __init__(self, design: Design, golden: Optional[GoldenModel],
                 seeds: list[TestCase], config: CampaignConfig):
        if not seeds:
            raise ValueError("campaign needs at least one seed")
        if config.goal == GOAL_DETECT and golden is None:
            raise ValueError("detect goal needs a golden model")
        self.design = design
        self.golden = golden
        self.seeds = seeds
        self.cfg = config
        self.clock = (VirtualClock(config.ticks_per_second)
                      if config.virtual_clock else WallClock())
        master = random.Random(config.rng_seed)
        self.solver_rng = random.Random(master.getrandbits(64))
        self.queue = FuzzQueue(
            rng_seed=master.getrandbits(64),
            table=interesting_table(design, config.harvest_literals),
            max_words=config.max_words)
        self.coverage = CoverageMap()
        self.phase = PhaseId("conc" if config.mode == MODE_CONCOLIC_ONLY
                             else "fuzz", 1)
        self.phase_started = 0.0
        self.phase_tests = 0
        self.phases: list[PhaseRow] = []
        self.last_retained = 0.0
        self.detected = False
        self.witness: Optional[dict] = None
        self.golden_missing = 0
        self.timeline: list = []
        self.stats = {
            "executions": 0,
            "fuzz_retained": 0,
            "concolic_emitted": 0,
            "concolic_on_target": 0,
            "concolic_sat": 0,
            "concolic_unsat": 0,
            "concolic_unknown": 0,
            "concolic_passes": 0,
        }
        self.tree_dump: Optional[str] = None

    # -- helpers ------------------------------------------------------------

    def now(self) -> float:
        return self.clock.now()

    def coverage_pct(self) -> float:
        return self.coverage.branch_coverage_pct(self.design)

    def sample_timeline(self) -> None:
        t = self.now()
        pct = self.coverage_pct()
        if self.timeline and self.timeline[-1][0] == t:
            self.timeline[-1] = [t, max(self.timeline[-1][1], pct),
                                 self.phase.label]
            return
        self.timeline.append([t, pct, self.phase.label])

    def close_phase(self) -> None:
        self.phases.append(PhaseRow(self.phase.label, self.phase_tests,
                                    round(self.now() - self.phase_started, 6)))

    def enter_phase(self, phase: PhaseId) -> None:
        self.close_phase()
        self.phase = phase
        self.phase_started = self.now()
        self.phase_tests = 0
        self.last_retained = self.now()  # reset at phase entry
        self.sample_timeline()

    def run_detector(self, test: TestCase) -> None:
        if self.cfg.goal != GOAL_DETECT or self.detected:
            return
        try:
            verdict = check(self.design, self.golden, test,
                            self.cfg.step_limit, self.clock)
        except GoldenUnavailable:
            self.golden_missing += 1
            return
        if verdict.detected:
            self.detected = True
            self.witness = {
                "test": list(test.words),
                "origin": test.origin,
                "phase": self.phase.label,
                "divergence_index": verdict.divergence_index,
                "dut_value": verdict.dut_value,
                "golden_value": verdict.golden_value,
                "t_seconds": self.now(),
            }

    def goal_reached(self) -> bool:
        if self.detected:
            return True
        return self.cfg.goal == GOAL_COVERAGE and self.coverage_pct() >= 100.0

    def cutoff_reached(self) -> bool:
        return self.now() >= self.cfg.time_cutoff

    def stagnated(self) -> bool:
        return self.now() - self.last_retained > self.cfg.time_threshold

    # -- phases ---------------------------------------------------------------

    def seed_queue(self) -> None:
        for seed in self.seeds:
            test = TestCase(words=seed.words, origin=ORIGIN_SEED,
                            phase=self.phase.label)
            novel, trace, delta = is_interesting(
                self.design, test, self.coverage, self.cfg.step_limit, self.clock)
            self.stats["executions"] += 1
            self.queue.append(test, metrics_for(trace, delta, depth=0))
            self.last_retained = self.now()
            if novel:
                self.sample_timeline()
            self.run_detector(test)
            if self.detected:
                return

    def concolic_sink(self, test: TestCase, on_target: bool) -> bool:
        self.stats["concolic_emitted"] += 1
        if on_target:
            self.stats["concolic_on_target"] += 1
        novel, trace, delta = is_interesting(
            self.design, test, self.coverage, self.cfg.step_limit, self.clock)
        self.stats["executions"] += 1
        # Emissions re-enter the queue when novel or when they reached their
        # targeted edge (the edge can be covered while bucket-novelty is not).
        if novel or on_target:
            self.queue.append(test, metrics_for(trace, delta, depth=0))
            self.phase_tests += 1
            self.last_retained = self.now()
            self.sample_timeline()
        self.run_detector(test)
        return not (self.goal_reached() or self.cutoff_reached())

    def run_concolic(self, budget: float) -> None:
        trees: list = []
        outcome = concolic_phase(
            self.design, self.queue.snapshot(), budget, self.clock,
            self.coverage.edge_hits, sink=self.concolic_sink,
            rng=self.solver_rng, step_limit=self.cfg.step_limit,
            occurrence_cap=self.cfg.occurrence_cap, phase=self.phase.label,
            tree_out=trees)
        self.stats["concolic_passes"] += 1
        self.stats["concolic_sat"] += outcome.sat
        self.stats["concolic_unsat"] += outcome.unsat
        self.stats["concolic_unknown"] += outcome.unknown
        self.stats["executions"] += outcome.seeds_traced + outcome.tests_emitted
        if trees:
            self.tree_dump = to_dot(trees[0])

    def run_fuzz_loop(self) -> None:
        switching = self.cfg.mode == MODE_FUCE

        def should_stop() -> bool:
            if self.goal_reached() or self.cutoff_reached():
                return True
            return switching and self.stagnated()

        def on_retained(entry, trace) -> None:
            self.phase_tests += 1
            self.stats["fuzz_retained"] += 1
            self.last_retained = self.now()
            self.sample_timeline()
            self.run_detector(entry.test)

        while True:
            if self.goal_reached() or self.cutoff_reached():
                return
            if switching and self.stagnated():
                conc_index = self.phase.index
                self.enter_phase(PhaseId("conc", conc_index))
                self.run_concolic(self.cfg.time_budget)
                if self.goal_reached() or self.cutoff_reached():
                    return
                self.enter_phase(PhaseId("fuzz", conc_index + 1))
                continue
            outcome = fuzz_round(
                self.design, self.queue, self.coverage, self.phase.label,
                self.cfg.step_limit, self.clock, on_retained, should_stop,
                self.cfg.k_base, self.cfg.k_max)
            self.stats["executions"] += outcome.executed

    def run_concolic_only_loop(self) -> None:
        # One unbounded concolic loop, re-seeded by its own emissions.
        while not (self.goal_reached() or self.cutoff_reached()):
            self.run_concolic(budget=self.cfg.time_cutoff - self.now())

    # -- entry point ----------------------------------------------------------

    def run(self) -> CampaignReport:
        self.sample_timeline()
        self.seed_queue()
        if not self.goal_reached():
            if self.cfg.mode == MODE_CONCOLIC_ONLY:
                self.run_concolic_only_loop()
            else:
                self.run_fuzz_loop()
        total_seconds = self.now()
        self.close_phase()
        self.sample_timeline()

        incremental = self.coverage_pct()
        ground_truth, _ = report_coverage(self.queue.snapshot(), self.design,
                                          self.cfg.step_limit)
        if self.detected:
            outcome = "detected"
        elif self.cfg.goal == GOAL_COVERAGE and incremental >= 100.0:
            outcome = "covered"
        else:
            outcome = "TO"
        stats = dict(self.stats)
        stats["golden_unavailable"] = self.golden_missing
        stats["queue_entries"] = len(self.queue)
        return CampaignReport(
            schema=1,
            design=self.design.name,
            mode=self.cfg.mode,
            goal=self.cfg.goal,
            config=self.cfg.as_dict(),
            phases=self.phases,
            branch_coverage_pct=ground_truth,
            incremental_coverage_pct=incremental,
            detected=self.detected,
            witness=self.witness,
            outcome=outcome,
            total_tests=len(self.queue),
            total_seconds=round(total_seconds, 6),
            timeline=self.timeline,
            stats=stats,
        )


def run_campaign(design: Design, golden: Optional[GoldenModel],
                 seeds: list[TestCase], config: CampaignConfig,
                 queue_out: Optional[list] = None,
                 tree_dump_out: Optional[list] = None) -> CampaignReport:
    """Run one campaign to completion and assemble its report.

    `queue_out`, when given, receives the final queue entries (for
    persistence); `tree_dump_out` receives the last concolic phase's DOT
    dump when one ran.
    """
    campaign = _Campaign(design, golden, seeds, config)
    report = campaign.run()
    if queue_out is not None:
        queue_out.extend(campaign.queue.entries)
    if tree_dump_out is not None and campaign.tree_dump is not None:
        tree_dump_out.append(campaign.tree_dump)
    return report


def run_benchmark(entry: BenchmarkEntry, config: CampaignConfig,
                  seed_count: int = 3) -> CampaignReport:
    """Convenience wrapper: default seed policy + the entry's golden model."""
    seed_rng = random.Random(config.rng_seed ^ 0x5EED)
    seeds = generate_seeds(seed_rng, seed_count, entry.seed_words)
    golden = entry.golden if config.goal == GOAL_DETECT else None
    return run_campaign(entry.dut, golden, seeds, config)
