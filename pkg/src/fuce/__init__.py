"""Hybrid fuzzing + concolic test generation for trojan detection in a
small hardware-design DSL."""

from .campaign import (CampaignConfig, CampaignReport, PhaseId,
                       generate_seeds, report_coverage, run_benchmark,
                       run_campaign)
from .corpus import BenchmarkEntry, builtin_suite, entry_by_name
from .detector import DetectionVerdict, GoldenModel, check
from .dsl import Design, all_edges, parse_design, pretty_print
from .executor import (CoverageMap, ExecutionTrace, coverage_of, execute,
                       merge_coverage)
from .testcase import TestCase

__version__ = "0.1.0"

__all__ = [
    "BenchmarkEntry", "CampaignConfig", "CampaignReport", "CoverageMap",
    "Design", "DetectionVerdict", "ExecutionTrace", "GoldenModel", "PhaseId",
    "TestCase", "all_edges", "builtin_suite", "check", "coverage_of",
    "entry_by_name", "execute", "generate_seeds", "merge_coverage",
    "parse_design", "pretty_print", "report_coverage", "run_benchmark",
    "run_campaign", "__version__",
]
