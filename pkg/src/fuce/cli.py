"""Command-line surface.

`fuce run` drives one campaign on a design/golden pair; `fuce bench` runs
the built-in corpus across engine modes and emits comparison tables.
Exit codes: 0 completed (whatever the verdict), 2 bad invocation, 3 I/O
failure.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from .campaign import (GOAL_COVERAGE, GOAL_DETECT, CampaignConfig,
                       generate_seeds, run_campaign, run_benchmark)
from .clock import DEFAULT_TICKS_PER_SECOND
from .corpus import builtin_suite, export_designs
from .detector import GoldenModel, load_golden_table
from .dsl import ParseError, SemanticError, parse_design
from .report import (ReportIOError, build_comparison, comparison_csv,
                     comparison_text, emit_report, report_to_dict)
from .testcase import load_seed_dir, save_queue

_MODE_FLAGS = {"fuce": "fuce", "fuzz": "fuzz-only", "concolic": "concolic-only"}

DEFAULT_TIME_CUTOFF = 7200.0
DEFAULT_TIME_THRESHOLD = 5.0
DEFAULT_TIME_BUDGET = 1800.0


class CliError(Exception):
    pass


def _add_common_timing(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--time-cutoff", type=float, default=DEFAULT_TIME_CUTOFF,
                        help="campaign wall-time limit in seconds")
    parser.add_argument("--time-threshold", type=float,
                        default=DEFAULT_TIME_THRESHOLD,
                        help="stagnation seconds before switching to concolic")
    parser.add_argument("--time-budget", type=float, default=None,
                        help="concolic phase budget in seconds "
                             "(default: min(1800, cutoff))")
    parser.add_argument("--seed", type=int, default=0, help="campaign rng seed")
    parser.add_argument("--virtual-clock", action="store_true",
                        help="deterministic work-tick clock instead of wall time")
    parser.add_argument("--ticks-per-second", type=int,
                        default=DEFAULT_TICKS_PER_SECOND,
                        help="virtual-clock resolution")
    parser.add_argument("--step-limit", type=int, default=1_000_000,
                        help="interpreter steps per execution")
    parser.add_argument("--no-harvest", action="store_true",
                        help="vanilla interesting-value table (no design literals)")


def _resolve_budget(args) -> float:
    if args.time_budget is not None:
        return args.time_budget
    return min(DEFAULT_TIME_BUDGET, args.time_cutoff)


def _build_config(args, mode: str, goal: str) -> CampaignConfig:
    try:
        return CampaignConfig(
            time_cutoff=args.time_cutoff,
            time_threshold=args.time_threshold,
            time_budget=_resolve_budget(args),
            rng_seed=args.seed,
            goal=goal,
            mode=mode,
            step_limit=args.step_limit,
            harvest_literals=not args.no_harvest,
            virtual_clock=args.virtual_clock,
            ticks_per_second=args.ticks_per_second,
        )
    except ValueError as err:
        raise CliError(str(err)) from err


def _load_design(path: str):
    try:
        return parse_design(Path(path).read_text())
    except OSError as err:
        raise CliError(f"cannot read design {path}: {err}") from err
    except (ParseError, SemanticError) as err:
        raise CliError(f"{path}: {err}") from err


def _load_golden(path: str) -> GoldenModel:
    if path.endswith(".table"):
        try:
            return load_golden_table(path)
        except (OSError, ValueError, KeyError) as err:
            raise CliError(f"cannot read golden table {path}: {err}") from err
    return GoldenModel(reference=_load_design(path))


def _cmd_run(args) -> int:
    mode = _MODE_FLAGS[args.mode]
    config = _build_config(args, mode, args.goal)
    design = _load_design(args.design)
    golden = None
    if args.goal == GOAL_DETECT:
        if args.golden is None:
            raise CliError("--golden is required for --goal detect")
        golden = _load_golden(args.golden)

    if args.seeds is not None:
        try:
            seeds = load_seed_dir(args.seeds)
        except (OSError, ValueError, FileNotFoundError) as err:
            raise CliError(f"cannot load seeds from {args.seeds}: {err}") from err
    else:
        seed_rng = random.Random(config.rng_seed ^ 0x5EED)
        seeds = generate_seeds(seed_rng, args.auto_seeds, args.seed_words)

    queue_out: list = []
    trees: list = []
    report = run_campaign(design, golden, seeds, config,
                          queue_out=queue_out, tree_dump_out=trees)

    if args.report is not None:
        emit_report(report, args.report, timeline_path=args.timeline)
    elif args.timeline is not None:
        raise CliError("--timeline requires --report")
    if args.queue_out is not None:
        save_queue(queue_out, args.queue_out)
    if args.dump_tree is not None:
        if trees:
            Path(args.dump_tree).write_text(trees[0] + "\n")
        else:
            print(f"note: no concolic phase ran; {args.dump_tree} not written",
                  file=sys.stderr)

    final = (f"{report.design} mode={report.mode} goal={report.goal} "
             f"outcome={report.outcome} coverage={report.branch_coverage_pct:.1f}% "
             f"tests={report.total_tests} t={report.total_seconds:.1f}s")
    print(final)
    return 0


def _cmd_bench(args) -> int:
    if args.export is not None:
        written = export_designs(args.export)
        print(f"exported {len(written)} design files to {args.export}")
        return 0
    if args.report is None:
        raise CliError("bench needs --report <dir> (or --export <dir>)")
    modes = (list(_MODE_FLAGS.values()) if args.mode == "all"
             else [_MODE_FLAGS[args.mode]])
    suite = builtin_suite(faithful=args.faithful)
    out_dir = Path(args.report)
    out_dir.mkdir(parents=True, exist_ok=True)
    docs = []
    for entry in suite:
        for mode in modes:
            if args.goal == GOAL_DETECT and entry.golden is None:
                continue
            config = _build_config(args, mode, args.goal)
            report = run_benchmark(entry, config, seed_count=args.num_seeds)
            doc = emit_report(report, out_dir / f"{entry.name}_{mode}.json")
            docs.append(doc)
            print(f"{entry.name:16s} {mode:14s} outcome={report.outcome:9s} "
                  f"coverage={report.branch_coverage_pct:5.1f}% "
                  f"t={report.total_seconds:.1f}s")
    table = build_comparison(docs)
    (out_dir / "comparison.csv").write_text(comparison_csv(table))
    (out_dir / "comparison.txt").write_text(comparison_text(table))
    print(comparison_text(table))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuce",
        description="Hybrid fuzzing + concolic test generation for "
                    "trojan detection in small hardware designs")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one campaign")
    run.add_argument("--design", required=True, help="DUT .fd file")
    run.add_argument("--golden", help="golden model: .fd design or .table")
    run.add_argument("--seeds", help="directory of .tc seed files")
    run.add_argument("--auto-seeds", type=int, default=3,
                     help="generated seed count when --seeds is omitted")
    run.add_argument("--seed-words", type=int, default=4,
                     help="words per generated seed")
    run.add_argument("--mode", choices=sorted(_MODE_FLAGS), default="fuce")
    run.add_argument("--goal", choices=[GOAL_DETECT, GOAL_COVERAGE],
                     default=GOAL_DETECT)
    run.add_argument("--report", help="write the campaign report JSON here")
    run.add_argument("--timeline", help="write the coverage timeline CSV here")
    run.add_argument("--queue-out", help="persist the final queue to this dir")
    run.add_argument("--dump-tree",
                     help="write the last execution tree as DOT")
    _add_common_timing(run)
    run.set_defaults(func=_cmd_run)

    bench = sub.add_parser("bench", help="run the built-in benchmark corpus")
    bench.add_argument("--suite", choices=["builtin"], default="builtin")
    bench.add_argument("--mode", choices=sorted(_MODE_FLAGS) + ["all"],
                       default="all")
    bench.add_argument("--goal", choices=[GOAL_DETECT, GOAL_COVERAGE],
                       default=GOAL_DETECT)
    bench.add_argument("--report", help="output directory for reports/tables")
    bench.add_argument("--export", help="write corpus .fd files here and exit")
    bench.add_argument("--faithful", action="store_true",
                       help="full-scale cycle-bomb threshold (2^20 - 1)")
    bench.add_argument("--num-seeds", type=int, default=3,
                       help="seeds per campaign")
    _add_common_timing(bench)
    bench.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ReportIOError as err:
        print(f"io error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
