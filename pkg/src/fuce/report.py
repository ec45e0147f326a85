"""Report serialization and cross-mode comparison tables.

Reports are versioned JSON written atomically; the optional timeline CSV
carries the coverage-over-time series for external plotting.  Comparison
tables aggregate one row per (benchmark, mode) cell in a fixed order, as
CSV and as aligned text.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .campaign import CampaignReport

REPORT_SCHEMA = 1

_MODE_ORDER = {"fuce": 0, "fuzz-only": 1, "concolic-only": 2}


class ReportIOError(Exception):
    def __init__(self, path, cause: Exception):
        super().__init__(f"{path}: {cause}")
        self.path = str(path)


def report_to_dict(report: CampaignReport) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "design": report.design,
        "mode": report.mode,
        "goal": report.goal,
        "config": report.config,
        "phases": [{"phase": row.phase,
                    "tests_generated": row.tests_generated,
                    "wall_seconds": row.wall_seconds}
                   for row in report.phases],
        "final": {
            "branch_coverage_pct": report.branch_coverage_pct,
            "incremental_coverage_pct": report.incremental_coverage_pct,
            "detected": report.detected,
            "witness": report.witness,
            "outcome": report.outcome,
            "total_tests": report.total_tests,
            "total_seconds": report.total_seconds,
        },
        "timeline": report.timeline,
        "stats": report.stats,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def emit_report(report: CampaignReport, path: str | Path,
                timeline_path: Optional[str | Path] = None) -> dict:
    """Write the JSON report (and optional timeline CSV) atomically."""
    doc = report_to_dict(report)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        _atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    except OSError as err:
        raise ReportIOError(path, err) from err
    if timeline_path is not None:
        timeline_path = Path(timeline_path)
        try:
            _atomic_write(timeline_path, timeline_csv(report))
        except OSError as err:
            raise ReportIOError(timeline_path, err) from err
    return doc


def timeline_csv(report: CampaignReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["t_seconds", "coverage_pct", "phase"])
    last_t = None
    for t, pct, phase in report.timeline:
        if last_t is not None and t <= last_t:
            continue
        writer.writerow([t, pct, phase])
        last_t = t
    return buf.getvalue()


def load_report(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise ReportIOError(path, err) from err
    if doc.get("schema") != REPORT_SCHEMA:
        raise ValueError(f"{path}: unsupported report schema {doc.get('schema')!r}")
    return doc


@dataclass
class ComparisonTable:
    benchmarks: list[str]
    modes: list[str]
    cells: dict  # (benchmark, mode) -> row dict

    @property
    def rows(self) -> list[dict]:
        out = []
        for bench in self.benchmarks:
            for mode in self.modes:
                cell = self.cells.get((bench, mode))
                if cell is not None:
                    out.append(cell)
        return out


def build_comparison(reports: list[dict]) -> ComparisonTable:
    """One row per (benchmark, mode); duplicates are an error."""
    cells: dict = {}
    for doc in reports:
        key = (doc["design"], doc["mode"])
        if key in cells:
            raise ValueError(f"duplicate report cell for {key}")
        final = doc["final"]
        cells[key] = {
            "benchmark": doc["design"],
            "mode": doc["mode"],
            "tests_generated": final["total_tests"],
            "wall_seconds": final["total_seconds"],
            "coverage_pct": final["branch_coverage_pct"],
            "detected": final["detected"],
            "outcome": final["outcome"],
        }
    benchmarks = sorted({bench for bench, _ in cells})
    modes = sorted({mode for _, mode in cells},
                   key=lambda m: _MODE_ORDER.get(m, 99))
    return ComparisonTable(benchmarks=benchmarks, modes=modes, cells=cells)


def comparison_csv(table: ComparisonTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["benchmark", "mode", "tests_generated", "wall_seconds",
                     "coverage_pct", "detected", "outcome"])
    for bench in table.benchmarks:
        for mode in table.modes:
            cell = table.cells.get((bench, mode))
            if cell is None:
                writer.writerow([bench, mode, "—", "—", "—", "—", "—"])
            else:
                writer.writerow([cell["benchmark"], cell["mode"],
                                 cell["tests_generated"], cell["wall_seconds"],
                                 round(cell["coverage_pct"], 1),
                                 cell["detected"], cell["outcome"]])
    return buf.getvalue()


def comparison_text(table: ComparisonTable) -> str:
    headers = ["benchmark", "mode", "tests", "wall(s)", "cov%", "detected"]
    rows = []
    for bench in table.benchmarks:
        for mode in table.modes:
            cell = table.cells.get((bench, mode))
            if cell is None:
                rows.append([bench, mode, "—", "—", "—", "—"])
            else:
                rows.append([
                    cell["benchmark"], cell["mode"],
                    str(cell["tests_generated"]),
                    f"{cell['wall_seconds']:.1f}",
                    f"{cell['coverage_pct']:.1f}",
                    "yes" if cell["detected"] else ("TO" if cell["outcome"] == "TO"
                                                    else "no"),
                ])
    widths = [max(len(headers[i]), *(len(r[i]) for r in rows)) if rows
              else len(headers[i]) for i in range(len(headers))]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines) + "\n"
