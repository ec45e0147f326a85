"""Differential trojan detection against a golden model.

Every candidate test runs on both the design under test and a trusted
reference; any output deviation (value, trace length, or a fault only one
side hits) is flagged with a replayable witness.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .dsl import Design
from .executor import DEFAULT_STEP_LIMIT, ExecutionTrace, execute
from .testcase import TestCase


class GoldenUnavailable(Exception):
    """Table-driven golden model has no entry for the given test."""


@dataclass(frozen=True)
class GoldenModel:
    """Trojan-free reference: either a design or a recorded I/O table."""
    reference: Optional[Design] = None
    table: Optional[dict] = None  # words tuple -> (outputs tuple, fault)

    def __post_init__(self):
        if (self.reference is None) == (self.table is None):
            raise ValueError("golden model needs exactly one of reference/table")

    def run(self, test: TestCase, step_limit: int = DEFAULT_STEP_LIMIT,
            clock=None) -> tuple[tuple, Optional[str]]:
        if self.reference is not None:
            trace = execute(self.reference, test, step_limit, clock)
            return trace.outputs, trace.fault
        try:
            return self.table[test.words]
        except KeyError:
            raise GoldenUnavailable(f"no golden entry for {list(test.words)}") from None


def golden_from_table(entries) -> GoldenModel:
    """Build a table golden from (words, outputs) pairs (fault-free runs)."""
    table = {tuple(words): (tuple(outputs), None) for words, outputs in entries}
    return GoldenModel(table=table)


def load_golden_table(path: str | Path) -> GoldenModel:
    """Read the `.table` JSON form: {"schema": 1, "entries": [[words, outputs], ...]}."""
    data = json.loads(Path(path).read_text())
    if data.get("schema") != 1:
        raise ValueError(f"{path}: unsupported golden table schema")
    return golden_from_table((e[0], e[1]) for e in data["entries"])


def save_golden_table(golden: GoldenModel, path: str | Path) -> None:
    if golden.table is None:
        raise ValueError("only table goldens can be saved")
    entries = [[list(words), list(outputs)]
               for words, (outputs, _fault) in sorted(golden.table.items())]
    Path(path).write_text(json.dumps({"schema": 1, "entries": entries}))


@dataclass(frozen=True)
class DetectionVerdict:
    detected: bool
    test: Optional[TestCase] = None
    divergence_index: Optional[int] = None
    dut_value: Optional[object] = None
    golden_value: Optional[object] = None

    def witness_json(self, dut_trace: ExecutionTrace, golden_outputs: tuple) -> str:
        return json.dumps({
            "test": list(self.test.words) if self.test else None,
            "dut_trace": list(dut_trace.outputs),
            "golden_trace": list(golden_outputs),
            "divergence_index": self.divergence_index,
        })


def check(dut: Design, golden: GoldenModel, test: TestCase,
          step_limit: int = DEFAULT_STEP_LIMIT, clock=None) -> DetectionVerdict:
    """Run both models on `test` and compare output traces position-wise.

    A length mismatch diverges at the first missing position.  Faults are
    part of the comparison: a fault tag present on one side only counts as
    deviation (covers denial-of-service payloads that stall the DUT).
    """
    dut_trace = execute(dut, test, step_limit, clock)
    golden_outputs, golden_fault = golden.run(test, step_limit, clock)

    n = min(len(dut_trace.outputs), len(golden_outputs))
    for i in range(n):
        if dut_trace.outputs[i] != golden_outputs[i]:
            return DetectionVerdict(True, test, i,
                                    dut_trace.outputs[i], golden_outputs[i])
    if len(dut_trace.outputs) != len(golden_outputs):
        longer = dut_trace.outputs if len(dut_trace.outputs) > n else golden_outputs
        is_dut = longer is dut_trace.outputs
        return DetectionVerdict(True, test, n,
                                longer[n] if is_dut else None,
                                None if is_dut else longer[n])
    if dut_trace.fault != golden_fault:
        return DetectionVerdict(True, test, n, dut_trace.fault, golden_fault)
    return DetectionVerdict(False, test)
