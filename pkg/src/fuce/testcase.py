"""Test cases and their on-disk forms.

A test case is a vector of 32-bit words.  Binary form (`.tc`) is raw
little-endian u32; a JSON debug form exists for eyeballing.  Queues persist
as a directory of `.tc` files plus a JSON metrics sidecar per entry.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

ORIGIN_SEED = "seed"
ORIGIN_DETERMINISTIC = "fuzz-deterministic"
ORIGIN_HAVOC = "fuzz-havoc"
ORIGIN_CONCOLIC = "concolic"

_ORIGINS = (ORIGIN_SEED, ORIGIN_DETERMINISTIC, ORIGIN_HAVOC, ORIGIN_CONCOLIC)


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # keep pytest from collecting this as a test class

    words: tuple[int, ...]
    origin: str = ORIGIN_SEED
    phase: str = "fuzz_1"
    parent: Optional[int] = None

    def __post_init__(self):
        if self.origin not in _ORIGINS:
            raise ValueError(f"unknown origin {self.origin!r}")
        for w in self.words:
            if not 0 <= w <= 0xFFFFFFFF:
                raise ValueError(f"word {w} out of 32-bit range")


def save_testcase(test: TestCase, path: str | Path) -> None:
    Path(path).write_bytes(struct.pack(f"<{len(test.words)}I", *test.words))


def load_testcase(path: str | Path, origin: str = ORIGIN_SEED) -> TestCase:
    raw = Path(path).read_bytes()
    if len(raw) % 4 != 0:
        raise ValueError(f"{path}: .tc size {len(raw)} is not a multiple of 4")
    words = struct.unpack(f"<{len(raw) // 4}I", raw)
    return TestCase(words=words, origin=origin)


def testcase_to_json(test: TestCase) -> str:
    return json.dumps({"words": list(test.words)})


def testcase_from_json(text: str, origin: str = ORIGIN_SEED) -> TestCase:
    data = json.loads(text)
    return TestCase(words=tuple(int(w) for w in data["words"]), origin=origin)


def save_queue(entries, directory: str | Path) -> None:
    """Persist queue entries as `id_<n>,src_<origin>,phase_<i>.tc` + sidecars.

    `entries` is an iterable of objects with .test (TestCase) and .metrics
    (SeedMetrics) attributes, in queue order.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for idx, entry in enumerate(entries):
        test = entry.test
        stem = f"id_{idx:06d},src_{test.origin},phase_{test.phase}"
        save_testcase(test, directory / f"{stem}.tc")
        sidecar = {
            "id": idx,
            "origin": test.origin,
            "phase": test.phase,
            "parent": test.parent,
            "exec_time_steps": entry.metrics.exec_time_steps,
            "bitmap_size": entry.metrics.bitmap_size,
            "depth": entry.metrics.depth,
        }
        (directory / f"{stem}.json").write_text(json.dumps(sidecar, indent=2))


def load_seed_dir(directory: str | Path) -> list[TestCase]:
    """Load every `.tc` file in a directory, sorted by filename."""
    directory = Path(directory)
    seeds = []
    for path in sorted(directory.glob("*.tc")):
        seeds.append(load_testcase(path, origin=ORIGIN_SEED))
    if not seeds:
        raise FileNotFoundError(f"no .tc files in {directory}")
    return seeds
