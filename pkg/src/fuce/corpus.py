"""Built-in benchmark corpus: trojaned designs with golden counterparts.

Seven entries cover the four trigger/payload classes at desk scale.  Each
entry carries a hand-written trigger test (proof the trojan is detectable)
and a trigger predicate so stealth checks can exclude triggering inputs by
construction.  The controller's cycle bomb defaults to 2^12 - 1 so a full
campaign fits in CI; faithful mode restores the 2^20 - 1 threshold.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

from .detector import GoldenModel
from .dsl import Design, parse_design
from .testcase import TestCase

SEVERITY_BY_TYPE = {"CWOM": "low", "SWOM": "low", "CWM": "high", "SWM": "high"}

DESK_CYCLE_THRESHOLD = 2 ** 12 - 1
FAITHFUL_CYCLE_THRESHOLD = 2 ** 20 - 1
DESK_LIMIT_MASK = 2 ** 13 - 1
FAITHFUL_LIMIT_MASK = 2 ** 21 - 1


@dataclass(frozen=True)
class BenchmarkEntry:
    name: str
    dut: Design
    golden: GoldenModel
    trojan_type: Optional[str]  # CWOM | CWM | SWOM | SWM | None for controls
    severity: Optional[str]
    trigger_note: str
    scale_params: dict
    trigger_test: Optional[TestCase]
    is_trigger: Callable[[tuple], bool]
    seed_words: int

    def __post_init__(self):
        if self.trojan_type is not None:
            expected = SEVERITY_BY_TYPE[self.trojan_type]
            if self.severity != expected:
                raise ValueError(
                    f"{self.name}: {self.trojan_type} must be {expected} severity")


def _design_text(filename: str) -> str:
    return resources.files("fuce.designs").joinpath(filename).read_text()


def _load(filename: str) -> Design:
    return parse_design(_design_text(filename))


def _rescale_controller(text: str, threshold: int, mask: int) -> str:
    out, n = re.subn(r"\b4095\b", str(threshold), text)
    assert n == 1, "expected exactly one threshold literal"
    out, n = re.subn(r"\b8191\b", str(mask), out)
    assert n == 1, "expected exactly one mask literal"
    return out


def _word(words: tuple, idx: int) -> int:
    return words[idx] if idx < len(words) else 0


def _controller_trigger(threshold: int, mask: int) -> Callable[[tuple], bool]:
    def trigger(words: tuple) -> bool:
        return (_word(words, 0) == 23978 and _word(words, 1) == 5678
                and (_word(words, 2) & mask) > threshold)

    return trigger


def _filter_trigger(words: tuple) -> bool:
    x = [_word(words, i) & 65535 for i in range(4)]
    return x[0] + 2 * x[1] + 4 * x[2] + 8 * x[3] == 54439


def _cipher_trigger(words: tuple) -> bool:
    return _word(words, 0) == 0xDEADBEEF


def _sort_pass(vals: list[int]) -> int:
    swaps = 0
    for i, j in ((0, 1), (1, 2), (2, 3), (0, 1), (1, 2), (0, 1)):
        if vals[i] > vals[j]:
            vals[i], vals[j] = vals[j], vals[i]
            swaps += 1
    return swaps


def _sort4_cwom_trigger(words: tuple) -> bool:
    vals = [_word(words, i) for i in range(4)]
    return _sort_pass(vals) == 6 and _word(words, 0) == 109


def _sort4_swm_trigger(words: tuple) -> bool:
    rounds = _word(words, 0) & 15
    cursor = 1
    total = 0
    for _ in range(rounds):
        vals = [_word(words, cursor + k) & 255 for k in range(4)]
        cursor += 4
        total += _sort_pass(vals)
        if total >= 9 and vals[3] == 204:
            return True
    return False


def _codec_trigger(words: tuple) -> bool:
    return (_word(words, 0) & 63) > 37


def _never(words: tuple) -> bool:
    return False


def builtin_suite(faithful: bool = False) -> list[BenchmarkEntry]:
    threshold = FAITHFUL_CYCLE_THRESHOLD if faithful else DESK_CYCLE_THRESHOLD
    mask = FAITHFUL_LIMIT_MASK if faithful else DESK_LIMIT_MASK

    controller_text = _design_text("controller_swm.fd")
    controller_golden_text = _design_text("controller_swm_golden.fd")
    if faithful:
        controller_text = _rescale_controller(controller_text, threshold, mask)
        controller_golden_text = _rescale_controller(
            controller_golden_text, threshold, mask)

    entries = [
        BenchmarkEntry(
            name="controller_swm",
            dut=parse_design(controller_text),
            golden=GoldenModel(reference=parse_design(controller_golden_text)),
            trojan_type="SWM",
            severity="high",
            trigger_note="cycle counter reaches the bomb threshold while the "
                         "guarded loop is running",
            scale_params={"cycle_threshold": threshold, "limit_mask": mask},
            trigger_test=TestCase(words=(23978, 5678, threshold + 105)),
            is_trigger=_controller_trigger(threshold, mask),
            seed_words=4,
        ),
        BenchmarkEntry(
            name="filter_cwom",
            dut=_load("filter_cwom.fd"),
            golden=GoldenModel(reference=_load("filter_cwom_golden.fd")),
            trojan_type="CWOM",
            severity="low",
            trigger_note="sum of products equals one magic value",
            scale_params={},
            trigger_test=TestCase(words=(1111, 2222, 3333, 4444)),
            is_trigger=_filter_trigger,
            seed_words=4,
        ),
        BenchmarkEntry(
            name="cipher_cwom",
            dut=_load("cipher_cwom.fd"),
            golden=GoldenModel(reference=_load("cipher_cwom_golden.fd")),
            trojan_type="CWOM",
            severity="low",
            trigger_note="one rare plaintext word leaks the key and corrupts "
                         "the ciphertext",
            scale_params={},
            trigger_test=TestCase(words=(0xDEADBEEF, 1)),
            is_trigger=_cipher_trigger,
            seed_words=2,
        ),
        BenchmarkEntry(
            name="sort4_cwom",
            dut=_load("sort4_cwom.fd"),
            golden=GoldenModel(reference=_load("sort4_cwom_golden.fd")),
            trojan_type="CWOM",
            severity="low",
            trigger_note="all six compare-swaps fire and the first word is a "
                         "magic byte",
            scale_params={},
            trigger_test=TestCase(words=(109, 90, 80, 70)),
            is_trigger=_sort4_cwom_trigger,
            seed_words=4,
        ),
        BenchmarkEntry(
            name="sort4_swm",
            dut=_load("sort4_swm.fd"),
            golden=GoldenModel(reference=_load("sort4_swm_golden.fd")),
            trojan_type="SWM",
            severity="high",
            trigger_note="swap budget accumulated across rounds overflows while "
                         "a round maximum hits a magic byte; corruption sticks",
            scale_params={},
            trigger_test=TestCase(words=(2, 200, 150, 100, 50, 204, 90, 80, 70)),
            is_trigger=_sort4_swm_trigger,
            seed_words=6,
        ),
        BenchmarkEntry(
            name="codec_swm",
            dut=_load("codec_swm.fd"),
            golden=GoldenModel(reference=_load("codec_swm_golden.fd")),
            trojan_type="SWM",
            severity="high",
            trigger_note="sample counter reaches the bomb value; later codes "
                         "stay corrupted",
            scale_params={"sample_threshold": 37},
            trigger_test=TestCase(words=(40, 200, 100, 50, 25)),
            is_trigger=_codec_trigger,
            seed_words=6,
        ),
        BenchmarkEntry(
            name="control_clean",
            dut=_load("control_clean.fd"),
            golden=GoldenModel(reference=_load("control_clean.fd")),
            trojan_type=None,
            severity=None,
            trigger_note="trojan-free control",
            scale_params={},
            trigger_test=None,
            is_trigger=_never,
            seed_words=4,
        ),
    ]
    return entries


def entry_by_name(name: str, faithful: bool = False) -> BenchmarkEntry:
    for entry in builtin_suite(faithful=faithful):
        if entry.name == name:
            return entry
    raise KeyError(f"no benchmark named {name!r}")


def export_designs(directory: str | Path) -> list[Path]:
    """Write every corpus .fd file into `directory`; returns written paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for item in sorted(resources.files("fuce.designs").iterdir(),
                       key=lambda p: p.name):
        if item.name.endswith(".fd"):
            target = directory / item.name
            target.write_text(item.read_text())
            written.append(target)
    return written
