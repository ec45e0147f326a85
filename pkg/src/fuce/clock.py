"""Campaign clocks: real wall time or a deterministic virtual clock.

The virtual clock advances only when work happens (interpreter steps,
solver evaluations), which makes whole campaigns reproducible bit-for-bit
and lets CI run a "120 second" race in a few wall seconds.
"""

from __future__ import annotations

import time

# One virtual second of budget corresponds to this many work ticks.
DEFAULT_TICKS_PER_SECOND = 50_000


class WallClock:
    """Real elapsed time; tick() is a no-op."""

    def __init__(self):
        self._t0 = time.monotonic()

    def now(self) -> float:
        return time.monotonic() - self._t0

    def tick(self, n: int = 1) -> None:
        pass


class VirtualClock:
    """Deterministic clock driven by work ticks."""

    def __init__(self, ticks_per_second: int = DEFAULT_TICKS_PER_SECOND):
        if ticks_per_second <= 0:
            raise ValueError("ticks_per_second must be positive")
        self.ticks_per_second = ticks_per_second
        self.ticks = 0

    def now(self) -> float:
        return self.ticks / self.ticks_per_second

    def tick(self, n: int = 1) -> None:
        self.ticks += n
