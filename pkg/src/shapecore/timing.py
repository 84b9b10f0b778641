"""Per-stage wall-clock timings for one pipeline run."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class StageTimings:
    """Stage durations in milliseconds, from a monotonic clock.

    total_ms covers the whole run (including area/volume computation and
    overheads), so total_ms >= mesh_ms + diameters_ms always holds.
    """

    file_read_ms: float = 0.0
    mesh_ms: float = 0.0
    diameters_ms: float = 0.0
    total_ms: float = 0.0

    def with_file_read(self, file_read_ms: float, total_ms: float) -> "StageTimings":
        return replace(self, file_read_ms=file_read_ms, total_ms=total_ms)


def now_ms() -> float:
    """Monotonic high-resolution timestamp in milliseconds."""
    return time.perf_counter_ns() / 1e6
