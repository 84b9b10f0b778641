"""Backend selection and the end-to-end extraction pipeline.

The optimized backend runs on a shared worker pool.  Selection is total:
any request resolves to a usable backend, and when the pool cannot be
used the dispatcher reverts to the sequential path and records why, so
callers can surface the reversion instead of silently losing speed.
"""

from __future__ import annotations

import contextlib
import os
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

import numba
import numpy as np
from numba import njit, prange

from .timing import now_ms
from .volume import attach_spacing, load_npy

FORCE_SEQUENTIAL_ENV = "SHAPECORE_FORCE_SEQUENTIAL"
FALLBACK_UNAVAILABLE = "parallel backend unavailable"

_REQUEST_ALIASES = {
    "auto": "auto",
    "sequential": "sequential",
    "seq": "sequential",
    "parallel": "parallel",
    "par": "parallel",
}


@dataclass(frozen=True)
class BackendSelection:
    """Outcome of backend resolution, with fallback provenance.

    fallback_reason is nonempty exactly when a concrete request could
    not be honored; automatic selection never sets it.
    """

    requested: str
    resolved: str
    worker_count: int = 1
    fallback_reason: Optional[str] = None

    def __post_init__(self) -> None:
        if self.requested not in ("auto", "sequential", "parallel"):
            raise ValueError(f"bad requested backend: {self.requested!r}")
        if self.resolved not in ("sequential", "parallel"):
            raise ValueError(f"bad resolved backend: {self.resolved!r}")
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")
        if self.requested != "auto":
            mismatch = self.resolved != self.requested
            if mismatch != bool(self.fallback_reason):
                raise ValueError("fallback_reason must accompany exactly the non-honored requests")
        elif self.fallback_reason:
            raise ValueError("automatic selection cannot carry a fallback_reason")


def hardware_worker_count() -> int:
    """Workers the parallel pool may use (thread-count cap, >= 1)."""
    return max(1, int(numba.config.NUMBA_NUM_THREADS))


@njit(cache=True, parallel=True)
def _probe_kernel(a):
    s = 0.0
    for i in prange(a.shape[0]):
        s += a[i]
    return s


_POOL_STATE: Optional[bool] = None


def _pool_ready() -> bool:
    # Compiling and running one trivial kernel proves the worker pool can
    # initialize; the verdict is cached for the process lifetime.
    global _POOL_STATE
    if _POOL_STATE is None:
        try:
            _POOL_STATE = float(_probe_kernel(np.ones(4, dtype=np.float64))) == 4.0
        except Exception:
            _POOL_STATE = False
    return _POOL_STATE


def probe_parallel() -> bool:
    """True when the parallel backend is usable right now.

    The environment hook SHAPECORE_FORCE_SEQUENTIAL=1 reports it
    unusable without touching the pool, which is re-checked on every
    call so tests can flip it at runtime.
    """
    if os.environ.get(FORCE_SEQUENTIAL_ENV, "") == "1":
        return False
    return _pool_ready()


def resolve_backend(requested: str = "auto", workers: Optional[int] = None) -> BackendSelection:
    """Map a backend request onto a usable backend.  Never raises.

    auto picks parallel only when the pool works and at least two
    workers are available; an explicit parallel request is honored on
    any worker count as long as the pool initializes.  Unrecognized
    request names select automatically.  workers overrides the pool
    size for the parallel path and is clamped to [1, hardware cap].
    """
    name = _REQUEST_ALIASES.get(str(requested).strip().lower(), "auto")
    cap = hardware_worker_count()
    count = cap if workers is None else min(max(1, int(workers)), cap)

    if name == "sequential":
        return BackendSelection(requested=name, resolved="sequential")
    usable = probe_parallel()
    if name == "parallel":
        if usable:
            return BackendSelection(requested=name, resolved="parallel", worker_count=count)
        return BackendSelection(
            requested=name, resolved="sequential", fallback_reason=FALLBACK_UNAVAILABLE
        )
    if usable and count >= 2:
        return BackendSelection(requested="auto", resolved="parallel", worker_count=count)
    return BackendSelection(requested="auto", resolved="sequential")


@contextlib.contextmanager
def worker_context(workers: Optional[int]) -> Iterator[int]:
    """Pin the pool to `workers` threads for the enclosed block.

    The previous thread count is restored on exit; None keeps the
    current setting.  Requests beyond the hardware cap are clamped.
    """
    if workers is None:
        yield numba.get_num_threads()
        return
    target = min(max(1, int(workers)), hardware_worker_count())
    previous = numba.get_num_threads()
    numba.set_num_threads(target)
    try:
        yield target
    finally:
        numba.set_num_threads(previous)


def run_pipeline(
    mask_path: str,
    spacing: Optional[Sequence[float]] = None,
    requested_backend: str = "auto",
    workers: Optional[int] = None,
    label: Optional[int] = None,
):
    """Load a mask file, resolve a backend, and extract shape features.

    Returns (ShapeFeatures, StageTimings, BackendSelection); total_ms
    spans the whole call including the file read.  Raises the loader
    errors for bad files and EmptyRoi for all-zero masks.
    """
    from .features import extract_features

    t_start = now_ms()
    vol = load_npy(mask_path, binarize_label=label)
    if spacing is not None:
        vol = attach_spacing(vol, spacing)
    t_loaded = now_ms()

    selection = resolve_backend(requested_backend, workers)
    features, timings = extract_features(vol, selection)
    t_end = now_ms()

    timings = timings.with_file_read(
        file_read_ms=t_loaded - t_start, total_ms=t_end - t_start
    )
    return features, timings, selection
