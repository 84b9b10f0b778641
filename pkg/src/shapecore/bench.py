"""Benchmark harness: timed runs, speedup tables, and plot data.

Cases run strictly one at a time so parallel-backend timings are not
polluted by sibling runs.  Reported per-case times are medians over the
timed repeats, with relative spread (max-min)/median kept alongside.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from statistics import median
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .dispatch import run_pipeline
from .errors import IoFailure, MissingBaseline, NoCasesFound, NoRecords, ShapeCoreError

RECORD_COLUMNS = (
    "case_id",
    "input_bytes",
    "vertex_count",
    "backend",
    "repeat",
    "file_read_ms",
    "mesh_ms",
    "diameters_ms",
    "total_ms",
)

SPEEDUP_COLUMNS = (
    "case_id",
    "backend",
    "vertex_count",
    "comp_median_ms",
    "comp_spread",
    "total_median_ms",
    "total_spread",
    "comp_speedup",
    "overall_speedup",
)

LOGLOG_COLUMNS = ("vertex_count", "median_total_ms", "backend", "case_id")

_BACKEND_NAMES = {"seq": "sequential", "sequential": "sequential", "par": "parallel", "parallel": "parallel"}


@dataclass(frozen=True)
class BenchRecord:
    """One timed run of one case on one backend.

    error is carried in memory only; a failed case appears in the TSV as
    a row with zero vertex count and zero timings, and the detail stays
    with the caller.
    """

    case_id: str
    input_bytes: int
    vertex_count: int
    backend: str
    repeat_index: int
    file_read_ms: float
    mesh_ms: float
    diameters_ms: float
    total_ms: float
    error: Optional[str] = None


@dataclass(frozen=True)
class SpeedupRow:
    """Per-case, per-backend medians and ratios against the baseline."""

    case_id: str
    backend: str
    vertex_count: int
    comp_median_ms: float
    comp_spread: float
    total_median_ms: float
    total_spread: float
    comp_speedup: float
    overall_speedup: float


@dataclass(frozen=True)
class LogLogRow:
    """One point of plot-ready (size, median time) data."""

    vertex_count: int
    median_total_ms: float
    backend: str
    case_id: str


def _canonical_backends(backends: Sequence[str]) -> List[str]:
    names = []
    for raw in backends:
        name = _BACKEND_NAMES.get(str(raw).strip().lower())
        if name is None:
            raise ValueError(f"unknown backend name: {raw!r}")
        names.append(name)
    if not names:
        raise ValueError("at least one backend is required")
    return names


def list_cases(dataset_dir: str) -> List[Tuple[str, str]]:
    """(case_id, path) pairs for every .npy file, lexicographic order."""
    try:
        entries = sorted(os.listdir(dataset_dir))
    except OSError as exc:
        raise NoCasesFound(f"cannot list dataset dir {dataset_dir!r}: {exc}") from exc
    cases = [
        (name[: -len(".npy")], os.path.join(dataset_dir, name))
        for name in entries
        if name.endswith(".npy")
    ]
    if not cases:
        raise NoCasesFound(f"no .npy masks in {dataset_dir!r}")
    return cases


def bench_run(
    dataset_dir: str,
    spacing: Optional[Sequence[float]] = None,
    backends: Sequence[str] = ("sequential",),
    repeats: int = 5,
    warmups: int = 1,
    workers: Optional[int] = None,
) -> List[BenchRecord]:
    """Time every case on every backend.

    Each (case, backend) pair gets `warmups` discarded runs followed by
    `repeats` recorded ones.  A case that errors (unreadable file, empty
    mask) yields one zeroed record per backend with the error attached,
    and the run continues.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if warmups < 0:
        raise ValueError("warmups must be >= 0")
    names = _canonical_backends(backends)
    records: List[BenchRecord] = []
    for case_id, path in list_cases(dataset_dir):
        try:
            input_bytes = os.path.getsize(path)
        except OSError:
            input_bytes = 0
        for backend in names:
            try:
                for _ in range(warmups):
                    run_pipeline(path, spacing, backend, workers)
                for rep in range(repeats):
                    feats, timings, _sel = run_pipeline(path, spacing, backend, workers)
                    records.append(
                        BenchRecord(
                            case_id=case_id,
                            input_bytes=input_bytes,
                            vertex_count=feats.vertex_count,
                            backend=backend,
                            repeat_index=rep,
                            file_read_ms=timings.file_read_ms,
                            mesh_ms=timings.mesh_ms,
                            diameters_ms=timings.diameters_ms,
                            total_ms=timings.total_ms,
                        )
                    )
            except ShapeCoreError as exc:
                records.append(
                    BenchRecord(
                        case_id=case_id,
                        input_bytes=input_bytes,
                        vertex_count=0,
                        backend=backend,
                        repeat_index=0,
                        file_read_ms=0.0,
                        mesh_ms=0.0,
                        diameters_ms=0.0,
                        total_ms=0.0,
                        error=str(exc),
                    )
                )
    return records


def _usable(records: Sequence[BenchRecord]) -> List[BenchRecord]:
    return [r for r in records if r.error is None and r.total_ms > 0.0]


def _spread(values: Sequence[float]) -> float:
    mid = median(values)
    if mid == 0.0:
        return 0.0
    return (max(values) - min(values)) / mid


def _ratio(base: float, cand: float) -> float:
    if cand == 0.0:
        return math.inf if base > 0.0 else 1.0
    return base / cand


def _group(records: Sequence[BenchRecord]) -> Dict[Tuple[str, str], List[BenchRecord]]:
    groups: Dict[Tuple[str, str], List[BenchRecord]] = {}
    for rec in records:
        groups.setdefault((rec.case_id, rec.backend), []).append(rec)
    return groups


def speedup_table(records: Sequence[BenchRecord], baseline_backend: str = "sequential") -> List[SpeedupRow]:
    """Per-case medians and speedups of every backend over the baseline.

    comp covers mesh_ms + diameters_ms; overall covers total_ms.  The
    baseline backend appears in the output with both ratios at 1.0.
    Raises MissingBaseline when any case lacks baseline records.
    """
    baseline = _BACKEND_NAMES.get(str(baseline_backend).strip().lower())
    if baseline is None:
        raise ValueError(f"unknown backend name: {baseline_backend!r}")
    usable = _usable(records)
    groups = _group(usable)
    case_order: List[str] = []
    backend_order: Dict[str, List[str]] = {}
    for rec in usable:
        if rec.case_id not in backend_order:
            case_order.append(rec.case_id)
            backend_order[rec.case_id] = []
        if rec.backend not in backend_order[rec.case_id]:
            backend_order[rec.case_id].append(rec.backend)

    rows: List[SpeedupRow] = []
    for case_id in case_order:
        base_runs = groups.get((case_id, baseline))
        if not base_runs:
            raise MissingBaseline(f"case {case_id!r} has no {baseline!r} records")
        base_comp = median([r.mesh_ms + r.diameters_ms for r in base_runs])
        base_total = median([r.total_ms for r in base_runs])
        for backend in backend_order[case_id]:
            runs = groups[(case_id, backend)]
            comp_series = [r.mesh_ms + r.diameters_ms for r in runs]
            total_series = [r.total_ms for r in runs]
            comp_med = median(comp_series)
            total_med = median(total_series)
            rows.append(
                SpeedupRow(
                    case_id=case_id,
                    backend=backend,
                    vertex_count=runs[0].vertex_count,
                    comp_median_ms=comp_med,
                    comp_spread=_spread(comp_series),
                    total_median_ms=total_med,
                    total_spread=_spread(total_series),
                    comp_speedup=1.0 if backend == baseline else _ratio(base_comp, comp_med),
                    overall_speedup=1.0 if backend == baseline else _ratio(base_total, total_med),
                )
            )
    return rows


def loglog_rows(records: Sequence[BenchRecord]) -> List[LogLogRow]:
    """Median total per (case, backend), ascending by vertex count."""
    if not records:
        raise NoRecords("no benchmark records")
    usable = _usable(records)
    if not usable:
        raise NoRecords("no successful benchmark records")
    rows = [
        LogLogRow(
            vertex_count=runs[0].vertex_count,
            median_total_ms=median([r.total_ms for r in runs]),
            backend=backend,
            case_id=case_id,
        )
        for (case_id, backend), runs in _group(usable).items()
    ]
    rows.sort(key=lambda r: (r.vertex_count, r.backend, r.case_id))
    return rows


def _cell(value: Union[str, int, float]) -> str:
    if isinstance(value, bool):
        raise TypeError("bool is not a TSV cell type")
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def _row_cells(row: Union[BenchRecord, SpeedupRow, LogLogRow]) -> Tuple[Tuple[str, ...], List[str]]:
    if isinstance(row, BenchRecord):
        return RECORD_COLUMNS, [
            _cell(v)
            for v in (
                row.case_id,
                row.input_bytes,
                row.vertex_count,
                row.backend,
                row.repeat_index,
                row.file_read_ms,
                row.mesh_ms,
                row.diameters_ms,
                row.total_ms,
            )
        ]
    if isinstance(row, SpeedupRow):
        return SPEEDUP_COLUMNS, [
            _cell(v)
            for v in (
                row.case_id,
                row.backend,
                row.vertex_count,
                row.comp_median_ms,
                row.comp_spread,
                row.total_median_ms,
                row.total_spread,
                row.comp_speedup,
                row.overall_speedup,
            )
        ]
    if isinstance(row, LogLogRow):
        return LOGLOG_COLUMNS, [
            _cell(v)
            for v in (row.vertex_count, row.median_total_ms, row.backend, row.case_id)
        ]
    raise TypeError(f"cannot serialize row of type {type(row).__name__}")


def render_tsv(rows: Sequence[Union[BenchRecord, SpeedupRow, LogLogRow]]) -> str:
    """TSV text: header, one line per row, newline-terminated.

    Column order is fixed per row type; floats carry 3 decimal places.
    An empty sequence renders the benchmark-record header alone.
    """
    if rows:
        columns, _ = _row_cells(rows[0])
    else:
        columns = RECORD_COLUMNS
    lines = ["\t".join(columns)]
    for row in rows:
        row_columns, cells = _row_cells(row)
        if row_columns != columns:
            raise TypeError("mixed row types in one TSV")
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def emit_tsv(rows: Sequence[Union[BenchRecord, SpeedupRow, LogLogRow]], path: str) -> None:
    """Write render_tsv(rows) to path."""
    text = render_tsv(rows)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path!r}: {exc}") from exc


def emit_loglog(records: Sequence[BenchRecord], path: str) -> None:
    """Write plot-ready (vertex_count, median total) TSV for records."""
    emit_tsv(loglog_rows(records), path)


def parse_tsv(path: str) -> List[BenchRecord]:
    """Read a benchmark-record TSV back into BenchRecord objects.

    Values round-trip at the emitted 3-decimal precision.  Raises
    IoFailure for unreadable files and ValueError for wrong layout.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [line.rstrip("\n") for line in fh if line.strip()]
    except OSError as exc:
        raise IoFailure(f"cannot read {path!r}: {exc}") from exc
    if not lines:
        raise ValueError(f"{path!r} is empty")
    header = tuple(lines[0].split("\t"))
    if header != RECORD_COLUMNS:
        raise ValueError(f"{path!r} has unexpected columns {header!r}")
    records = []
    for idx, line in enumerate(lines[1:], start=2):
        cells = line.split("\t")
        if len(cells) != len(RECORD_COLUMNS):
            raise ValueError(f"{path!r} line {idx}: expected {len(RECORD_COLUMNS)} cells")
        records.append(
            BenchRecord(
                case_id=cells[0],
                input_bytes=int(cells[1]),
                vertex_count=int(cells[2]),
                backend=cells[3],
                repeat_index=int(cells[4]),
                file_read_ms=float(cells[5]),
                mesh_ms=float(cells[6]),
                diameters_ms=float(cells[7]),
                total_ms=float(cells[8]),
            )
        )
    return records
