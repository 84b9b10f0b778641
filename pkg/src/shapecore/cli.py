"""Command line interface.

Subcommands: extract (one mask to features), bench (timed dataset runs),
speedup (ratio table from a bench TSV), plotdata (log-log plot points),
synth (deterministic test masks).  Exit codes: 0 success, 2 input error,
3 empty mask, 4 benchmark configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional, Sequence

from .bench import bench_run, BenchRecord, emit_loglog, emit_tsv, parse_tsv, render_tsv, speedup_table
from .dispatch import resolve_backend, run_pipeline
from .errors import EmptyRoi, MissingBaseline, NoCasesFound, ShapeCoreError
from .mesh import marching_cubes, mesh_dump
from .volume import attach_spacing, load_npy, save_npy, synth_mask

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_EMPTY_ROI = 3
EXIT_BENCH_CONFIG = 4

BACKEND_CHOICES = ("auto", "seq", "sequential", "par", "parallel")


def _triple(text: str, cast, flag: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"{flag} needs three comma-separated values, got {text!r}")
    try:
        return tuple(cast(p) for p in parts)
    except ValueError as exc:
        raise ValueError(f"{flag}: {exc}") from exc


def _backend_list(text: str) -> List[str]:
    names = [p.strip() for p in text.split(",") if p.strip()]
    if not names:
        raise ValueError("--backends needs at least one name")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shapecore",
        description="Shape features (volume, area, diameters) from binary NPY masks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ex = sub.add_parser("extract", help="extract shape features from one mask")
    p_ex.add_argument("--mask", required=True, help="NPY mask file")
    p_ex.add_argument("--spacing", default=None, help="voxel size as sx,sy,sz in mm")
    p_ex.add_argument("--backend", default="auto", choices=BACKEND_CHOICES)
    p_ex.add_argument("--workers", type=int, default=None, help="parallel worker count")
    p_ex.add_argument("--label", type=int, default=None, help="treat only this voxel value as foreground")
    fmt = p_ex.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="print the feature record as JSON")
    fmt.add_argument("--tsv", action="store_true", help="print a one-row benchmark TSV")
    p_ex.add_argument("--dump-mesh", default=None, metavar="F.off", help="also write the mesh (.off or .stl)")

    p_be = sub.add_parser("bench", help="time every mask in a dataset directory")
    p_be.add_argument("--dataset", required=True, help="directory of NPY masks")
    p_be.add_argument("--spacing", default=None, help="voxel size as sx,sy,sz in mm")
    p_be.add_argument("--backends", type=_backend_list, default=["sequential"], help="comma-separated, e.g. seq,par")
    p_be.add_argument("--repeats", type=int, default=5)
    p_be.add_argument("--warmups", type=int, default=1)
    p_be.add_argument("--workers", type=int, default=None)
    p_be.add_argument("--out", required=True, help="output TSV path")

    p_sp = sub.add_parser("speedup", help="per-case speedup table from a bench TSV")
    p_sp.add_argument("--in", dest="in_path", required=True, help="bench TSV")
    p_sp.add_argument("--baseline", default="sequential", choices=("seq", "sequential", "par", "parallel"))
    p_sp.add_argument("--out", required=True)

    p_pl = sub.add_parser("plotdata", help="log-log plot points from a bench TSV")
    p_pl.add_argument("--in", dest="in_path", required=True, help="bench TSV")
    p_pl.add_argument("--out", required=True)

    p_sy = sub.add_parser("synth", help="write a synthetic mask")
    p_sy.add_argument("kind", choices=("sphere", "box", "ellipsoid"))
    p_sy.add_argument("--dims", required=True, help="grid size as nx,ny,nz")
    p_sy.add_argument("--out", required=True, help="output NPY path")
    p_sy.add_argument("--radius", type=float, default=None, help="sphere radius in voxels")
    p_sy.add_argument("--semi-axes", default=None, help="ellipsoid semi-axes as a,b,c")
    p_sy.add_argument("--center", default=None, help="center as cx,cy,cz (default: grid midpoint)")
    p_sy.add_argument("--lo", default=None, help="box low corner as x,y,z (inclusive)")
    p_sy.add_argument("--hi", default=None, help="box high corner as x,y,z (inclusive)")
    return parser


def _cmd_extract(args) -> int:
    spacing = _triple(args.spacing, float, "--spacing") if args.spacing else None
    features, timings, selection = run_pipeline(
        args.mask, spacing, args.backend, args.workers, label=args.label
    )
    if selection.fallback_reason:
        print(
            f"warning: requested backend {selection.requested!r} not used, "
            f"running {selection.resolved!r}: {selection.fallback_reason}",
            file=sys.stderr,
        )
    if args.json:
        print(json.dumps(features.to_dict()))
    elif args.tsv:
        case_id = os.path.splitext(os.path.basename(args.mask))[0]
        record = BenchRecord(
            case_id=case_id,
            input_bytes=os.path.getsize(args.mask),
            vertex_count=features.vertex_count,
            backend=selection.resolved,
            repeat_index=0,
            file_read_ms=timings.file_read_ms,
            mesh_ms=timings.mesh_ms,
            diameters_ms=timings.diameters_ms,
            total_ms=timings.total_ms,
        )
        sys.stdout.write(render_tsv([record]))
    else:
        for key, value in features.to_dict().items():
            print(f"{key}: {value!r}" if isinstance(value, float) else f"{key}: {value}")
        workers = f" (workers={selection.worker_count})" if selection.resolved == "parallel" else ""
        print(f"Backend: {selection.resolved}{workers}")
        print(
            f"Timings[ms]: file_read={timings.file_read_ms:.3f} "
            f"mesh={timings.mesh_ms:.3f} diameters={timings.diameters_ms:.3f} "
            f"total={timings.total_ms:.3f}"
        )
    if args.dump_mesh:
        vol = load_npy(args.mask, binarize_label=args.label)
        if spacing is not None:
            vol = attach_spacing(vol, spacing)
        mesh_dump(marching_cubes(vol), args.dump_mesh)
        print(f"mesh written to {args.dump_mesh}", file=sys.stderr)
    return EXIT_OK


def _cmd_bench(args) -> int:
    spacing = _triple(args.spacing, float, "--spacing") if args.spacing else None
    records = bench_run(
        args.dataset,
        spacing=spacing,
        backends=args.backends,
        repeats=args.repeats,
        warmups=args.warmups,
        workers=args.workers,
    )
    emit_tsv(records, args.out)
    failures = [r for r in records if r.error is not None]
    for rec in failures:
        print(f"warning: case {rec.case_id!r} [{rec.backend}] failed: {rec.error}", file=sys.stderr)
    ok = len(records) - len(failures)
    print(f"bench: {ok} records ({len(failures)} failed rows) -> {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_speedup(args) -> int:
    rows = speedup_table(parse_tsv(args.in_path), args.baseline)
    emit_tsv(rows, args.out)
    print(f"speedup: {len(rows)} rows -> {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_plotdata(args) -> int:
    emit_loglog(parse_tsv(args.in_path), args.out)
    print(f"plotdata -> {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_synth(args) -> int:
    dims = _triple(args.dims, int, "--dims")
    kwargs = {}
    if args.radius is not None:
        kwargs["radius"] = args.radius
    if args.semi_axes:
        kwargs["semi_axes"] = _triple(args.semi_axes, float, "--semi-axes")
    if args.center:
        kwargs["center"] = _triple(args.center, float, "--center")
    if args.lo:
        kwargs["lo"] = _triple(args.lo, int, "--lo")
    if args.hi:
        kwargs["hi"] = _triple(args.hi, int, "--hi")
    vol = synth_mask(args.kind, dims, **kwargs)
    save_npy(vol, args.out)
    occupied = int(vol.data.sum())
    print(f"synth: {args.kind} {dims[0]}x{dims[1]}x{dims[2]}, {occupied} voxels -> {args.out}", file=sys.stderr)
    return EXIT_OK


_HANDLERS = {
    "extract": _cmd_extract,
    "bench": _cmd_bench,
    "speedup": _cmd_speedup,
    "plotdata": _cmd_plotdata,
    "synth": _cmd_synth,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handler = _HANDLERS[args.command]
    try:
        return handler(args)
    except EmptyRoi as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_ROI
    except (NoCasesFound, MissingBaseline) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BENCH_CONFIG
    except ShapeCoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BENCH_CONFIG if args.command == "bench" else EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
