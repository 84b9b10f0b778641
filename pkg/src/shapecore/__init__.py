"""shapecore: shape features from binary volumetric masks.

Pipeline: NPY mask in, closed triangle mesh out of Marching Cubes, then
mesh volume, surface area, and maximum 3D/planar diameters, with a
sequential reference backend, a parallel backend that matches it bit for
bit, and a stage-timed benchmark harness.
"""

from .bench import (
    BenchRecord,
    LogLogRow,
    SpeedupRow,
    bench_run,
    emit_loglog,
    emit_tsv,
    parse_tsv,
    render_tsv,
    speedup_table,
)
from .dispatch import (
    BackendSelection,
    hardware_worker_count,
    probe_parallel,
    resolve_backend,
    run_pipeline,
)
from .errors import (
    EmptyRoi,
    IoFailure,
    MalformedHeader,
    MissingBaseline,
    NoCasesFound,
    NonPositiveSpacing,
    NoRecords,
    NotThreeDimensional,
    NoVertices,
    ShapeCoreError,
    ShapeExceedsBounds,
    TruncatedPayload,
    UnsupportedDtype,
)
from .features import (
    ShapeFeatures,
    diameters,
    diameters_parallel,
    extract_features,
    mesh_volume,
    surface_area,
)
from .mesh import TriangleMesh, marching_cubes, mesh_dump, write_off, write_stl
from .timing import StageTimings
from .volume import MaskVolume, attach_spacing, load_npy, save_npy, synth_mask

__version__ = "1.0.0"

__all__ = [
    "BackendSelection",
    "BenchRecord",
    "EmptyRoi",
    "IoFailure",
    "LogLogRow",
    "MalformedHeader",
    "MaskVolume",
    "MissingBaseline",
    "NoCasesFound",
    "NonPositiveSpacing",
    "NoRecords",
    "NotThreeDimensional",
    "NoVertices",
    "ShapeCoreError",
    "ShapeExceedsBounds",
    "ShapeFeatures",
    "SpeedupRow",
    "StageTimings",
    "TriangleMesh",
    "TruncatedPayload",
    "UnsupportedDtype",
    "attach_spacing",
    "bench_run",
    "diameters",
    "diameters_parallel",
    "emit_loglog",
    "emit_tsv",
    "extract_features",
    "hardware_worker_count",
    "load_npy",
    "marching_cubes",
    "mesh_dump",
    "mesh_volume",
    "parse_tsv",
    "probe_parallel",
    "render_tsv",
    "resolve_backend",
    "run_pipeline",
    "save_npy",
    "speedup_table",
    "surface_area",
    "synth_mask",
    "write_off",
    "write_stl",
]
