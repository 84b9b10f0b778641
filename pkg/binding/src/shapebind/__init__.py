"""Dictionary-style facade over the shapecore engine.

The engine stays a black box behind its command line: masks travel as
NPY files, results come back as the documented JSON record, and failures
surface through exit codes.  This keeps the facade usable from any host
environment where the engine binary runs, with no shared in-process
state.

Public surface: :func:`execute` and :func:`dump_arrays` plus the
exception types mirroring engine failures.
"""

from __future__ import annotations

import json
import os
import shutil
import subprocess
import sys
import tempfile
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

__all__ = ["execute", "dump_arrays", "EngineError", "InputError", "EmptyRoi", "IoFailure"]

__version__ = "1.0.0"

FEATURE_KEYS = (
    "MeshVolume",
    "SurfaceArea",
    "Maximum3DDiameter",
    "Maximum2DDiameterXY",
    "Maximum2DDiameterXZ",
    "Maximum2DDiameterYZ",
    "VertexCount",
)

_EXIT_INPUT = 2
_EXIT_EMPTY = 3


class EngineError(RuntimeError):
    """The engine process failed."""


class InputError(EngineError):
    """The engine rejected the input file or parameters."""


class EmptyRoi(EngineError):
    """The mask contains no foreground voxels."""


class IoFailure(EngineError):
    """An array dump could not be written."""


def _engine_command() -> List[str]:
    """Command prefix that launches the engine CLI.

    Override with SHAPEBIND_ENGINE (whitespace-split); otherwise the
    `shapecore` executable on PATH, falling back to `python -m shapecore`
    in the current interpreter.
    """
    override = os.environ.get("SHAPEBIND_ENGINE", "").split()
    if override:
        return override
    exe = shutil.which("shapecore")
    if exe:
        return [exe]
    return [sys.executable, "-m", "shapecore"]


def _run_extract(mask_path: str, spacing, backend: str) -> Dict[str, Union[float, int]]:
    cmd = _engine_command() + ["extract", "--mask", mask_path, "--backend", str(backend), "--json"]
    if spacing is not None:
        sx, sy, sz = (float(s) for s in spacing)
        cmd += ["--spacing", f"{sx!r},{sy!r},{sz!r}"]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode == 0:
        record = json.loads(proc.stdout)
        if tuple(record.keys()) != FEATURE_KEYS:
            raise EngineError(f"engine returned unexpected keys: {list(record.keys())}")
        return record
    detail = proc.stderr.strip() or f"exit code {proc.returncode}"
    if proc.returncode == _EXIT_EMPTY:
        raise EmptyRoi(detail)
    if proc.returncode == _EXIT_INPUT:
        raise InputError(detail)
    raise EngineError(detail)


def execute(
    mask: Union[str, os.PathLike, np.ndarray],
    spacing: Optional[Sequence[float]] = None,
    backend: str = "auto",
) -> Dict[str, Union[float, int]]:
    """Extract shape features from a mask file or in-memory 3-D array.

    Returns the engine's feature record: MeshVolume, SurfaceArea,
    Maximum3DDiameter, Maximum2DDiameter{XY,XZ,YZ}, VertexCount.  Values
    equal the engine's JSON output bit for bit.  Arrays cross the
    process boundary through a temporary NPY file, so nonzero voxels
    count as foreground exactly as with a file input.
    """
    if isinstance(mask, np.ndarray):
        if mask.ndim != 3:
            raise InputError(f"mask array must be 3-D, got {mask.ndim}-D")
        tmp = tempfile.NamedTemporaryFile(suffix=".npy", delete=False)
        tmp.close()
        try:
            np.save(tmp.name, mask)
            return _run_extract(tmp.name, spacing, backend)
        finally:
            os.unlink(tmp.name)
    return _run_extract(os.fspath(mask), spacing, backend)


def dump_arrays(image: np.ndarray, mask: np.ndarray, out_dir: Union[str, os.PathLike]) -> Tuple[str, str]:
    """Write an (image, mask) pair as NPY files, byte-faithful to the arrays.

    Returns (image_path, mask_path).  The mask file is directly usable
    as engine input; the image rides along untouched for inspection.
    """
    for name, arr in (("image", image), ("mask", mask)):
        if not isinstance(arr, np.ndarray) or arr.ndim != 3:
            raise InputError(f"{name} must be a 3-D array")
    image_path = os.path.join(os.fspath(out_dir), "image.npy")
    mask_path = os.path.join(os.fspath(out_dir), "mask.npy")
    try:
        np.save(image_path, image)
        np.save(mask_path, mask)
    except OSError as exc:
        raise IoFailure(f"cannot write arrays under {out_dir!r}: {exc}") from exc
    return image_path, mask_path
