"""Binary mask volumes: NPY loading/saving and synthetic test shapes.

Masks travel as plain NPY arrays, so this module carries a small
self-contained parser for NPY versions 1.0 and 2.0 instead of pulling in
the full numpy format machinery.  Spacing is not part of the NPY format
and is attached out of band via :func:`attach_spacing`.
"""

from __future__ import annotations

import ast
import math
import struct
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import (
    IoFailure,
    MalformedHeader,
    NonPositiveSpacing,
    NotThreeDimensional,
    ShapeExceedsBounds,
    TruncatedPayload,
    UnsupportedDtype,
)

NPY_MAGIC = b"\x93NUMPY"

# Element types accepted for mask payloads: 1-byte bool/unsigned, little-endian
# 2/4/8-byte signed integers, little-endian 4/8-byte floats.
SUPPORTED_DESCRS = {
    "|b1": np.bool_,
    "|u1": np.uint8,
    "<i2": np.int16,
    "<i4": np.int32,
    "<i8": np.int64,
    "<f4": np.float32,
    "<f8": np.float64,
}


@dataclass(frozen=True)
class NpyHeader:
    """Parsed NPY preamble."""

    version: Tuple[int, int]
    descr: str
    fortran_order: bool
    shape: Tuple[int, ...]

    @property
    def element_count(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64)) if self.shape else 1


@dataclass(frozen=True)
class MaskVolume:
    """Binary voxel grid with physical spacing.

    dims is (nx, ny, nz); data is a flat uint8 array of 0/1 in C order with
    x fastest-varying, i.e. data[(iz * ny + iy) * nx + ix].  Instances are
    treated as immutable and are safe to share across threads.
    """

    dims: Tuple[int, int, int]
    spacing: Tuple[float, float, float]
    data: np.ndarray
    label: Optional[int] = None

    def __post_init__(self):
        nx, ny, nz = self.dims
        if min(nx, ny, nz) < 1:
            raise ValueError(f"dims must all be >= 1, got {self.dims}")
        if self.data.size != nx * ny * nz:
            raise ValueError(
                f"data length {self.data.size} != nx*ny*nz = {nx * ny * nz}"
            )
        _check_spacing(self.spacing)
        self.data.flags.writeable = False

    @property
    def occupied_count(self) -> int:
        return int(np.count_nonzero(self.data))

    def as_3d(self) -> np.ndarray:
        """View data as a (nz, ny, nx) array."""
        nx, ny, nz = self.dims
        return self.data.reshape(nz, ny, nx)


def _check_spacing(spacing: Sequence[float]) -> Tuple[float, float, float]:
    vals = tuple(float(s) for s in spacing)
    if len(vals) != 3:
        raise NonPositiveSpacing(f"spacing needs 3 components, got {len(vals)}")
    for s in vals:
        if not (s > 0.0) or not math.isfinite(s):
            raise NonPositiveSpacing(f"spacing components must be finite and > 0, got {vals}")
    return vals


def parse_npy_header(fh) -> NpyHeader:
    """Read and validate the NPY preamble from an open binary file."""
    magic = fh.read(6)
    if magic != NPY_MAGIC:
        raise MalformedHeader(f"not an NPY file (magic {magic!r})")
    ver = fh.read(2)
    if len(ver) != 2:
        raise MalformedHeader("file ends inside the version field")
    major, minor = ver[0], ver[1]
    if (major, minor) not in ((1, 0), (2, 0)):
        raise MalformedHeader(f"unsupported NPY version {major}.{minor}")
    len_size = 2 if major == 1 else 4
    raw_len = fh.read(len_size)
    if len(raw_len) != len_size:
        raise MalformedHeader("file ends inside the header-length field")
    (header_len,) = struct.unpack("<H" if major == 1 else "<I", raw_len)
    header = fh.read(header_len)
    if len(header) != header_len:
        raise MalformedHeader("file ends inside the header dict")
    try:
        meta = ast.literal_eval(header.decode("latin1").strip())
    except (ValueError, SyntaxError) as exc:
        raise MalformedHeader(f"unparseable header dict: {exc}") from exc
    if not isinstance(meta, dict) or not {"descr", "fortran_order", "shape"} <= set(meta):
        raise MalformedHeader(f"header dict missing required keys: {meta!r}")
    descr = meta["descr"]
    if not isinstance(descr, str):
        raise UnsupportedDtype(f"structured dtypes are not supported: {descr!r}")
    shape = meta["shape"]
    if not isinstance(shape, tuple) or not all(isinstance(s, int) and s >= 0 for s in shape):
        raise MalformedHeader(f"bad shape entry: {shape!r}")
    if not isinstance(meta["fortran_order"], bool):
        raise MalformedHeader(f"bad fortran_order entry: {meta['fortran_order']!r}")
    return NpyHeader((major, minor), descr, meta["fortran_order"], shape)


def load_npy(path, binarize_label: Optional[int] = None) -> MaskVolume:
    """Load a 3-D NPY mask and binarize it.

    With binarize_label given, voxels equal to that label become 1 and all
    others 0; by default any nonzero voxel becomes 1.  The slowest-varying
    input axis maps to z and the fastest to x, so a file of shape
    (s0, s1, s2) yields dims (nx, ny, nz) = (s2, s1, s0).  Fortran-order
    files are transposed into this canonical order.  Spacing defaults to
    (1, 1, 1) until attach_spacing is called.
    """
    path = Path(path)
    try:
        fh = path.open("rb")
    except OSError as exc:
        raise IoFailure(f"cannot open {path}: {exc}") from exc
    with fh:
        header = parse_npy_header(fh)
        if header.descr not in SUPPORTED_DESCRS:
            raise UnsupportedDtype(f"unsupported element type {header.descr!r}")
        if len(header.shape) != 3:
            raise NotThreeDimensional(
                f"mask must be 3-D, got shape {header.shape}"
            )
        dtype = np.dtype(SUPPORTED_DESCRS[header.descr])
        expected = header.element_count * dtype.itemsize
        payload = fh.read(expected)
        if len(payload) < expected:
            raise TruncatedPayload(
                f"payload holds {len(payload)} bytes, header declares {expected}"
            )
    arr = np.frombuffer(payload, dtype=dtype)
    order = "F" if header.fortran_order else "C"
    arr = arr.reshape(header.shape, order=order)
    if binarize_label is None:
        occ = arr != 0
    else:
        occ = arr == dtype.type(binarize_label)
    data = np.ascontiguousarray(occ, dtype=np.uint8).reshape(-1)
    s0, s1, s2 = header.shape
    return MaskVolume(
        dims=(s2, s1, s0),
        spacing=(1.0, 1.0, 1.0),
        data=data,
        label=binarize_label,
    )


def save_npy(vol: MaskVolume, path) -> None:
    """Write the mask as a version-1.0 NPY file of 1-byte unsigned ints.

    load_npy(save_npy(v)) reproduces v exactly (data bytes and dims).
    """
    nx, ny, nz = vol.dims
    header_dict = "{'descr': '|u1', 'fortran_order': False, 'shape': (%d, %d, %d), }" % (
        nz,
        ny,
        nx,
    )
    # Pad with spaces so magic + version + length + dict is a multiple of 64,
    # with a trailing newline as the final byte.
    base = len(NPY_MAGIC) + 2 + 2
    total = base + len(header_dict) + 1
    pad = (64 - total % 64) % 64
    header = header_dict + " " * pad + "\n"
    try:
        with Path(path).open("wb") as fh:
            fh.write(NPY_MAGIC)
            fh.write(bytes([1, 0]))
            fh.write(struct.pack("<H", len(header)))
            fh.write(header.encode("latin1"))
            fh.write(vol.data.tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def attach_spacing(vol: MaskVolume, spacing: Sequence[float]) -> MaskVolume:
    """Return the volume with physical spacing (mm per axis) set."""
    return replace(vol, spacing=_check_spacing(spacing))


def synth_mask(
    kind: str,
    dims: Tuple[int, int, int],
    *,
    radius: Optional[float] = None,
    semi_axes: Optional[Sequence[float]] = None,
    center: Optional[Sequence[float]] = None,
    lo: Optional[Sequence[int]] = None,
    hi: Optional[Sequence[int]] = None,
) -> MaskVolume:
    """Generate a deterministic synthetic mask.

    kind is one of "sphere" (needs radius), "ellipsoid" (needs semi_axes)
    or "box" (needs lo/hi inclusive index corners).  center defaults to the
    grid midpoint.  A voxel is occupied iff its center (at integer voxel
    coordinates) satisfies the analytic inequality for the shape.  The
    shape must leave at least one voxel of background on every face.
    """
    nx, ny, nz = (int(d) for d in dims)
    if min(nx, ny, nz) < 3:
        raise ShapeExceedsBounds(f"dims {dims} leave no room for a 1-voxel margin")
    if center is None:
        center = ((nx - 1) / 2.0, (ny - 1) / 2.0, (nz - 1) / 2.0)
    cx, cy, cz = (float(c) for c in center)

    iz, iy, ix = np.meshgrid(
        np.arange(nz, dtype=np.float64),
        np.arange(ny, dtype=np.float64),
        np.arange(nx, dtype=np.float64),
        indexing="ij",
    )
    if kind == "sphere":
        if radius is None:
            raise ValueError("sphere needs a radius")
        _check_extent((cx, cy, cz), (radius, radius, radius), (nx, ny, nz))
        occ = (ix - cx) ** 2 + (iy - cy) ** 2 + (iz - cz) ** 2 <= float(radius) ** 2
    elif kind == "ellipsoid":
        if semi_axes is None:
            raise ValueError("ellipsoid needs semi_axes")
        a, b, c = (float(s) for s in semi_axes)
        if min(a, b, c) <= 0:
            raise ValueError(f"semi_axes must be positive, got {semi_axes}")
        _check_extent((cx, cy, cz), (a, b, c), (nx, ny, nz))
        occ = ((ix - cx) / a) ** 2 + ((iy - cy) / b) ** 2 + ((iz - cz) / c) ** 2 <= 1.0
    elif kind == "box":
        if lo is None or hi is None:
            raise ValueError("box needs lo and hi corners")
        lo = tuple(int(v) for v in lo)
        hi = tuple(int(v) for v in hi)
        for axis, (l, h, n) in enumerate(zip(lo, hi, (nx, ny, nz))):
            if l > h:
                raise ValueError(f"box lo {lo} exceeds hi {hi} on axis {axis}")
            if l < 1 or h > n - 2:
                raise ShapeExceedsBounds(
                    f"box [{lo}, {hi}] breaks the 1-voxel margin in dims {dims}"
                )
        occ = (
            (ix >= lo[0]) & (ix <= hi[0])
            & (iy >= lo[1]) & (iy <= hi[1])
            & (iz >= lo[2]) & (iz <= hi[2])
        )
    else:
        raise ValueError(f"unknown shape kind {kind!r}")

    data = np.ascontiguousarray(occ, dtype=np.uint8).reshape(-1)
    return MaskVolume(dims=(nx, ny, nz), spacing=(1.0, 1.0, 1.0), data=data)


def _check_extent(center, reach, dims) -> None:
    """Reject shapes whose occupied voxels would touch the grid boundary."""
    for c, r, n in zip(center, reach, dims):
        if math.ceil(c - r) < 1 or math.floor(c + r) > n - 2:
            raise ShapeExceedsBounds(
                f"extent [{c - r}, {c + r}] breaks the 1-voxel margin in a "
                f"{n}-voxel axis"
            )
