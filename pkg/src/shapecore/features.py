"""Shape feature computation: mesh volume, surface area, and diameters.

Two diameter backends share one contract: the sequential reference is a
plain pair loop, the parallel one partitions the pair space into balanced
vertex-index strips with thread-private maxima merged by a final max
reduction.  Because max is order-independent and every per-pair squared
distance is computed by the same expression, the two backends agree bit
for bit.  Area and volume use one shared fixed-shape pairwise summation,
so they are backend-independent by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np
from numba import njit, prange

from .dispatch import BackendSelection, resolve_backend, worker_context
from .errors import NoVertices
from .mesh import TriangleMesh, marching_cubes
from .timing import StageTimings, now_ms
from .volume import MaskVolume

FEATURE_KEYS = (
    "MeshVolume",
    "SurfaceArea",
    "Maximum3DDiameter",
    "Maximum2DDiameterXY",
    "Maximum2DDiameterXZ",
    "Maximum2DDiameterYZ",
    "VertexCount",
)


@dataclass(frozen=True)
class ShapeFeatures:
    """The five shape scalars plus the vertex count they were derived from."""

    mesh_volume: float
    surface_area: float
    max_3d_diameter: float
    max_2d_diameter_xy: float
    max_2d_diameter_xz: float
    max_2d_diameter_yz: float
    vertex_count: int

    def to_dict(self) -> Dict[str, Union[float, int]]:
        """Serializable record using the documented key names."""
        return {
            "MeshVolume": self.mesh_volume,
            "SurfaceArea": self.surface_area,
            "Maximum3DDiameter": self.max_3d_diameter,
            "Maximum2DDiameterXY": self.max_2d_diameter_xy,
            "Maximum2DDiameterXZ": self.max_2d_diameter_xz,
            "Maximum2DDiameterYZ": self.max_2d_diameter_yz,
            "VertexCount": self.vertex_count,
        }


def pairwise_sum(values: np.ndarray) -> float:
    """Deterministic balanced-tree summation of a float64 array.

    The array is zero-padded to the next power of two and folded in
    halves, so the reduction tree depends only on the element count.
    Both backends accumulate through this one routine, which removes
    summation order as a source of cross-backend drift.
    """
    n = values.size
    if n == 0:
        return 0.0
    size = 1 << (n - 1).bit_length()
    buf = np.zeros(size, dtype=np.float64)
    buf[:n] = values
    while size > 1:
        size //= 2
        buf = buf[:size] + buf[size : 2 * size]
    return float(buf[0])


def _gather_corners(mesh: TriangleMesh) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    tris = mesh.triangles
    coords = np.column_stack((mesh.xs, mesh.ys, mesh.zs))
    return coords[tris[:, 0]], coords[tris[:, 1]], coords[tris[:, 2]]


def surface_area(mesh: TriangleMesh) -> float:
    """Total triangle area in mm^2; 0.0 for an empty mesh."""
    if mesh.triangle_count == 0:
        return 0.0
    a, b, c = _gather_corners(mesh)
    cross = np.cross(b - a, c - a)
    areas = 0.5 * np.sqrt(np.einsum("ij,ij->i", cross, cross))
    return pairwise_sum(areas)


def mesh_volume(mesh: TriangleMesh) -> float:
    """Enclosed volume in mm^3 of a closed mesh via signed tetrahedra.

    Sums A . (B x C) / 6 per triangle and takes the absolute value once
    at the end; on an outward-wound closed surface the signed sum is
    already positive.
    """
    if mesh.triangle_count == 0:
        return 0.0
    a, b, c = _gather_corners(mesh)
    signed = np.einsum("ij,ij->i", a, np.cross(b, c)) / 6.0
    return abs(pairwise_sum(signed))


def signed_mesh_volume(mesh: TriangleMesh) -> float:
    """Volume without the final absolute value; used to audit winding."""
    if mesh.triangle_count == 0:
        return 0.0
    a, b, c = _gather_corners(mesh)
    return pairwise_sum(np.einsum("ij,ij->i", a, np.cross(b, c)) / 6.0)


@njit(cache=True)
def _diameters_sq_seq(xs, ys, zs):
    """Reference pair loop: squared maxima over all unordered pairs.

    A pair contributes to a planar maximum only when its out-of-plane
    coordinate matches bit for bit; vertices on one lattice plane get
    identical floats from identical midpoint arithmetic, so no tolerance
    is involved.
    """
    n = xs.shape[0]
    m3 = 0.0
    mxy = 0.0
    mxz = 0.0
    myz = 0.0
    for i in range(n - 1):
        xi = xs[i]
        yi = ys[i]
        zi = zs[i]
        for j in range(i + 1, n):
            dx = xs[j] - xi
            dy = ys[j] - yi
            dz = zs[j] - zi
            d = dx * dx + dy * dy + dz * dz
            m3 = max(m3, d)
            mxy = max(mxy, d if zs[j] == zi else 0.0)
            mxz = max(mxz, d if ys[j] == yi else 0.0)
            myz = max(myz, d if xs[j] == xi else 0.0)
    return m3, mxy, mxz, myz


@njit(cache=True, parallel=True)
def _diameters_sq_par(xs, ys, zs):
    """Strip-partitioned pair loop with a final max reduction.

    Strip k covers vertex rows k and n-1-k, so every strip walks the same
    number of pairs and the static schedule stays balanced.  Each worker
    keeps private maxima; the prange reduction merges them at the end.
    """
    n = xs.shape[0]
    m3 = 0.0
    mxy = 0.0
    mxz = 0.0
    myz = 0.0
    half = (n + 1) // 2
    for k in prange(half):
        xi = xs[k]
        yi = ys[k]
        zi = zs[k]
        for j in range(k + 1, n):
            dx = xs[j] - xi
            dy = ys[j] - yi
            dz = zs[j] - zi
            d = dx * dx + dy * dy + dz * dz
            m3 = max(m3, d)
            mxy = max(mxy, d if zs[j] == zi else 0.0)
            mxz = max(mxz, d if ys[j] == yi else 0.0)
            myz = max(myz, d if xs[j] == xi else 0.0)
        i2 = n - 1 - k
        if i2 != k:
            xi = xs[i2]
            yi = ys[i2]
            zi = zs[i2]
            for j in range(i2 + 1, n):
                dx = xs[j] - xi
                dy = ys[j] - yi
                dz = zs[j] - zi
                d = dx * dx + dy * dy + dz * dz
                m3 = max(m3, d)
                mxy = max(mxy, d if zs[j] == zi else 0.0)
                mxz = max(mxz, d if ys[j] == yi else 0.0)
                myz = max(myz, d if xs[j] == xi else 0.0)
    return m3, mxy, mxz, myz


def _as_coord_arrays(xs, ys, zs):
    arrs = tuple(np.ascontiguousarray(a, dtype=np.float64) for a in (xs, ys, zs))
    n = arrs[0].shape[0]
    if n == 0:
        raise NoVertices("diameters need at least one vertex")
    if arrs[1].shape[0] != n or arrs[2].shape[0] != n:
        raise ValueError("coordinate arrays must have equal length")
    return arrs


def diameters(xs, ys, zs) -> Tuple[float, float, float, float]:
    """Sequential (max_3d, xy, xz, yz) diameters in mm.

    Maxima run on squared distances with one square root per output; a
    plane with no coordinate-sharing pair yields 0.0.
    """
    xs, ys, zs = _as_coord_arrays(xs, ys, zs)
    sq = _diameters_sq_seq(xs, ys, zs)
    return tuple(math.sqrt(v) for v in sq)


def diameters_parallel(xs, ys, zs, workers: Optional[int] = None) -> Tuple[float, float, float, float]:
    """Parallel diameters; equals diameters() bit for bit."""
    xs, ys, zs = _as_coord_arrays(xs, ys, zs)
    with worker_context(workers):
        sq = _diameters_sq_par(xs, ys, zs)
    return tuple(math.sqrt(v) for v in sq)


def extract_features(
    vol: MaskVolume, selection: Optional[BackendSelection] = None
) -> Tuple[ShapeFeatures, StageTimings]:
    """Run mesh extraction and all shape features on one mask.

    selection defaults to resolve_backend("auto").  Raises EmptyRoi for
    masks with no occupied voxels.
    """
    if selection is None:
        selection = resolve_backend("auto")
    t_start = now_ms()
    mesh = marching_cubes(vol)
    t_mesh = now_ms()

    volume = mesh_volume(mesh)
    area = surface_area(mesh)

    t_diam_start = now_ms()
    if selection.resolved == "parallel":
        d3, dxy, dxz, dyz = diameters_parallel(
            mesh.xs, mesh.ys, mesh.zs, workers=selection.worker_count
        )
    else:
        d3, dxy, dxz, dyz = diameters(mesh.xs, mesh.ys, mesh.zs)
    t_end = now_ms()

    features = ShapeFeatures(
        mesh_volume=volume,
        surface_area=area,
        max_3d_diameter=d3,
        max_2d_diameter_xy=dxy,
        max_2d_diameter_xz=dxz,
        max_2d_diameter_yz=dyz,
        vertex_count=mesh.vertex_count,
    )
    timings = StageTimings(
        file_read_ms=0.0,
        mesh_ms=t_mesh - t_start,
        diameters_ms=t_end - t_diam_start,
        total_ms=t_end - t_start,
    )
    return features, timings
