"""Marching cubes surface extraction from binary masks.

The mask is zero-padded by one voxel per face so the isosurface closes
around the ROI, then every 2x2x2 cell of voxel centers is classified
against the 256-case table.  Because the data is binary and the iso-level
is 0.5, every surface vertex sits at the exact midpoint of a lattice edge
joining an occupied and an unoccupied voxel; vertices are deduplicated by
the integer identity of that lattice edge, never by coordinate tolerance.

Vertices are stored as a structure of arrays (one contiguous array per
coordinate), which is what the pairwise diameter loops stream over.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .errors import EmptyRoi, IoFailure
from .mc_tables import EDGE_AXIS, EDGE_DX, EDGE_DY, EDGE_DZ, TRI_COUNT, TRI_TABLE
from .volume import MaskVolume


@dataclass(frozen=True)
class TriangleMesh:
    """Deduplicated triangle surface in physical (mm) coordinates.

    xs/ys/zs are parallel per-vertex coordinate arrays; triangles is an
    (n, 3) int32 array of indices into them with consistent outward
    winding.  Immutable and safe to share across threads.
    """

    xs: np.ndarray
    ys: np.ndarray
    zs: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        for arr in (self.xs, self.ys, self.zs, self.triangles):
            arr.flags.writeable = False

    @property
    def vertex_count(self) -> int:
        return int(self.xs.shape[0])

    @property
    def triangle_count(self) -> int:
        return int(self.triangles.shape[0])


def pad_mask(vol: MaskVolume) -> MaskVolume:
    """Add one layer of background voxels on all six faces."""
    nx, ny, nz = vol.dims
    padded = np.zeros((nz + 2, ny + 2, nx + 2), dtype=np.uint8)
    padded[1:-1, 1:-1, 1:-1] = vol.as_3d()
    return MaskVolume(
        dims=(nx + 2, ny + 2, nz + 2),
        spacing=vol.spacing,
        data=padded.reshape(-1),
        label=vol.label,
    )


def marching_cubes(vol: MaskVolume) -> TriangleMesh:
    """Extract the 0.5-iso surface of a binary mask.

    The input is padded internally; vertex coordinates refer to the
    original (unpadded) voxel index grid scaled by spacing.  Output
    ordering is canonical (ascending cell scan, first-reference vertex
    numbering) and therefore identical from run to run.

    Raises EmptyRoi when the mask has no occupied voxels.
    """
    if vol.occupied_count == 0:
        raise EmptyRoi("mask has no occupied voxels")
    padded = pad_mask(vol)
    pnx, pny, pnz = padded.dims
    occ = padded.data

    n_tri = int(_count_triangles(occ, pnx, pny, pnz, TRI_COUNT))
    n_vert = int(_count_crossed_edges(padded.as_3d()))
    sx, sy, sz = vol.spacing
    xs, ys, zs, tris = _emit_mesh(
        occ, pnx, pny, pnz, sx, sy, sz, n_vert, n_tri,
        TRI_TABLE, EDGE_AXIS, EDGE_DX, EDGE_DY, EDGE_DZ,
    )
    return TriangleMesh(xs=xs, ys=ys, zs=zs, triangles=tris)


def _count_crossed_edges(occ3d: np.ndarray) -> int:
    """Count lattice edges joining occupied and unoccupied voxels."""
    return (
        int(np.count_nonzero(occ3d[:, :, 1:] != occ3d[:, :, :-1]))
        + int(np.count_nonzero(occ3d[:, 1:, :] != occ3d[:, :-1, :]))
        + int(np.count_nonzero(occ3d[1:, :, :] != occ3d[:-1, :, :]))
    )


@njit(cache=True)
def _cell_case(occ, p, pnx, pny):
    """Case index of the cell whose origin voxel sits at flat index p.

    Bit i is set when corner i holds background; an all-occupied or
    all-background cell maps to 0 or 255, both of which emit nothing.
    """
    case = 0
    if occ[p] == 0:
        case |= 1
    if occ[p + 1] == 0:
        case |= 2
    if occ[p + 1 + pnx] == 0:
        case |= 4
    if occ[p + pnx] == 0:
        case |= 8
    q = p + pnx * pny
    if occ[q] == 0:
        case |= 16
    if occ[q + 1] == 0:
        case |= 32
    if occ[q + 1 + pnx] == 0:
        case |= 64
    if occ[q + pnx] == 0:
        case |= 128
    return case


@njit(cache=True)
def _count_triangles(occ, pnx, pny, pnz, tri_count):
    total = 0
    for cz in range(pnz - 1):
        for cy in range(pny - 1):
            base = (cz * pny + cy) * pnx
            for cx in range(pnx - 1):
                total += tri_count[_cell_case(occ, base + cx, pnx, pny)]
    return total


@njit(cache=True)
def _emit_mesh(occ, pnx, pny, pnz, sx, sy, sz, n_vert, n_tri,
               tri_table, edge_axis, edge_dx, edge_dy, edge_dz):
    """Single canonical scan emitting deduplicated vertices and triangles.

    vertex_ids maps (axis, lattice point) -> assigned id + 1; 0 marks an
    edge not seen yet.  Ids are handed out at first reference, so the
    output order is a pure function of the mask contents.
    """
    n_points = pnx * pny * pnz
    vertex_ids = np.zeros(3 * n_points, dtype=np.int32)
    xs = np.empty(n_vert, dtype=np.float64)
    ys = np.empty(n_vert, dtype=np.float64)
    zs = np.empty(n_vert, dtype=np.float64)
    tris = np.empty((n_tri, 3), dtype=np.int32)

    next_id = 0
    nt = 0
    for cz in range(pnz - 1):
        for cy in range(pny - 1):
            for cx in range(pnx - 1):
                p = (cz * pny + cy) * pnx + cx
                case = _cell_case(occ, p, pnx, pny)
                if case == 0 or case == 255:
                    continue
                row = tri_table[case]
                t = 0
                while t < 16 and row[t] >= 0:
                    for corner in range(3):
                        e = row[t + corner]
                        axis = edge_axis[e]
                        lx = cx + edge_dx[e]
                        ly = cy + edge_dy[e]
                        lz = cz + edge_dz[e]
                        key = axis * n_points + (lz * pny + ly) * pnx + lx
                        vid = vertex_ids[key]
                        if vid == 0:
                            next_id += 1
                            vertex_ids[key] = next_id
                            vid = next_id
                            # Midpoint of the crossed lattice edge, mapped
                            # back to unpadded indices and scaled to mm.
                            fx = float(lx - 1)
                            fy = float(ly - 1)
                            fz = float(lz - 1)
                            if axis == 0:
                                fx += 0.5
                            elif axis == 1:
                                fy += 0.5
                            else:
                                fz += 0.5
                            xs[vid - 1] = fx * sx
                            ys[vid - 1] = fy * sy
                            zs[vid - 1] = fz * sz
                        tris[nt, corner] = vid - 1
                    nt += 1
                    t += 3
    return xs, ys, zs, tris


def write_off(mesh: TriangleMesh, path) -> None:
    """Dump the mesh as ASCII OFF for external viewers."""
    try:
        with Path(path).open("w", encoding="ascii") as fh:
            fh.write("OFF\n")
            fh.write(f"{mesh.vertex_count} {mesh.triangle_count} 0\n")
            for x, y, z in zip(mesh.xs.tolist(), mesh.ys.tolist(), mesh.zs.tolist()):
                fh.write(f"{x!r} {y!r} {z!r}\n")
            for a, b, c in mesh.triangles.tolist():
                fh.write(f"3 {a} {b} {c}\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def write_stl(mesh: TriangleMesh, path) -> None:
    """Dump the mesh as binary STL for external viewers."""
    tris = mesh.triangles
    a = np.column_stack((mesh.xs[tris[:, 0]], mesh.ys[tris[:, 0]], mesh.zs[tris[:, 0]]))
    b = np.column_stack((mesh.xs[tris[:, 1]], mesh.ys[tris[:, 1]], mesh.zs[tris[:, 1]]))
    c = np.column_stack((mesh.xs[tris[:, 2]], mesh.ys[tris[:, 2]], mesh.zs[tris[:, 2]]))
    normals = np.cross(b - a, c - a)
    lengths = np.linalg.norm(normals, axis=1)
    nonzero = lengths > 0
    normals[nonzero] /= lengths[nonzero, None]
    try:
        with Path(path).open("wb") as fh:
            fh.write(b"\0" * 80)
            fh.write(struct.pack("<I", mesh.triangle_count))
            record = np.empty(
                mesh.triangle_count,
                dtype=[("n", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")],
            )
            record["n"] = normals
            record["v"][:, 0, :] = a
            record["v"][:, 1, :] = b
            record["v"][:, 2, :] = c
            record["attr"] = 0
            fh.write(record.tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def mesh_dump(mesh: TriangleMesh, path) -> None:
    """Write an OFF or STL dump, chosen by file extension."""
    suffix = Path(path).suffix.lower()
    if suffix == ".off":
        write_off(mesh, path)
    elif suffix == ".stl":
        write_stl(mesh, path)
    else:
        raise IoFailure(f"mesh dump wants a .off or .stl path, got {path}")
