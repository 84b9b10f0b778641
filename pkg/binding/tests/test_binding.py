"""Facade behavior and byte-level agreement with the engine CLI.

These tests need both packages installed; they drive the engine purely
through its command line, never importing it.
"""

import json
import subprocess

import numpy as np
import pytest

shapebind = pytest.importorskip("shapebind")


def single_voxel_array():
    arr = np.zeros((3, 3, 3), dtype=np.uint8)
    arr[1, 1, 1] = 1
    return arr


def sphere_array(radius=8, dim=24):
    c = (dim - 1) / 2.0
    zz, yy, xx = np.meshgrid(*(np.arange(dim, dtype=np.float64),) * 3, indexing="ij")
    inside = (xx - c) ** 2 + (yy - c) ** 2 + (zz - c) ** 2 <= radius**2
    return inside.astype(np.uint8)


def cli_json(mask_path, spacing=None, backend="auto"):
    cmd = shapebind._engine_command() + ["extract", "--mask", str(mask_path), "--backend", backend, "--json"]
    if spacing is not None:
        cmd += ["--spacing", ",".join(repr(float(s)) for s in spacing)]
    proc = subprocess.run(cmd, capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


@pytest.mark.parametrize("array", [single_voxel_array(), sphere_array()], ids=["voxel", "sphere"])
def test_execute_matches_cli_output(tmp_path, array):
    mask_path = tmp_path / "m.npy"
    np.save(mask_path, array)
    via_cli = cli_json(mask_path, spacing=(1.0, 1.0, 1.0))
    via_binding = shapebind.execute(array, spacing=(1.0, 1.0, 1.0))
    assert list(via_binding.keys()) == list(via_cli.keys())
    assert via_binding == via_cli


def test_single_voxel_values():
    record = shapebind.execute(single_voxel_array(), spacing=(1.0, 1.0, 1.0))
    assert record["VertexCount"] == 6
    assert record["MeshVolume"] == pytest.approx(1.0 / 6.0, abs=1e-9)
    assert record["SurfaceArea"] == pytest.approx(3.0**0.5, abs=1e-9)
    assert record["Maximum3DDiameter"] == 1.0


def test_path_and_array_inputs_agree(tmp_path):
    array = sphere_array(radius=5, dim=16)
    path = tmp_path / "m.npy"
    np.save(path, array)
    assert shapebind.execute(str(path)) == shapebind.execute(array)


def test_spacing_forwarded():
    array = single_voxel_array()
    unit = shapebind.execute(array)
    doubled = shapebind.execute(array, spacing=(2.0, 2.0, 2.0))
    assert doubled["MeshVolume"] == 8.0 * unit["MeshVolume"]
    assert doubled["Maximum3DDiameter"] == 2.0 * unit["Maximum3DDiameter"]


def test_empty_mask_raises():
    with pytest.raises(shapebind.EmptyRoi):
        shapebind.execute(np.zeros((4, 4, 4), dtype=np.uint8))


def test_missing_file_raises(tmp_path):
    with pytest.raises(shapebind.InputError):
        shapebind.execute(str(tmp_path / "absent.npy"))


def test_non_3d_array_rejected():
    with pytest.raises(shapebind.InputError):
        shapebind.execute(np.zeros((4, 4), dtype=np.uint8))


def test_dump_arrays_roundtrip(tmp_path):
    rng = np.random.default_rng(5)
    image = rng.normal(size=(6, 7, 8)).astype(np.float32)
    mask = (rng.random((6, 7, 8)) < 0.4).astype(np.int16)
    image_path, mask_path = shapebind.dump_arrays(image, mask, tmp_path)
    assert np.array_equal(np.load(image_path), image)
    assert np.load(image_path).dtype == image.dtype
    assert np.array_equal(np.load(mask_path), mask)


def test_dumped_mask_feeds_engine(tmp_path):
    image = np.zeros((16, 16, 16), dtype=np.float32)
    mask = sphere_array(radius=5, dim=16)
    _, mask_path = shapebind.dump_arrays(image, mask, tmp_path)
    assert cli_json(mask_path) == shapebind.execute(mask)


def test_dump_arrays_validates_rank(tmp_path):
    with pytest.raises(shapebind.InputError):
        shapebind.dump_arrays(np.zeros((3, 3)), np.zeros((3, 3, 3)), tmp_path)
