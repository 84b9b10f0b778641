"""Shared fixtures: JIT warmup, seeded RNG, acceptance reporting."""

import numpy as np
import pytest

import shapecore as sc

_ACCEPTANCE_RESULTS = []


class CriterionLog:
    """Collects acceptance pass/fail lines for the end-of-run summary."""

    def check(self, name, ok, detail=""):
        _ACCEPTANCE_RESULTS.append((name, "PASS" if ok else "FAIL", detail))
        assert ok, f"{name}: {detail}"

    def skip(self, name, reason):
        _ACCEPTANCE_RESULTS.append((name, "SKIP", reason))
        pytest.skip(reason)


@pytest.fixture(scope="session")
def criterion():
    return CriterionLog()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in _ACCEPTANCE_RESULTS:
        suffix = f"  ({detail})" if detail else ""
        terminalreporter.write_line(f"{status:>4}  {name}{suffix}")


@pytest.fixture(scope="session", autouse=True)
def warm_jit():
    """Compile every jitted kernel once so timed tests measure work only."""
    vol = sc.synth_mask("box", (3, 3, 3), lo=(1, 1, 1), hi=(1, 1, 1))
    sc.extract_features(vol, sc.resolve_backend("sequential"))
    sc.extract_features(vol, sc.resolve_backend("parallel"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def single_voxel():
    return sc.synth_mask("box", (3, 3, 3), lo=(1, 1, 1), hi=(1, 1, 1))


def random_mask(rng, max_dim=20):
    """Random blob-or-noise mask with a guaranteed occupied voxel and a
    clear border, used by equivalence and parity tests."""
    dims = tuple(int(d) for d in rng.integers(6, max_dim + 1, size=3))
    nx, ny, nz = dims
    arr = np.zeros((nz, ny, nx), dtype=np.uint8)
    if rng.random() < 0.5:
        arr[1:-1, 1:-1, 1:-1] = (rng.random((nz - 2, ny - 2, nx - 2)) < 0.45).astype(np.uint8)
    else:
        zz, yy, xx = np.meshgrid(
            np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij"
        )
        for _ in range(int(rng.integers(1, 4))):
            cx = rng.uniform(2, nx - 3)
            cy = rng.uniform(2, ny - 3)
            cz = rng.uniform(2, nz - 3)
            r = rng.uniform(1.0, min(dims) / 2.0 - 1.5)
            inside = (xx - cx) ** 2 + (yy - cy) ** 2 + (zz - cz) ** 2 <= r * r
            arr[1:-1, 1:-1, 1:-1] |= inside[1:-1, 1:-1, 1:-1].astype(np.uint8)
    if not arr.any():
        arr[nz // 2, ny // 2, nx // 2] = 1
    return sc.MaskVolume(dims=dims, spacing=(1.0, 1.0, 1.0), data=arr.reshape(-1))
