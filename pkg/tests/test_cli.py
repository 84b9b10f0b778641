"""Command line surface: outputs, exit codes, end-to-end flows."""

import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

import shapecore as sc
from shapecore.bench import RECORD_COLUMNS
from shapecore.cli import main


@pytest.fixture()
def sphere_file(tmp_path):
    path = tmp_path / "sphere.npy"
    sc.save_npy(sc.synth_mask("sphere", (24, 24, 24), radius=8), str(path))
    return path


def test_extract_json_stdout_is_pure(capsys, sphere_file):
    assert main(["extract", "--mask", str(sphere_file), "--backend", "seq", "--json"]) == 0
    out = capsys.readouterr().out
    record = json.loads(out)
    assert list(record.keys()) == [
        "MeshVolume",
        "SurfaceArea",
        "Maximum3DDiameter",
        "Maximum2DDiameterXY",
        "Maximum2DDiameterXZ",
        "Maximum2DDiameterYZ",
        "VertexCount",
    ]
    feats, _, _ = sc.run_pipeline(str(sphere_file), None, "sequential")
    assert record == feats.to_dict()


def test_extract_default_output(capsys, sphere_file):
    assert main(["extract", "--mask", str(sphere_file), "--backend", "seq"]) == 0
    out = capsys.readouterr().out
    assert "MeshVolume:" in out
    assert "Backend: sequential" in out
    assert "Timings[ms]:" in out


def test_extract_tsv_output(capsys, sphere_file):
    assert main(["extract", "--mask", str(sphere_file), "--backend", "seq", "--tsv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "\t".join(RECORD_COLUMNS)
    cells = lines[1].split("\t")
    assert cells[0] == "sphere"
    assert cells[3] == "sequential"


def test_extract_spacing_applied(capsys, sphere_file):
    assert main(["extract", "--mask", str(sphere_file), "--spacing", "2,2,2", "--json"]) == 0
    doubled = json.loads(capsys.readouterr().out)
    assert main(["extract", "--mask", str(sphere_file), "--json"]) == 0
    unit = json.loads(capsys.readouterr().out)
    assert doubled["MeshVolume"] == 8.0 * unit["MeshVolume"]
    assert doubled["Maximum3DDiameter"] == 2.0 * unit["Maximum3DDiameter"]


def test_extract_dump_mesh(tmp_path, capsys, sphere_file):
    off = tmp_path / "m.off"
    assert main(["extract", "--mask", str(sphere_file), "--json", "--dump-mesh", str(off)]) == 0
    record = json.loads(capsys.readouterr().out)
    lines = off.read_text().splitlines()
    assert lines[0] == "OFF"
    assert int(lines[1].split()[0]) == record["VertexCount"]


def test_extract_missing_file(tmp_path, capsys):
    assert main(["extract", "--mask", str(tmp_path / "no.npy"), "--json"]) == 2
    assert "error:" in capsys.readouterr().err


def test_extract_empty_mask(tmp_path, capsys):
    path = tmp_path / "empty.npy"
    np.save(path, np.zeros((4, 4, 4), dtype=np.uint8))
    assert main(["extract", "--mask", str(path), "--json"]) == 3


def test_extract_bad_spacing(capsys, sphere_file):
    assert main(["extract", "--mask", str(sphere_file), "--spacing", "1,2"]) == 2
    assert main(["extract", "--mask", str(sphere_file), "--spacing", "0,1,1"]) == 2


def test_extract_fallback_warning(monkeypatch, capsys, sphere_file):
    monkeypatch.setenv("SHAPECORE_FORCE_SEQUENTIAL", "1")
    assert main(["extract", "--mask", str(sphere_file), "--backend", "par", "--json"]) == 0
    captured = capsys.readouterr()
    assert "parallel backend unavailable" in captured.err
    json.loads(captured.out)  # stdout still pure JSON


def test_synth_and_label(tmp_path, capsys):
    out = tmp_path / "e.npy"
    assert main(["synth", "ellipsoid", "--dims", "20,22,24", "--semi-axes", "6,7,8", "--out", str(out)]) == 0
    vol = sc.load_npy(str(out))
    assert vol.dims == (20, 22, 24)
    assert vol.occupied_count > 0


def test_synth_margin_violation(tmp_path, capsys):
    out = tmp_path / "bad.npy"
    assert main(["synth", "sphere", "--dims", "10,10,10", "--radius", "6", "--out", str(out)]) == 2


def test_bench_speedup_plotdata_flow(tmp_path, capsys):
    ds = tmp_path / "ds"
    ds.mkdir()
    sc.save_npy(sc.synth_mask("box", (3, 3, 3), lo=(1, 1, 1), hi=(1, 1, 1)), str(ds / "one.npy"))
    sc.save_npy(sc.synth_mask("sphere", (14, 14, 14), radius=4), str(ds / "two.npy"))
    r_tsv = tmp_path / "r.tsv"
    s_tsv = tmp_path / "s.tsv"
    p_tsv = tmp_path / "p.tsv"
    assert main(["bench", "--dataset", str(ds), "--backends", "seq,par",
                 "--repeats", "3", "--warmups", "1", "--out", str(r_tsv)]) == 0
    records = sc.parse_tsv(str(r_tsv))
    assert len(records) == 2 * 2 * 3
    assert main(["speedup", "--in", str(r_tsv), "--baseline", "seq", "--out", str(s_tsv)]) == 0
    s_lines = s_tsv.read_text().splitlines()
    assert s_lines[0].startswith("case_id\tbackend\tvertex_count")
    assert len(s_lines) == 1 + 2 * 2
    assert main(["plotdata", "--in", str(r_tsv), "--out", str(p_tsv)]) == 0
    p_lines = p_tsv.read_text().splitlines()
    assert len(p_lines) == 1 + 2 * 2
    counts = [int(line.split("\t")[0]) for line in p_lines[1:]]
    assert counts == sorted(counts)


def test_bench_empty_dataset(tmp_path, capsys):
    empty = tmp_path / "none"
    empty.mkdir()
    assert main(["bench", "--dataset", str(empty), "--out", str(tmp_path / "r.tsv")]) == 4


def test_bench_bad_config(tmp_path, capsys, sphere_file):
    ds = sphere_file.parent
    assert main(["bench", "--dataset", str(ds), "--repeats", "0", "--out", str(tmp_path / "r.tsv")]) == 4
    assert main(["bench", "--dataset", str(ds), "--backends", "gpu", "--out", str(tmp_path / "r.tsv")]) == 4


def test_speedup_missing_baseline(tmp_path, capsys):
    r_tsv = tmp_path / "r.tsv"
    sc.emit_tsv(
        [sc.BenchRecord("c", 1, 5, "parallel", 0, 0.1, 1.0, 2.0, 3.5)], str(r_tsv)
    )
    out = tmp_path / "s.tsv"
    assert main(["speedup", "--in", str(r_tsv), "--baseline", "seq", "--out", str(out)]) == 4


def test_speedup_malformed_input(tmp_path, capsys):
    bad = tmp_path / "bad.tsv"
    bad.write_text("nope\n")
    assert main(["speedup", "--in", str(bad), "--baseline", "seq", "--out", str(tmp_path / "s.tsv")]) == 2
    assert main(["plotdata", "--in", str(tmp_path / "gone.tsv"), "--out", str(tmp_path / "p.tsv")]) == 2


def test_module_entry_point(tmp_path):
    path = tmp_path / "v.npy"
    sc.save_npy(sc.synth_mask("box", (3, 3, 3), lo=(1, 1, 1), hi=(1, 1, 1)), str(path))
    proc = subprocess.run(
        [sys.executable, "-m", "shapecore", "extract", "--mask", str(path), "--json"],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    record = json.loads(proc.stdout)
    assert record["VertexCount"] == 6


def test_console_script_help():
    exe = shutil.which("shapecore")
    if exe is None:
        pytest.skip("console script not on PATH")
    proc = subprocess.run([exe, "--help"], capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0
    for name in ("extract", "bench", "speedup", "plotdata", "synth"):
        assert name in proc.stdout
