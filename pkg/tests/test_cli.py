import subprocess
import sys

import pytest

from evsr import SensorGeometry, io, validate_stream
from evsr.cli import EXIT_DATA, EXIT_OK, EXIT_PIPELINE, EXIT_USAGE, main


@pytest.fixture
def scene(tmp_path):
    path = tmp_path / "hr.csv"
    assert main(["synth", "--size", "16x16", "--velocity", "1,0", "--duration", "5", "--out", str(path)]) == EXIT_OK
    return path


def test_synth_writes_stream(scene):
    s = io.read(scene)
    assert s.geometry == SensorGeometry(16, 16) and s.T == 5000 and len(s) > 0


def test_stats_and_rmse(scene, capsys):
    assert main(["stats", "--in", str(scene)]) == EXIT_OK
    assert "events: " in capsys.readouterr().out
    assert main(["rmse", "--a", str(scene), "--b", str(scene), "--bins", "8"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "metric: rmse" in out and "bins: 8" in out and "value: 0.000000" in out


def test_downsample_and_render(scene, tmp_path):
    lr = tmp_path / "lr.evs"
    assert main(["downsample", "--in", str(scene), "--scale", "2", "--out", str(lr), "--refractory", "50us"]) == EXIT_OK
    assert io.read(lr).geometry == SensorGeometry(8, 8)
    img = tmp_path / "lr.ppm"
    assert main(["render", "--in", str(lr), "--out", str(img), "--mode", "polarity-color"]) == EXIT_OK
    assert io.read_pnm(img).shape == (8, 8, 3)


def test_sr_is_reproducible(scene, tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"sr{k}.evs"
        args = ["sr", "--in", str(scene), "--scale", "2", "--out", str(out), "--iters", "3", "--epochs", "3",
                "--seed", "7", "--dtype", "float64", "--report", str(tmp_path / "r.txt"),
                "--log", str(tmp_path / "log.csv")]
        assert main(args) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    report = io.read_report(tmp_path / "r.txt")
    assert report["scale"] == "2" and report["fallback"] == "none"
    assert io.read(tmp_path / "sr0.evs").geometry == SensorGeometry(32, 32)
    log = (tmp_path / "log.csv").read_text().splitlines()
    assert log[0] == "stage,step,loss,lr" and len(log) == 1 + 3 + 3


def test_pipeline_failure_and_fallback(tmp_path):
    tiny = tmp_path / "tiny.csv"
    io.write(validate_stream([(0, 0, 1, 1), (1, 1, 5, -1)], SensorGeometry(4, 4), 10), tiny)
    out = tmp_path / "o.csv"
    assert main(["sr", "--in", str(tiny), "--scale", "2", "--out", str(out)]) == EXIT_PIPELINE
    assert not out.exists()
    rep = tmp_path / "r.txt"
    assert main(["sr", "--in", str(tiny), "--scale", "2", "--out", str(out), "--fallback", "naive",
                 "--report", str(rep)]) == EXIT_OK
    assert len(io.read(out)) == 8
    assert io.read_report(rep)["fallback"] == "naive"


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["sr", "--in", "x"],
    ["synth", "--size", "16", "--out", "x"],
    ["synth", "--velocity", "99,0", "--out", "x"],
    ["rmse", "--a", "x", "--b", "y", "--bins", "two"],
])
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


def test_data_errors(tmp_path, scene):
    bad = tmp_path / "bad.csv"
    bad.write_text("t_us,x,y,p\n1,1,1,7\n")
    assert main(["stats", "--in", str(bad)]) == EXIT_DATA
    assert main(["stats", "--in", str(tmp_path / "missing.evs")]) == EXIT_DATA
    other = tmp_path / "other.csv"
    io.write(validate_stream([], SensorGeometry(3, 3)), other)
    assert main(["rmse", "--a", str(scene), "--b", str(other)]) == EXIT_DATA
    assert main(["sr", "--in", str(other), "--scale", "2", "--out", str(tmp_path / "o.csv")]) == EXIT_DATA
    assert main(["rmse", "--a", str(scene), "--b", str(scene), "--bins", "0"]) == EXIT_DATA


def test_module_entry_point(scene):
    proc = subprocess.run([sys.executable, "-m", "evsr.cli", "stats", "--in", str(scene)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "L: " in proc.stdout
