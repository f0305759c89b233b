import shutil
import subprocess

import numpy as np
import pytest

from sbdmwi.cli import main
from sbdmwi.io.formats import read_csv_matrix, read_gridmap
from sbdmwi.io.pipeline import read_keyvalue

CONFIG = """
[setup]
n_antennas = 8
ring_radius = 5 cm
[grid]
side_length = 4.8 cm
n_forward = 24
n_inverse = 12
[phantom]
breast_radius = 2 cm
[tumor]
x = 0.4 cm
y = -0.2 cm
semi_a = 0.6 cm
semi_b = 0.6 cm
[noise]
snr_db = 100
[optimizer]
P = 2
I = 3
B0 = 4
"""


@pytest.fixture
def workdir(tmp_path):
    (tmp_path / "run.ini").write_text(CONFIG)
    assert main(["simulate", "--config", str(tmp_path / "run.ini"), "--out", str(tmp_path / "sim")]) == 0
    return tmp_path


def invert(workdir, out, *extra):
    sim = workdir / "sim"
    args = ["invert", "--config", str(workdir / "run.ini"), "--out", str(workdir / out), *extra]
    return main(args + [str(sim / "meas.txt"), str(sim / "reference.gridmap")])


def test_simulate_outputs(workdir):
    names = sorted(p.name for p in (workdir / "sim").iterdir())
    assert names == ["actual.gridmap", "meas.txt", "reference.gridmap", "truth.txt"]
    assert (workdir / "sim" / "meas.txt").read_text().startswith("meas v1 8 7 1300000000\n")


def test_simulate_same_seed_same_bytes(workdir):
    out = workdir / "again"
    main(["simulate", "--config", str(workdir / "run.ini"), "--out", str(out)])
    for name in ("meas.txt", "reference.gridmap", "actual.gridmap", "truth.txt"):
        assert (out / name).read_bytes() == (workdir / "sim" / name).read_bytes()
    main(["simulate", "--config", str(workdir / "run.ini"), "--out", str(workdir / "s2"), "--seed", "2"])
    assert (workdir / "s2" / "meas.txt").read_bytes() != (workdir / "sim" / "meas.txt").read_bytes()


def test_invert_ea_counts(workdir, capsys):
    assert invert(workdir, "ea", "--method", "ea") == 0
    summary = read_keyvalue(workdir / "ea" / "summary.txt")
    assert summary["full_wave_evaluations"] == "6"
    assert summary["method"] == "ea"
    trace = (workdir / "ea" / "trace.csv").read_text().splitlines()
    assert trace[-1].endswith(",6") and len(trace) == 5
    assert "after 6 full-wave evaluations" in capsys.readouterr().out


def test_invert_sbd_files_and_determinism(workdir):
    assert invert(workdir, "a", "--seed", "7") == 0
    assert invert(workdir, "b", "--seed", "7") == 0
    names = sorted(p.name for p in (workdir / "a").iterdir())
    assert names == ["reconstructed.gridmap", "summary.txt", "trace.csv", "training.csv"]
    for name in ("trace.csv", "reconstructed.gridmap", "training.csv"):
        assert (workdir / "a" / name).read_bytes() == (workdir / "b" / name).read_bytes()
    summary = read_keyvalue(workdir / "a" / "summary.txt")
    assert int(summary["full_wave_evaluations"]) <= 4 + 3


def test_metrics_and_export(workdir, capsys):
    invert(workdir, "inv", "--seed", "1")
    sim, inv = workdir / "sim", workdir / "inv"
    rc = main([
        "metrics", "--out", str(workdir / "met"), str(inv / "reconstructed.gridmap"), str(sim / "reference.gridmap"),
        str(sim / "actual.gridmap"), "--truth", str(sim / "truth.txt"), "--summary", str(inv / "summary.txt"), "--chi", "5 mm",
    ])
    assert rc == 0
    m = read_keyvalue(workdir / "met" / "metrics.txt")
    for key in ("xi_tot", "xi_int", "xi_ext", "zeta", "zeta_centroid", "detected", "full_wave_evaluations", "eta"):
        assert key in m
    assert float(m["chi"]) == pytest.approx(0.005)

    rc = main([
        "metrics", "--out", str(workdir / "self"), str(sim / "actual.gridmap"), str(sim / "reference.gridmap"),
        str(sim / "actual.gridmap"), "--truth", str(sim / "truth.txt"),
    ])
    assert rc == 0
    m = read_keyvalue(workdir / "self" / "metrics.txt")
    assert float(m["xi_tot"]) == float(m["xi_int"]) == float(m["xi_ext"]) == 0.0

    assert main(["export", str(inv / "reconstructed.gridmap"), "--out", str(workdir / "csv")]) == 0
    eps = read_csv_matrix(workdir / "csv" / "reconstructed_eps.csv")
    pmap, _ = read_gridmap(inv / "reconstructed.gridmap")
    assert eps.shape == (12, 12)
    np.testing.assert_array_equal(eps.ravel(), pmap.eps_r)


def test_metrics_rejects_empty_truth(workdir, capsys):
    sim = workdir / "sim"
    rc = main([
        "metrics", "--out", str(workdir / "m"), str(sim / "reference.gridmap"), str(sim / "reference.gridmap"),
        str(sim / "reference.gridmap"), "--truth", str(sim / "truth.txt"),
    ])
    assert rc == 2
    assert "no tumor" in capsys.readouterr().err


def test_header_mismatch_reported(workdir, capsys):
    (workdir / "other.ini").write_text(CONFIG.replace("n_antennas = 8", "n_antennas = 10"))
    sim = workdir / "sim"
    rc = main(["invert", "--config", str(workdir / "other.ini"), str(sim / "meas.txt"), str(sim / "reference.gridmap")])
    assert rc == 2
    assert "views: measurements 8 vs config 10" in capsys.readouterr().err


def test_grid_guard(tmp_path, capsys):
    (tmp_path / "bad.ini").write_text(CONFIG.replace("n_forward = 24", "n_forward = 16"))
    assert main(["simulate", "--config", str(tmp_path / "bad.ini"), "--out", str(tmp_path)]) == 2
    assert "twice as fine" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert main(["export", str(tmp_path / "nope.gridmap")]) == 2


@pytest.mark.skipif(shutil.which("sbdmwi") is None, reason="console script not installed")
def test_console_script():
    out = subprocess.run(["sbdmwi", "--help"], capture_output=True, text=True, check=True)
    for cmd in ("simulate", "invert", "metrics", "export"):
        assert cmd in out.stdout
