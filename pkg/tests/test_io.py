import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbdmwi.em.geometry import Grid, PermittivityMap
from sbdmwi.errors import FormatError, GeometryError
from sbdmwi.io.config import RunConfig, load_config, parse_frequency, parse_length
from sbdmwi.io.formats import (
    export_csv,
    format_gridmap,
    format_meas,
    parse_gridmap,
    parse_meas,
    read_csv_matrix,
)
from sbdmwi.io.pipeline import compute_metrics, invert, read_keyvalue, search_space, simulate, write_simulation
from sbdmwi.objective import MeasurementSet

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.data())
def test_gridmap_round_trip(n, data):
    eps = data.draw(st.lists(st.floats(1.0, 1e6), min_size=n * n, max_size=n * n))
    sig = data.draw(st.lists(st.floats(0.0, 1e6), min_size=n * n, max_size=n * n))
    pmap = PermittivityMap(Grid(0.1 / 3, n), eps, sig)
    back, f = parse_gridmap(format_gridmap(pmap, 1.3e9))
    assert f == 1.3e9 and back.grid == pmap.grid
    np.testing.assert_array_equal(back.eps_r, pmap.eps_r)
    np.testing.assert_array_equal(back.sigma, pmap.sigma)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.data())
def test_meas_round_trip(v, data):
    vals = data.draw(st.lists(finite, min_size=2 * v * (v - 1), max_size=2 * v * (v - 1)))
    arr = np.array(vals[::2]) + 1j * np.array(vals[1::2])
    meas = MeasurementSet(arr.reshape(v, v - 1), 1.3e9)
    back = parse_meas(format_meas(meas))
    np.testing.assert_array_equal(back.data, meas.data)
    assert back.frequency == meas.frequency


def test_meas_format_layout():
    meas = MeasurementSet(np.array([[1 + 2j], [3 - 4j]]), 1e9)
    assert format_meas(meas) == "meas v1 2 1 1000000000\n1 1 1 2\n2 1 3 -4\n"


@pytest.mark.parametrize(
    "text, msg",
    [
        ("", "empty"),
        ("gridmap v2 1 0.1 1e9\n2 0\n", "header"),
        ("gridmap v1 2 0.1 1e9\n2 0\n", "expected 4"),
        ("gridmap v1 1 0.1 1e9\n2\n", "line 2"),
        ("gridmap v1 1 0.1 1e9\nx 0\n", "line 2"),
        ("gridmap v1 1 0.1 1e9\n0.5 0\n", "eps"),
    ],
)
def test_gridmap_errors(text, msg):
    with pytest.raises(FormatError, match=msg):
        parse_gridmap(text)


@pytest.mark.parametrize(
    "text, msg",
    [
        ("meas v1 3 1 1e9\n", "M = V - 1"),
        ("meas v1 2 1 1e9\n1 1 0 0\n", "expected 2"),
        ("meas v1 2 1 1e9\n1 1 0 0\n3 1 0 0\n", "out of range"),
        ("meas v1 2 1 1e9\n1 1 0 0\n1 1 0 0\n", "duplicate"),
    ],
)
def test_meas_errors(text, msg):
    with pytest.raises(FormatError, match=msg):
        parse_meas(text)


def test_export_csv(tmp_path):
    pmap = PermittivityMap(Grid(0.02, 2), [1.5, 2.0, 3.25, 4.0], [0.0, 0.1, 0.2, 0.3])
    export_csv(pmap, tmp_path / "e.csv", tmp_path / "s.csv")
    text = (tmp_path / "e.csv").read_text()
    assert text == "1.5,2\n3.25,4\n"
    eps = read_csv_matrix(tmp_path / "e.csv")
    sig = read_csv_matrix(tmp_path / "s.csv")
    assert eps.shape == sig.shape == (2, 2)
    np.testing.assert_array_equal(eps.ravel(), pmap.eps_r)
    np.testing.assert_array_equal(sig.ravel(), pmap.sigma)


def test_units():
    assert parse_length("7.6 cm") == pytest.approx(0.076)
    assert parse_length("5mm") == pytest.approx(0.005)
    assert parse_length("0.1") == 0.1
    assert parse_frequency("1.3 GHz") == pytest.approx(1.3e9)
    assert parse_frequency("900MHz") == pytest.approx(9e8)
    for bad in ("3 parsecs", "cm", "1.2.3 m"):
        with pytest.raises(FormatError):
            parse_length(bad)


def test_config_defaults_and_overrides():
    cfg = load_config()
    assert cfg == RunConfig()
    assert cfg.setup.frequency == 1.3e9 and cfg.setup.n_antennas == 16 and cfg.setup.ring_radius == pytest.approx(0.076)
    assert cfg.background == (22.4, 1.26)
    text = """
[setup]
frequency = 1 GHz
ring_radius = 80 mm
[grid]
n_inverse = 20  # comment
[noise]
snr_db = 40
[optimizer]
eps_range = 40, 70
d_range = 3 mm, 1.5 cm
[run]
chi = 0.5 cm
"""
    cfg = load_config(text=text)
    assert cfg.frequency == 1e9 and cfg.ring_radius == pytest.approx(0.08) and cfg.n_inverse == 20
    assert cfg.snr_db == 40.0 and cfg.eps_range == (40.0, 70.0)
    assert cfg.d_range == pytest.approx((0.003, 0.015)) and cfg.chi == pytest.approx(0.005)
    assert cfg.override(seed=5, method=None).seed == 5
    assert cfg.optimizer(9).seed == 9


@pytest.mark.parametrize(
    "text",
    ["[bogus]\nx = 1\n", "[grid]\nwidth = 1\n", "[setup]\nfrequency = fast\n", "[run]\nmethod = cg\n", "[optimizer]\nd_range = 1 mm\n"],
)
def test_config_errors(text):
    with pytest.raises(FormatError):
        load_config(text=text)


TINY = """
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
snr_db = 30
[optimizer]
P = 3
I = 4
B0 = 6
"""


@pytest.fixture(scope="module")
def tiny():
    cfg = load_config(text=TINY)
    return cfg, simulate(cfg)


def test_simulate_headers_and_truth(tiny, tmp_path):
    cfg, sim = tiny
    assert sim.measurements.data.shape == (8, 7)
    assert sim.reference.grid.n_per_side == 12
    assert sim.truth["tumor_radius"] == pytest.approx(0.006)
    changed = sim.actual.eps_r != sim.reference.eps_r
    assert changed.any() and np.all(sim.actual.eps_r[changed] == 59.3)
    paths = write_simulation(sim, tmp_path)
    assert paths["meas"].read_text().startswith("meas v1 8 7 1300000000\n")
    assert read_keyvalue(paths["truth"])["tumor"] == "ellipse"


def test_simulate_deterministic(tiny, tmp_path):
    cfg, sim = tiny
    again = simulate(cfg)
    np.testing.assert_array_equal(again.measurements.data, sim.measurements.data)
    other = simulate(cfg, seed=1)
    assert not np.array_equal(other.measurements.data, sim.measurements.data)


def test_simulate_paper_setup_header():
    cfg = load_config(text="[setup]\nfrequency = 1.3 GHz\nn_antennas = 16\nring_radius = 7.6 cm\n")
    assert (cfg.setup.frequency, cfg.setup.n_antennas) == (1.3e9, 16)


def test_no_tumor_gives_zero_data():
    cfg = load_config(text=TINY + "\n").override(tumor="none", snr_db=np.inf)
    sim = simulate(cfg)
    assert not sim.measurements.data.any()
    assert sim.truth == {"tumor": "none"}


def test_inverse_crime_guard():
    cfg = load_config(text=TINY).override(n_forward=12)
    with pytest.raises(GeometryError, match="twice"):
        simulate(cfg)
    simulate(cfg.override(allow_inverse_crime=True))


def test_search_space_box(tiny):
    cfg, sim = tiny
    space = search_space(cfg, sim.reference, cfg.setup)
    h = sim.reference.grid.cell_size
    assert space.lower[2] == pytest.approx(-0.02 + h / 2, abs=h)
    assert space.upper[3] == pytest.approx(0.02 - h / 2, abs=h)
    assert space.lower[0] == 30.0 and space.upper[7] == 0.02


def test_invert_header_mismatch(tiny):
    cfg, sim = tiny
    with pytest.raises(FormatError) as info:
        invert(cfg.override(frequency=1e9, n_inverse=10), sim.measurements, sim.reference)
    msg = str(info.value)
    assert "frequency" in msg and "cells per side" in msg


def test_inverse_crime_sanity():
    # noiseless data computed on the inverse grid itself
    text = TINY.replace("n_forward = 24", "n_forward = 12").replace("snr_db = 30", "snr_db = inf")
    cfg = load_config(text=text).override(
        allow_inverse_crime=True, I=200, P=8, B0=16, eps_range=(58.0, 61.0), sigma_range=(1.5, 1.6), d_range=(0.003, 0.01)
    )
    sim = simulate(cfg)
    report, recon = invert(cfg, sim.measurements, sim.reference, method="ea", seed=0)
    assert report.best_cost <= 1e-6
    np.testing.assert_array_equal(recon.eps_r != sim.reference.eps_r, sim.actual.eps_r != sim.reference.eps_r)


def test_metrics(tiny):
    cfg, sim = tiny
    m = compute_metrics(cfg.setup, sim.actual, sim.reference, sim.actual, sim.truth, 0.005, center=(0.004, -0.002))
    assert m["xi_tot"] == m["xi_int"] == m["xi_ext"] == 0.0
    assert m["zeta"] == 0.0 and m["detected"]
    blank = compute_metrics(cfg.setup, sim.reference, sim.reference, sim.actual, sim.truth, 0.005)
    assert blank["xi_ext"] == 0.0 and blank["xi_int"] > 0
    with pytest.raises(GeometryError):
        compute_metrics(cfg.setup, sim.actual, sim.reference, sim.reference, sim.truth, 0.005)
    summary = {"best_descriptor": "59.3 1.54 0.004 -0.002 0.006 0.006 0.006 0.006", "full_wave_evaluations": "224", "budget_T": "3200"}
    m = compute_metrics(cfg.setup, sim.actual, sim.reference, sim.actual, sim.truth, 0.005, summary=summary)
    assert m["zeta"] == pytest.approx(0.0, abs=1e-15) and m["zeta_centroid"] < 1e-12
    assert m["eta"] == pytest.approx(0.93)
