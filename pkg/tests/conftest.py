import numpy as np
import pytest

from sbdmwi.em.geometry import Grid, ImagingSetup, PermittivityMap
from sbdmwi.scenario.phantoms import NOMINAL_TUMOR, TISSUE_TABLES, EllipseTumor, ideal_phantom


@pytest.fixture
def xd_setup():
    bg = TISSUE_TABLES["XD"].background
    return ImagingSetup(1.3e9, bg[0], bg[1], 16, 0.076)


@pytest.fixture
def small_grid():
    return Grid(0.06, 12)


@pytest.fixture
def small_scene(xd_setup, small_grid):
    """12 x 12 ideal phantom with and without a small tumor."""
    t = TISSUE_TABLES["XD"]
    ref = ideal_phantom(xd_setup, small_grid, 0.026, t.adipose)
    tumor = EllipseTumor(*NOMINAL_TUMOR, (0.006, -0.004), (0.007, 0.007))
    act = tumor.insert(ref, t.background)
    return ref, act, tumor


def random_map(grid, rng, eps_max=40.0, sigma_max=2.0):
    return PermittivityMap(grid, rng.uniform(1.0, eps_max, grid.n_cells), rng.uniform(0.0, sigma_max, grid.n_cells))


def rel_err(a, b):
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / np.linalg.norm(np.asarray(b))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
