"""Method-of-moments forward model: incident, total and scattered fields."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.special import hankel2

from sbdmwi.em.geometry import Grid, ImagingSetup, PermittivityMap
from sbdmwi.em.green import GreenOperators, factor_system, green_b_external, green_b_internal
from sbdmwi.errors import GeometryError

__all__ = [
    "FieldSet",
    "add_awgn",
    "differential_field_data",
    "forward_solve",
    "incident_field",
    "incident_fields",
]


def incident_field(setup: ImagingSetup, grid: Grid, v: int) -> np.ndarray:
    """Field of a unit line current at antenna ``v``, sampled at cell centres.

    ``E_inc(r) = -(j/4) H0^(2)(k_B |r - r_v|)``; the amplitude is immaterial
    for the normalised cost function.
    """
    setup.check_grid(grid)
    src = setup.antenna_positions[v]
    dist = np.hypot(grid.centers[:, 0] - src[0], grid.centers[:, 1] - src[1])
    return -0.25j * hankel2(0, setup.wavenumber * dist)


def incident_fields(setup: ImagingSetup, grid: Grid) -> np.ndarray:
    """``(V, N)`` incident fields for all views."""
    return np.stack([incident_field(setup, grid, v) for v in range(setup.n_antennas)])


def incident_at_receivers(setup: ImagingSetup) -> np.ndarray:
    """``(V, M)`` incident field from antenna ``v`` at its receivers."""
    pos = setup.antenna_positions
    out = np.empty((setup.n_antennas, setup.n_receivers), dtype=complex)
    for v in range(setup.n_antennas):
        rx = pos[setup.receivers(v)]
        out[v] = -0.25j * hankel2(0, setup.wavenumber * np.hypot(*(rx - pos[v]).T))
    return out


@dataclass(frozen=True, eq=False)
class FieldSet:
    """Fields of one scenario for every view.

    Attributes
    ----------
    incident, total : ndarray, shape (V, N)
        Fields at the cell centres.
    scattered_at_receivers : ndarray, shape (V, M)
        ``total - incident`` at the receivers of each view.
    incident_at_receivers : ndarray, shape (V, M)
    """

    incident: np.ndarray = field(repr=False)
    total: np.ndarray = field(repr=False)
    scattered_at_receivers: np.ndarray = field(repr=False)
    incident_at_receivers: np.ndarray = field(repr=False)
    condition: float = np.nan

    @property
    def total_at_receivers(self) -> np.ndarray:
        return self.incident_at_receivers + self.scattered_at_receivers


def forward_solve(
    setup: ImagingSetup,
    grid: Grid,
    pmap: PermittivityMap,
    *,
    g_b_internal: np.ndarray | None = None,
    g_b_external_full: np.ndarray | None = None,
) -> FieldSet:
    """Solve the state and data equations for a full dielectric map.

    The Green's matrices can be passed in when several maps share a grid.
    """
    if pmap.grid != grid:
        raise GeometryError("map is defined on a different grid")
    g_int = green_b_internal(setup, grid) if g_b_internal is None else g_b_internal
    g_ext = green_b_external(setup, grid) if g_b_external_full is None else g_b_external_full
    tau = pmap.contrast(setup)
    e_inc = incident_fields(setup, grid)
    lu_piv, cond = factor_system(g_int, tau)
    total = linalg.lu_solve(lu_piv, e_inc.T, check_finite=False).T
    radiated = (g_ext @ (tau[:, None] * total.T)).T  # (V, V): antenna u's field from view v
    rx = setup.receiver_table
    scattered = np.take_along_axis(radiated, rx, axis=1)
    return FieldSet(e_inc, total, scattered, incident_at_receivers(setup), cond)


def differential_field_data(ops: GreenOperators, j_delta) -> np.ndarray:
    """Differential field at the receivers, ``G_N^{ext,v} J_delta^v`` per view."""
    j_delta = np.asarray(j_delta, dtype=complex)
    v_count = ops.setup.n_antennas
    if j_delta.shape != (v_count, ops.grid.n_cells):
        raise GeometryError(f"currents must have shape {(v_count, ops.grid.n_cells)}, got {j_delta.shape}")
    support = np.flatnonzero(np.any(j_delta != 0, axis=0))
    radiated = j_delta[:, support] @ ops.g_n_external_full[:, support].T  # (V views, V antennas)
    return np.take_along_axis(radiated, ops.setup.receiver_table, axis=1)


def add_awgn(fields, snr_db: float, seed: int | None) -> np.ndarray:
    """Add circular complex white Gaussian noise at a given SNR.

    The noise variance is the mean power of all samples divided by
    ``10**(snr_db/10)``. ``snr_db = inf`` returns an unchanged copy.
    """
    x = np.array(fields, dtype=complex)
    if math.isinf(snr_db) and snr_db > 0:
        return x
    if not math.isfinite(snr_db):
        raise ValueError(f"invalid SNR {snr_db}")
    power = np.mean(np.abs(x) ** 2)
    noise_var = power / 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape)
    return x + np.sqrt(noise_var / 2.0) * noise
