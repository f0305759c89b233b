"""Discretised Green's matrices of the homogeneous and the reference medium.

Cell integrals of the 2D kernel are evaluated with Richmond's equal-area
circle approximation: each square cell of side ``h`` is replaced by a disk of
radius ``a = h / sqrt(pi)``, for which the integral of ``H0^(2)`` has a closed
form both away from the cell and at its own centre.

Sign convention: fields vary as ``exp(+j w t)``, so the outgoing Green's
function of ``laplacian + k^2`` is ``-(j/4) H0^(2)(k r)`` and the scattering
kernel is ``-j (k^2/4) H0^(2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.special import hankel2, jv

from sbdmwi.em.geometry import Grid, ImagingSetup
from sbdmwi.errors import GeometryError, IllConditionedError

__all__ = [
    "CONDITION_LIMIT",
    "GreenOperators",
    "cell_kernel",
    "factor_system",
    "green_b_external",
    "green_b_internal",
    "green_n_external",
    "green_n_internal",
    "self_term",
]

CONDITION_LIMIT = 1e12


def cell_kernel(k: complex, a: float, distance):
    """Integral of ``-j k^2/4 H0^(2)(k|r - r'|)`` over a disk of radius ``a``.

    Valid for observation points outside the disk (``distance >= a``).
    """
    distance = np.asarray(distance, dtype=float)
    return -0.5j * np.pi * k * a * jv(1, k * a) * hankel2(0, k * distance)


def self_term(k: complex, a: float) -> complex:
    """The same integral observed at the disk centre."""
    return complex(-0.5j * np.pi * k * a * hankel2(1, k * a) - 1.0)


def green_b_internal(setup: ImagingSetup, grid: Grid) -> np.ndarray:
    """``N x N`` homogeneous-background Green's matrix on the grid.

    Entries depend only on the integer squared offset between cells, so the
    kernel is tabulated once per distinct distance; the result is exactly
    symmetric.
    """
    k = setup.wavenumber
    a = grid.equivalent_radius
    h = grid.cell_size
    n = grid.n_per_side
    di = np.arange(n)
    # squared integer distances that can occur between two cells
    sq = (di[:, None] ** 2 + di[None, :] ** 2).ravel()
    table = np.zeros(2 * (n - 1) ** 2 + 1, dtype=complex)
    used = np.unique(sq)
    nonzero = used[used > 0]
    table[nonzero] = cell_kernel(k, a, h * np.sqrt(nonzero))
    table[0] = self_term(k, a)
    ij = grid.index_pairs
    d2 = (ij[:, 0, None] - ij[None, :, 0]) ** 2 + (ij[:, 1, None] - ij[None, :, 1]) ** 2
    return table[d2]


def green_b_external(setup: ImagingSetup, grid: Grid, v: int | None = None) -> np.ndarray:
    """Homogeneous Green's matrix from the cells to the receivers.

    With ``v`` given, returns the ``M x N`` matrix for the receivers of view
    ``v``; with ``v=None`` the ``V x N`` matrix towards every antenna.
    """
    setup.check_grid(grid)
    pos = setup.antenna_positions if v is None else setup.antenna_positions[setup.receivers(v)]
    diff = pos[:, None, :] - grid.centers[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    return cell_kernel(setup.wavenumber, grid.equivalent_radius, dist)


def _one_norm_condition(lu_piv, anorm: float) -> float:
    (lu, _) = lu_piv
    gecon = linalg.get_lapack_funcs("gecon", (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0 or rcond <= 0.0:
        return np.inf
    return 1.0 / rcond


def factor_system(g_b: np.ndarray, tau: np.ndarray, limit: float = CONDITION_LIMIT):
    """LU-factor ``I - G_B diag(tau)`` and guard its conditioning.

    Returns
    -------
    lu_piv : tuple
        Factorization usable with :func:`scipy.linalg.lu_solve`.
    condition : float
        1-norm condition estimate.

    Raises
    ------
    IllConditionedError
        When the condition estimate exceeds ``limit``.
    """
    a = -g_b * tau[None, :]
    a[np.diag_indices_from(a)] += 1.0
    anorm = np.abs(a).sum(axis=0).max()
    try:
        lu_piv = linalg.lu_factor(a, check_finite=False)
    except (linalg.LinAlgError, ValueError) as exc:
        raise IllConditionedError(f"factorization failed: {exc}", np.inf) from exc
    cond = _one_norm_condition(lu_piv, anorm)
    if not cond <= limit:
        raise IllConditionedError("state equation matrix is ill-conditioned", cond)
    return lu_piv, cond


def green_n_internal(g_b_internal: np.ndarray, tau_n: np.ndarray, *, return_factor: bool = False):
    """Internal inhomogeneous Green's matrix ``[I - G_B T_N]^-1 G_B``."""
    tau_n = np.asarray(tau_n, dtype=complex)
    if tau_n.shape != (g_b_internal.shape[0],):
        raise GeometryError("contrast length does not match the Green's matrix")
    lu_piv, cond = factor_system(g_b_internal, tau_n)
    g_n = linalg.lu_solve(lu_piv, g_b_internal, check_finite=False)
    if return_factor:
        return g_n, lu_piv, cond
    return g_n


def green_n_external(g_b_external: np.ndarray, tau_n: np.ndarray, g_n_internal: np.ndarray) -> np.ndarray:
    """External inhomogeneous Green's matrix ``G_B^ext [I + T_N G_N]``."""
    tau_n = np.asarray(tau_n, dtype=complex)
    if g_b_external.shape[1] != g_n_internal.shape[0] or tau_n.shape != (g_n_internal.shape[0],):
        raise GeometryError("dimension mismatch between external and internal operators")
    return g_b_external + g_b_external @ (tau_n[:, None] * g_n_internal)


@dataclass(frozen=True, eq=False)
class GreenOperators:
    """Green's matrices of a reference scenario, built once and then shared.

    ``*_external_full`` hold one row per antenna; :meth:`g_b_external` and
    :meth:`g_n_external` drop the transmitting antenna's own row.
    """

    setup: ImagingSetup
    grid: Grid
    g_b_internal: np.ndarray = field(repr=False)
    g_b_external_full: np.ndarray = field(repr=False)
    reference_contrast: np.ndarray = field(repr=False)
    g_n_internal: np.ndarray = field(repr=False)
    g_n_external_full: np.ndarray = field(repr=False)
    reference_factor: tuple = field(repr=False)
    condition: float = np.nan

    @classmethod
    def build(cls, setup: ImagingSetup, grid: Grid, tau_n) -> GreenOperators:
        tau_n = np.asarray(tau_n, dtype=complex)
        g_b = green_b_internal(setup, grid)
        g_ext = green_b_external(setup, grid)
        g_n, lu_piv, cond = green_n_internal(g_b, tau_n, return_factor=True)
        g_n_ext = green_n_external(g_ext, tau_n, g_n)
        for arr in (g_b, g_ext, g_n, g_n_ext, tau_n):
            arr.setflags(write=False)
        return cls(setup, grid, g_b, g_ext, tau_n, g_n, g_n_ext, lu_piv, cond)

    def g_b_external(self, v: int) -> np.ndarray:
        return self.g_b_external_full[self.setup.receivers(v)]

    def g_n_external(self, v: int) -> np.ndarray:
        return self.g_n_external_full[self.setup.receivers(v)]
