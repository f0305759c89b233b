"""Synthetic breast phantoms and tissue properties."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sbdmwi.em.geometry import Grid, ImagingSetup, PermittivityMap, complex_permittivity, split_complex_permittivity
from sbdmwi.errors import GeometryError

__all__ = [
    "NOMINAL_TUMOR",
    "TISSUE_TABLES",
    "EllipseTumor",
    "TissueTable",
    "disk_coverage",
    "ellipse_mask",
    "ideal_phantom",
    "perturb_tumor",
    "segmented_phantom",
]


@dataclass(frozen=True)
class TissueTable:
    """Tissue classes ``name -> (eps_r, sigma)`` plus the matching medium."""

    adipose: tuple[float, float]
    fibroglandular: tuple[float, float]
    background: tuple[float, float]

    def __post_init__(self):
        for eps, sigma in (self.adipose, self.fibroglandular, self.background):
            if eps < 1.0 or sigma < 0.0:
                raise ValueError("tissue table holds non-physical values")


# UWCEM segmented phantoms used in the reference study.
TISSUE_TABLES = {
    "XD": TissueTable((16.5, 0.60), (28.0, 0.89), (22.4, 1.26)),
    "HD": TissueTable((12.8, 0.36), (21.0, 0.61), (22.4, 1.26)),
    "scattered": TissueTable((9.0, 0.21), (14.5, 0.32), (13.6, 0.87)),
    "fatty": TissueTable((8.0, 0.17), (8.8, 0.195), (13.6, 0.87)),
}

NOMINAL_TUMOR = (59.3, 1.54)


def _check_inside(grid: Grid, center, radius):
    half = 0.5 * grid.side_length
    cx = center[0] - grid.origin[0]
    cy = center[1] - grid.origin[1]
    if abs(cx) + radius > half or abs(cy) + radius > half:
        raise GeometryError(f"disk of radius {radius:.4g} m does not fit inside the grid")


def disk_coverage(grid: Grid, center, radius: float, samples: int = 1) -> np.ndarray:
    """Fraction of each cell covered by a disk.

    ``samples=1`` is plain centre sampling (0 or 1); larger values average a
    ``samples x samples`` sub-grid per cell.
    """
    h = grid.cell_size
    offs = (np.arange(samples) + 0.5) / samples - 0.5
    frac = np.zeros(grid.n_cells)
    for dx in offs:
        for dy in offs:
            frac += np.hypot(grid.centers[:, 0] + dx * h - center[0], grid.centers[:, 1] + dy * h - center[1]) < radius
    return frac / samples**2


def ellipse_mask(grid: Grid, center, semi_axes, angle: float = 0.0) -> np.ndarray:
    """Cells whose centre lies inside a rotated ellipse."""
    dx = grid.centers[:, 0] - center[0]
    dy = grid.centers[:, 1] - center[1]
    ca, sa = np.cos(angle), np.sin(angle)
    u = ca * dx + sa * dy
    w = -sa * dx + ca * dy
    return (u / semi_axes[0]) ** 2 + (w / semi_axes[1]) ** 2 < 1.0


def ideal_phantom(
    setup: ImagingSetup,
    grid: Grid,
    breast_radius: float,
    tissue: tuple[float, float],
    center=(0.0, 0.0),
) -> PermittivityMap:
    """Homogeneous circular breast section in the matching medium."""
    _check_inside(grid, center, breast_radius)
    inside = disk_coverage(grid, center, breast_radius) > 0.5
    eps = np.where(inside, tissue[0], setup.eps_b)
    sig = np.where(inside, tissue[1], setup.sigma_b)
    return PermittivityMap(grid, eps, sig)


def segmented_phantom(
    setup: ImagingSetup,
    grid: Grid,
    breast_radius: float,
    table: TissueTable,
    seed: int = 0,
    n_lobes: int = 5,
    fill: float = 0.35,
    center=(0.0, 0.0),
) -> PermittivityMap:
    """Two-tissue breast: adipose disk with elliptical fibroglandular lobes.

    Lobe positions, sizes and orientations are drawn from ``seed`` in
    continuous coordinates, so the same seed gives the same anatomy on any
    grid.
    """
    _check_inside(grid, center, breast_radius)
    rng = np.random.default_rng(seed)
    inside = np.hypot(grid.centers[:, 0] - center[0], grid.centers[:, 1] - center[1]) < breast_radius
    fibro = np.zeros(grid.n_cells, dtype=bool)
    # lobes of roughly equal area; total area about `fill` of the breast
    lobe_area = fill * np.pi * breast_radius**2 / n_lobes
    for _ in range(n_lobes):
        r = 0.55 * breast_radius * np.sqrt(rng.uniform())
        t = rng.uniform(0.0, 2.0 * np.pi)
        ratio = rng.uniform(0.35, 0.8)
        major = np.sqrt(lobe_area / (np.pi * ratio))
        fibro |= ellipse_mask(grid, (center[0] + r * np.cos(t), center[1] + r * np.sin(t)), (major, ratio * major), rng.uniform(0, np.pi))
    fibro &= inside
    eps = np.full(grid.n_cells, setup.eps_b)
    sig = np.full(grid.n_cells, setup.sigma_b)
    eps[inside], sig[inside] = table.adipose
    eps[fibro], sig[fibro] = table.fibroglandular
    return PermittivityMap(grid, eps, sig)


@dataclass(frozen=True)
class EllipseTumor:
    """Ground-truth tumor used for synthetic data (a circle when axes match)."""

    eps_psi: float
    sigma_psi: float
    center: tuple[float, float]
    semi_axes: tuple[float, float]
    angle: float = 0.0

    @property
    def radius(self) -> float:
        """Equal-area radius."""
        return float(np.sqrt(self.semi_axes[0] * self.semi_axes[1]))

    def mask(self, grid: Grid) -> np.ndarray:
        return ellipse_mask(grid, self.center, self.semi_axes, self.angle)

    def insert(self, reference: PermittivityMap, background) -> PermittivityMap:
        mask = self.mask(reference.grid) & reference.support(*background)
        return reference.with_values(mask, self.eps_psi, self.sigma_psi)


def perturb_tumor(nominal: complex, delta: float) -> complex:
    """Scale a complex permittivity by ``(1 + delta)``."""
    return (1.0 + delta) * complex(nominal)


def perturbed_properties(eps_r: float, sigma: float, delta: float, frequency: float) -> tuple[float, float]:
    """:func:`perturb_tumor` expressed on ``(eps_r, sigma)`` pairs."""
    eps = perturb_tumor(complex(complex_permittivity(eps_r, sigma, frequency)), delta)
    e, s = split_complex_permittivity(eps, frequency)
    return float(e), float(s)
