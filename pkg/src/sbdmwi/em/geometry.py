"""Investigation grid, antenna ring and dielectric maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.constants import c as C0
from scipy.constants import epsilon_0 as EPS0
from scipy.constants import mu_0 as MU0

from sbdmwi.errors import GeometryError

__all__ = [
    "C0",
    "EPS0",
    "MU0",
    "Grid",
    "ImagingSetup",
    "PermittivityMap",
    "complex_permittivity",
    "split_complex_permittivity",
    "wavelength_min",
]


def complex_permittivity(eps_r, sigma, frequency):
    """Absolute complex permittivity ``eps0*eps_r - j*sigma/(2 pi f)``."""
    omega = 2.0 * np.pi * frequency
    return EPS0 * np.asarray(eps_r, dtype=float) - 1j * np.asarray(sigma, dtype=float) / omega


def split_complex_permittivity(eps, frequency):
    """Inverse of :func:`complex_permittivity`, returns ``(eps_r, sigma)``."""
    omega = 2.0 * np.pi * frequency
    eps = np.asarray(eps)
    return eps.real / EPS0, -eps.imag * omega


@dataclass(frozen=True)
class Grid:
    """Square investigation domain split into ``n_per_side**2`` square cells.

    Cells are stored row-major: cell ``n = i * n_per_side + j`` has its centre
    at ``x = x0 - L/2 + (j + 1/2) h`` and ``y = y0 - L/2 + (i + 1/2) h``.
    """

    side_length: float
    n_per_side: int
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.n_per_side < 1:
            raise GeometryError("n_per_side must be >= 1")
        if not self.side_length > 0:
            raise GeometryError("side_length must be positive")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def n_cells(self) -> int:
        return self.n_per_side**2

    @property
    def cell_size(self) -> float:
        return self.side_length / self.n_per_side

    @property
    def cell_area(self) -> float:
        return self.cell_size**2

    @property
    def equivalent_radius(self) -> float:
        """Radius of the circle with the same area as one cell."""
        return self.cell_size / np.sqrt(np.pi)

    @property
    def circumradius(self) -> float:
        return self.side_length / np.sqrt(2.0)

    @cached_property
    def axis(self) -> np.ndarray:
        """Cell-centre offsets along one side, relative to the origin."""
        h = self.cell_size
        return -0.5 * self.side_length + (np.arange(self.n_per_side) + 0.5) * h

    @cached_property
    def centers(self) -> np.ndarray:
        """``(N, 2)`` array of cell centres."""
        xx, yy = np.meshgrid(self.axis + self.origin[0], self.axis + self.origin[1])
        return np.column_stack([xx.ravel(), yy.ravel()])

    @cached_property
    def index_pairs(self) -> np.ndarray:
        """``(N, 2)`` integer ``(row, col)`` of each cell."""
        ii, jj = np.divmod(np.arange(self.n_cells), self.n_per_side)
        return np.column_stack([ii, jj])

    def cell_of(self, x: float, y: float) -> int | None:
        """Index of the cell containing ``(x, y)``, or ``None`` outside."""
        h = self.cell_size
        j = int(np.floor((x - self.origin[0] + 0.5 * self.side_length) / h))
        i = int(np.floor((y - self.origin[1] + 0.5 * self.side_length) / h))
        if 0 <= i < self.n_per_side and 0 <= j < self.n_per_side:
            return i * self.n_per_side + j
        return None

    def translated(self, dx: float, dy: float) -> Grid:
        return Grid(self.side_length, self.n_per_side, (self.origin[0] + dx, self.origin[1] + dy))


@dataclass(frozen=True)
class ImagingSetup:
    """Multi-view / multi-static ring of ``V`` line-current antennas.

    When antenna ``v`` transmits, the other ``V - 1`` antennas receive, in
    ascending antenna order.
    """

    frequency: float
    eps_b: float
    sigma_b: float
    n_antennas: int
    ring_radius: float
    center: tuple[float, float] = (0.0, 0.0)
    start_angle: float = 0.0

    def __post_init__(self):
        if self.n_antennas < 2:
            raise GeometryError("need at least two antennas")
        if not self.frequency > 0:
            raise GeometryError("frequency must be positive")
        if self.eps_b < 1 or self.sigma_b < 0:
            raise GeometryError("background medium is not physical")
        if not self.ring_radius > 0:
            raise GeometryError("ring radius must be positive")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def omega(self) -> float:
        return 2.0 * np.pi * self.frequency

    @property
    def n_receivers(self) -> int:
        return self.n_antennas - 1

    @property
    def eps_complex_b(self) -> complex:
        """Absolute complex permittivity of the background."""
        return complex(complex_permittivity(self.eps_b, self.sigma_b, self.frequency))

    @property
    def wavenumber(self) -> complex:
        """Background wavenumber with ``Im <= 0`` (decaying outgoing waves)."""
        k = self.omega * np.sqrt(MU0 * self.eps_complex_b + 0j)
        return complex(k.real, -abs(k.imag))

    @property
    def wavelength(self) -> float:
        return 2.0 * np.pi / self.wavenumber.real

    @cached_property
    def antenna_positions(self) -> np.ndarray:
        phi = self.start_angle + 2.0 * np.pi * np.arange(self.n_antennas) / self.n_antennas
        return np.column_stack(
            [self.center[0] + self.ring_radius * np.cos(phi), self.center[1] + self.ring_radius * np.sin(phi)]
        )

    def receivers(self, v: int) -> np.ndarray:
        """Antenna indices receiving while antenna ``v`` transmits."""
        if not 0 <= v < self.n_antennas:
            raise IndexError(f"view {v} out of range")
        idx = np.arange(self.n_antennas)
        return idx[idx != v]

    @cached_property
    def receiver_table(self) -> np.ndarray:
        """``(V, M)`` table of receiver indices per view."""
        return np.stack([self.receivers(v) for v in range(self.n_antennas)])

    def check_grid(self, grid: Grid) -> None:
        """Raise if the antenna ring touches the investigation domain."""
        offset = np.hypot(grid.origin[0] - self.center[0], grid.origin[1] - self.center[1])
        if self.ring_radius <= grid.circumradius + offset:
            raise GeometryError(
                f"antenna ring radius {self.ring_radius:.4g} m does not clear the grid "
                f"(circumradius {grid.circumradius:.4g} m)"
            )

    def translated(self, dx: float, dy: float) -> ImagingSetup:
        return ImagingSetup(
            self.frequency,
            self.eps_b,
            self.sigma_b,
            self.n_antennas,
            self.ring_radius,
            (self.center[0] + dx, self.center[1] + dy),
            self.start_angle,
        )


@dataclass(frozen=True, eq=False)
class PermittivityMap:
    """Per-cell relative permittivity and conductivity on a grid."""

    grid: Grid
    eps_r: np.ndarray
    sigma: np.ndarray = field(repr=False)

    def __post_init__(self):
        eps_r = np.array(self.eps_r, dtype=float).ravel()
        sigma = np.array(self.sigma, dtype=float).ravel()
        n = self.grid.n_cells
        if eps_r.shape != (n,) or sigma.shape != (n,):
            raise GeometryError(f"map arrays must have {n} entries")
        if np.any(eps_r < 1.0) or np.any(sigma < 0.0):
            raise GeometryError("map contains non-physical values (eps_r < 1 or sigma < 0)")
        eps_r.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "eps_r", eps_r)
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def uniform(cls, grid: Grid, eps_r: float, sigma: float) -> PermittivityMap:
        return cls(grid, np.full(grid.n_cells, float(eps_r)), np.full(grid.n_cells, float(sigma)))

    def complex_permittivity(self, frequency: float) -> np.ndarray:
        return complex_permittivity(self.eps_r, self.sigma, frequency)

    def contrast(self, setup: ImagingSetup) -> np.ndarray:
        """Complex contrast ``eps/eps_B - 1`` per cell."""
        return self.complex_permittivity(setup.frequency) / setup.eps_complex_b - 1.0

    def support(self, eps_b: float, sigma_b: float) -> np.ndarray:
        """Cells whose values differ from the given background."""
        return (self.eps_r != eps_b) | (self.sigma != sigma_b)

    def with_values(self, mask: np.ndarray, eps_r: float, sigma: float) -> PermittivityMap:
        eps = self.eps_r.copy()
        sig = self.sigma.copy()
        eps[mask] = eps_r
        sig[mask] = sigma
        return PermittivityMap(self.grid, eps, sig)

    def as_images(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.grid.n_per_side
        return self.eps_r.reshape(n, n), self.sigma.reshape(n, n)

    def __eq__(self, other):
        if not isinstance(other, PermittivityMap):
            return NotImplemented
        return (
            self.grid == other.grid
            and np.array_equal(self.eps_r, other.eps_r)
            and np.array_equal(self.sigma, other.sigma)
        )


def wavelength_min(frequency: float, max_eps_r: float) -> float:
    """Wavelength in the most permittive tissue, losses ignored."""
    return C0 / (frequency * np.sqrt(max_eps_r))
