"""Spline tumor descriptor, its search box and decoding into a map."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from shapely.geometry import LinearRing

from sbdmwi.em.geometry import Grid, PermittivityMap
from sbdmwi.errors import GeometryError, InvalidCandidate

__all__ = [
    "RASTER_SAMPLES_PER_ARC",
    "SearchSpace",
    "TumorDescriptor",
    "contour_centroid",
    "contour_points",
    "decode_map",
    "points_in_polygon",
    "rasterize_tumor",
]

RASTER_SAMPLES_PER_ARC = 32


@dataclass(frozen=True)
class TumorDescriptor:
    """Homogeneous tumor with a closed quadratic-spline contour.

    ``d[c]`` is the distance of control point ``c`` from the barycentre
    along the direction ``2 pi c / C``.
    """

    eps_psi: float
    sigma_psi: float
    x_psi: float
    y_psi: float
    d: tuple[float, ...]

    def __post_init__(self):
        d = tuple(float(v) for v in self.d)
        if len(d) < 3:
            raise ValueError("need at least three contour control points")
        if any(not v > 0 for v in d):
            raise ValueError("control distances must be positive")
        object.__setattr__(self, "d", d)

    @property
    def n_arcs(self) -> int:
        return len(self.d)

    @property
    def size(self) -> int:
        return 4 + len(self.d)

    @property
    def center(self) -> tuple[float, float]:
        return (self.x_psi, self.y_psi)

    def to_vector(self) -> np.ndarray:
        return np.array([self.eps_psi, self.sigma_psi, self.x_psi, self.y_psi, *self.d])

    @classmethod
    def from_vector(cls, vec) -> TumorDescriptor:
        vec = np.asarray(vec, dtype=float).ravel()
        return cls(vec[0], vec[1], vec[2], vec[3], tuple(vec[4:]))

    def translated(self, dx: float, dy: float) -> TumorDescriptor:
        return TumorDescriptor(self.eps_psi, self.sigma_psi, self.x_psi + dx, self.y_psi + dy, self.d)

    @classmethod
    def circle_like(cls, eps_psi, sigma_psi, x, y, radius, n_arcs=4) -> TumorDescriptor:
        """Equal control distances giving a contour of mean radius ``radius``.

        The spline passes inside its control polygon; the distance is scaled
        so that the mean radius of the sampled contour matches ``radius``.
        """
        unit = contour_points(cls(eps_psi, sigma_psi, 0.0, 0.0, (1.0,) * n_arcs), 64)[:-1]
        scale = radius / np.mean(np.hypot(unit[:, 0], unit[:, 1]))
        return cls(eps_psi, sigma_psi, x, y, (scale,) * n_arcs)


@dataclass(frozen=True, eq=False)
class SearchSpace:
    """Box bounds on the descriptor vector; maps to and from ``[0, 1]^K``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float).ravel()
        hi = np.array(self.upper, dtype=float).ravel()
        if lo.shape != hi.shape or lo.size < 7:
            raise ValueError("bounds must be equal-length vectors with K = 4 + C >= 7 entries")
        if np.any(lo >= hi):
            raise ValueError("every lower bound must be below its upper bound")
        if lo[0] < 1.0 or lo[1] < 0.0 or np.any(lo[4:] <= 0.0):
            raise ValueError("bounds admit non-physical tumors")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    @classmethod
    def default(
        cls,
        box: tuple[float, float, float, float],
        n_arcs: int = 4,
        eps_range=(30.0, 80.0),
        sigma_range=(0.5, 3.0),
        d_range=(0.002, 0.02),
    ) -> SearchSpace:
        """Default bounds; ``box = (xmin, xmax, ymin, ymax)`` of the breast."""
        xmin, xmax, ymin, ymax = box
        lo = [eps_range[0], sigma_range[0], xmin, ymin] + [d_range[0]] * n_arcs
        hi = [eps_range[1], sigma_range[1], xmax, ymax] + [d_range[1]] * n_arcs
        return cls(np.array(lo), np.array(hi))

    def normalize(self, vec) -> np.ndarray:
        return (np.asarray(vec, dtype=float) - self.lower) / (self.upper - self.lower)

    def denormalize(self, unit) -> np.ndarray:
        return self.lower + np.asarray(unit, dtype=float) * (self.upper - self.lower)

    def descriptor(self, unit) -> TumorDescriptor:
        return TumorDescriptor.from_vector(self.denormalize(unit))

    def contains(self, vec) -> bool:
        vec = np.asarray(vec, dtype=float)
        return bool(np.all(vec >= self.lower) and np.all(vec <= self.upper))


def contour_points(desc: TumorDescriptor, samples_per_arc: int = RASTER_SAMPLES_PER_ARC) -> np.ndarray:
    """Closed polyline through the tumor boundary.

    Arc ``c`` blends control points ``c-1, c, c+1`` with weights
    ``(1/2 - l + l^2/2, 1/2 + l - l^2, l^2/2)`` for ``l`` in ``[0, 1)``;
    the returned array repeats its first point at the end.
    """
    if samples_per_arc < 2:
        raise ValueError("samples_per_arc must be >= 2")
    n = desc.n_arcs
    phi = 2.0 * np.pi * np.arange(n) / n
    d = np.asarray(desc.d)
    ctrl = np.column_stack([desc.x_psi + d * np.cos(phi), desc.y_psi + d * np.sin(phi)])
    prev = np.roll(ctrl, 1, axis=0)
    nxt = np.roll(ctrl, -1, axis=0)
    l = np.arange(samples_per_arc) / samples_per_arc
    w_prev = 0.5 - l + 0.5 * l**2
    w_cur = 0.5 + l - l**2
    w_next = 0.5 * l**2
    pts = (
        w_prev[None, :, None] * prev[:, None, :]
        + w_cur[None, :, None] * ctrl[:, None, :]
        + w_next[None, :, None] * nxt[:, None, :]
    ).reshape(-1, 2)
    return np.vstack([pts, pts[:1]])


def contour_centroid(desc: TumorDescriptor, samples_per_arc: int = RASTER_SAMPLES_PER_ARC) -> tuple[float, float]:
    """Area centroid of the sampled contour (shoelace formula).

    Equals ``(x_psi, y_psi)`` only when all control distances are equal.
    """
    p = contour_points(desc, samples_per_arc)
    x0, y0, x1, y1 = p[:-1, 0], p[:-1, 1], p[1:, 0], p[1:, 1]
    cross = x0 * y1 - x1 * y0
    area = 0.5 * cross.sum()
    return float(np.sum((x0 + x1) * cross) / (6 * area)), float(np.sum((y0 + y1) * cross) / (6 * area))


def points_in_polygon(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """Even-odd rule membership of ``points`` in a closed ``polygon``."""
    x = points[:, 0][:, None]
    y = points[:, 1][:, None]
    x0, y0 = polygon[:-1, 0][None, :], polygon[:-1, 1][None, :]
    x1, y1 = polygon[1:, 0][None, :], polygon[1:, 1][None, :]
    straddles = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    crossings = straddles & (x < x_cross)
    return (np.count_nonzero(crossings, axis=1) % 2) == 1


def rasterize_tumor(
    desc: TumorDescriptor, grid: Grid, samples_per_arc: int = RASTER_SAMPLES_PER_ARC
) -> np.ndarray:
    """Cells whose centre lies inside the tumor contour.

    Raises
    ------
    InvalidCandidate
        If the sampled contour intersects itself.
    """
    poly = contour_points(desc, samples_per_arc)
    if not LinearRing(poly[:-1]).is_simple:
        raise InvalidCandidate("tumor contour intersects itself")
    mask = np.zeros(grid.n_cells, dtype=bool)
    lo = poly.min(axis=0)
    hi = poly.max(axis=0)
    c = grid.centers
    near = np.flatnonzero((c[:, 0] >= lo[0]) & (c[:, 0] <= hi[0]) & (c[:, 1] >= lo[1]) & (c[:, 1] <= hi[1]))
    if near.size:
        mask[near] = points_in_polygon(c[near], poly)
    return mask


def decode_map(
    desc: TumorDescriptor,
    reference: PermittivityMap,
    background: tuple[float, float],
    samples_per_arc: int = RASTER_SAMPLES_PER_ARC,
) -> PermittivityMap:
    """Insert the tumor into the reference map.

    Only cells inside the breast (cells whose reference values differ from
    ``background``) can become tumor; everything else keeps its reference
    values.
    """
    if desc.eps_psi < 1.0 or desc.sigma_psi < 0.0:
        raise InvalidCandidate("tumor properties are not physical")
    mask = rasterize_tumor(desc, reference.grid, samples_per_arc)
    mask &= reference.support(*background)
    return reference.with_values(mask, desc.eps_psi, desc.sigma_psi)


def tumor_mask(desc: TumorDescriptor, reference: PermittivityMap, background) -> np.ndarray:
    """The cells :func:`decode_map` overwrites."""
    return rasterize_tumor(desc, reference.grid) & reference.support(*background)


def check_breast_box(box, grid: Grid) -> None:
    xmin, xmax, ymin, ymax = box
    half = 0.5 * grid.side_length
    ox, oy = grid.origin
    if xmin < ox - half or xmax > ox + half or ymin < oy - half or ymax > oy + half:
        raise GeometryError("search box extends beyond the grid")
