"""Plain-text grid-map and measurement files, and CSV export.

Numbers are written with 17 significant digits so a write/read cycle
reproduces every float64 exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from sbdmwi.em.geometry import Grid, PermittivityMap
from sbdmwi.errors import FormatError
from sbdmwi.objective import MeasurementSet

__all__ = [
    "export_csv",
    "format_gridmap",
    "format_meas",
    "parse_gridmap",
    "parse_meas",
    "read_csv_matrix",
    "read_gridmap",
    "read_meas",
    "write_gridmap",
    "write_meas",
]


def _g(x: float) -> str:
    return format(float(x), ".17g")


def _fields(line: str, count: int, lineno: int) -> list[str]:
    parts = line.split()
    if len(parts) != count:
        raise FormatError(f"line {lineno}: expected {count} fields, got {len(parts)}")
    return parts


def _float(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise FormatError(f"line {lineno}: not a number: {token!r}") from None


def _int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise FormatError(f"line {lineno}: not an integer: {token!r}") from None


def format_gridmap(pmap: PermittivityMap, frequency: float) -> str:
    """``gridmap v1 <n> <L> <f>`` followed by ``n*n`` lines ``eps_r sigma``."""
    g = pmap.grid
    lines = [f"gridmap v1 {g.n_per_side} {_g(g.side_length)} {_g(frequency)}"]
    lines += [f"{_g(e)} {_g(s)}" for e, s in zip(pmap.eps_r, pmap.sigma)]
    return "\n".join(lines) + "\n"


def parse_gridmap(text: str) -> tuple[PermittivityMap, float]:
    """Inverse of :func:`format_gridmap`; returns ``(map, frequency)``."""
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty grid-map file")
    head = _fields(lines[0], 5, 1)
    if head[:2] != ["gridmap", "v1"]:
        raise FormatError("line 1: not a 'gridmap v1' header")
    n = _int(head[2], 1)
    side = _float(head[3], 1)
    freq = _float(head[4], 1)
    body = lines[1:]
    if len(body) != n * n:
        raise FormatError(f"expected {n * n} value lines, found {len(body)}")
    vals = np.array([[_float(t, i + 2) for t in _fields(line, 2, i + 2)] for i, line in enumerate(body)])
    try:
        pmap = PermittivityMap(Grid(side, n), vals[:, 0], vals[:, 1])
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    return pmap, freq


def write_gridmap(path, pmap: PermittivityMap, frequency: float) -> None:
    Path(path).write_text(format_gridmap(pmap, frequency))


def read_gridmap(path) -> tuple[PermittivityMap, float]:
    return parse_gridmap(Path(path).read_text())


def format_meas(meas: MeasurementSet) -> str:
    """``meas v1 <V> <M> <f>`` then ``v m re im`` lines, 1-based indices.

    Receiver ``m`` of view ``v`` is the ``m``-th antenna in ascending index
    order once antenna ``v`` is skipped.
    """
    v_count, m_count = meas.data.shape
    lines = [f"meas v1 {v_count} {m_count} {_g(meas.frequency)}"]
    for v in range(v_count):
        for m in range(m_count):
            z = meas.data[v, m]
            lines.append(f"{v + 1} {m + 1} {_g(z.real)} {_g(z.imag)}")
    return "\n".join(lines) + "\n"


def parse_meas(text: str, provenance: str = "") -> MeasurementSet:
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty measurement file")
    head = _fields(lines[0], 5, 1)
    if head[:2] != ["meas", "v1"]:
        raise FormatError("line 1: not a 'meas v1' header")
    v_count, m_count = _int(head[2], 1), _int(head[3], 1)
    freq = _float(head[4], 1)
    if v_count < 2 or m_count != v_count - 1:
        raise FormatError(f"line 1: need V >= 2 and M = V - 1, got V={v_count}, M={m_count}")
    body = lines[1:]
    if len(body) != v_count * m_count:
        raise FormatError(f"expected {v_count * m_count} data lines, found {len(body)}")
    data = np.full((v_count, m_count), np.nan + 0j)
    for i, line in enumerate(body):
        lineno = i + 2
        v, m, re, im = _fields(line, 4, lineno)
        v, m = _int(v, lineno), _int(m, lineno)
        if not (1 <= v <= v_count and 1 <= m <= m_count):
            raise FormatError(f"line {lineno}: index ({v}, {m}) out of range")
        if not np.isnan(data[v - 1, m - 1].real):
            raise FormatError(f"line {lineno}: duplicate entry ({v}, {m})")
        data[v - 1, m - 1] = complex(_float(re, lineno), _float(im, lineno))
    return MeasurementSet(data, freq, provenance)


def write_meas(path, meas: MeasurementSet) -> None:
    Path(path).write_text(format_meas(meas))


def read_meas(path) -> MeasurementSet:
    return parse_meas(Path(path).read_text(), provenance=str(path))


def export_csv(pmap: PermittivityMap, eps_path, sigma_path) -> None:
    """Write ``n x n`` permittivity and conductivity matrices (row ``i`` = y index)."""
    eps, sig = pmap.as_images()
    for path, img in ((eps_path, eps), (sigma_path, sig)):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            for row in img:
                w.writerow([_g(v) for v in row])


def read_csv_matrix(path) -> np.ndarray:
    with open(path, newline="") as fh:
        return np.array([[float(v) for v in row] for row in csv.reader(fh)])
