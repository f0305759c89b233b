"""Run configuration read from an INI-style key/value file.

Lengths accept ``m``, ``cm`` or ``mm`` suffixes and frequencies ``Hz``,
``kHz``, ``MHz`` or ``GHz``; bare numbers are SI. Every key has a default,
so an empty file (or no file) gives the desk-scale ideal-phantom scenario.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from sbdmwi.em.geometry import Grid, ImagingSetup
from sbdmwi.errors import FormatError
from sbdmwi.optimizer.loop import SbdConfig
from sbdmwi.scenario.phantoms import NOMINAL_TUMOR, TISSUE_TABLES, EllipseTumor

__all__ = ["RunConfig", "load_config", "parse_frequency", "parse_length"]

_LENGTH = {"m": 1.0, "cm": 1e-2, "mm": 1e-3}
_FREQ = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_NUM_UNIT = re.compile(r"^\s*([-+0-9.eE]+)\s*([A-Za-z]*)\s*$")


def _with_unit(text: str, table: dict[str, float], what: str) -> float:
    m = _NUM_UNIT.match(str(text))
    if not m:
        raise FormatError(f"cannot parse {what} {text!r}")
    unit = m.group(2).lower() or next(k for k, v in table.items() if v == 1.0)
    if unit not in table:
        raise FormatError(f"unknown {what} unit {m.group(2)!r}")
    try:
        return float(m.group(1)) * table[unit]
    except ValueError:
        raise FormatError(f"cannot parse {what} {text!r}") from None


def parse_length(text: str) -> float:
    """``'7.6 cm'`` -> ``0.076``."""
    return _with_unit(text, _LENGTH, "length")


def parse_frequency(text: str) -> float:
    """``'1.3 GHz'`` -> ``1.3e9``."""
    return _with_unit(text, _FREQ, "frequency")


@dataclass(frozen=True)
class RunConfig:
    # setup
    frequency: float = 1.3e9
    n_antennas: int = 16
    ring_radius: float = 0.076
    tissue: str = "XD"
    eps_b: float | None = None
    sigma_b: float | None = None
    # grids
    side_length: float = 0.105
    n_forward: int = 70
    n_inverse: int = 35
    allow_inverse_crime: bool = False
    # phantom
    phantom: str = "ideal"
    breast_radius: float = 0.044
    phantom_seed: int = 0
    # tumor truth (synthetic data)
    tumor: str = "ellipse"
    tumor_eps: float = NOMINAL_TUMOR[0]
    tumor_sigma: float = NOMINAL_TUMOR[1]
    tumor_x: float = 0.013
    tumor_y: float = -0.011
    tumor_a: float = 0.0088
    tumor_b: float = 0.0088
    tumor_angle: float = 0.0
    # noise
    snr_db: float = np.inf
    # optimizer
    P: int = 16
    I: int = 60
    B0: int = 40
    inertia: float = 0.7298
    c1: float = 1.49618
    c2: float = 1.49618
    vmax: float = 0.5
    swarm_pick: str = "random"
    n_arcs: int = 4
    eps_range: tuple[float, float] = (30.0, 80.0)
    sigma_range: tuple[float, float] = (0.5, 3.0)
    d_range: tuple[float, float] = (0.002, 0.02)
    # run
    seed: int = 0
    method: str = "sbd"
    chi: float = 0.005
    workers: int = 1
    out: str = "out"

    def __post_init__(self):
        if self.tissue not in TISSUE_TABLES:
            raise FormatError(f"unknown tissue table {self.tissue!r}; choose from {sorted(TISSUE_TABLES)}")
        if self.phantom not in ("ideal", "segmented"):
            raise FormatError("phantom must be 'ideal' or 'segmented'")
        if self.tumor not in ("none", "ellipse"):
            raise FormatError("tumor must be 'none' or 'ellipse'")
        if self.method not in ("sbd", "ea"):
            raise FormatError("method must be 'sbd' or 'ea'")

    @property
    def table(self):
        return TISSUE_TABLES[self.tissue]

    @property
    def background(self) -> tuple[float, float]:
        bg = self.table.background
        return (bg[0] if self.eps_b is None else self.eps_b, bg[1] if self.sigma_b is None else self.sigma_b)

    @property
    def setup(self) -> ImagingSetup:
        return ImagingSetup(self.frequency, *self.background, self.n_antennas, self.ring_radius)

    @property
    def forward_grid(self) -> Grid:
        return Grid(self.side_length, self.n_forward)

    @property
    def inverse_grid(self) -> Grid:
        return Grid(self.side_length, self.n_inverse)

    @property
    def truth(self) -> EllipseTumor | None:
        if self.tumor == "none":
            return None
        return EllipseTumor(
            self.tumor_eps, self.tumor_sigma, (self.tumor_x, self.tumor_y), (self.tumor_a, self.tumor_b), self.tumor_angle
        )

    def optimizer(self, seed: int | None = None) -> SbdConfig:
        return SbdConfig(
            P=self.P, I=self.I, B0=self.B0, seed=self.seed if seed is None else seed,
            inertia=self.inertia, c1=self.c1, c2=self.c2, vmax=self.vmax, swarm_pick=self.swarm_pick,
        )

    def override(self, **kwargs) -> RunConfig:
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


# key -> (section, parser)
def _pair(text: str, conv=float) -> tuple[float, float]:
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    if len(parts) != 2:
        raise FormatError(f"expected two values, got {text!r}")
    return (conv(parts[0]), conv(parts[1]))


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "yes", "true", "on"):
        return True
    if t in ("0", "no", "false", "off"):
        return False
    raise FormatError(f"not a boolean: {text!r}")


def _float(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "off", "none"):
        return np.inf
    return float(t)


_KEYS = {
    "setup": {
        "frequency": parse_frequency, "n_antennas": int, "ring_radius": parse_length,
        "tissue": str, "eps_b": float, "sigma_b": float,
    },
    "grid": {
        "side_length": parse_length, "n_forward": int, "n_inverse": int, "allow_inverse_crime": _bool,
    },
    "phantom": {"kind": str, "breast_radius": parse_length, "seed": int},
    "tumor": {
        "kind": str, "eps": float, "sigma": float, "x": parse_length, "y": parse_length,
        "semi_a": parse_length, "semi_b": parse_length, "angle": float,
    },
    "noise": {"snr_db": _float},
    "optimizer": {
        "P": int, "I": int, "B0": int, "inertia": float, "c1": float, "c2": float, "vmax": float,
        "swarm_pick": str, "n_arcs": int, "eps_range": _pair,
        "sigma_range": _pair, "d_range": lambda t: tuple(parse_length(p) for p in re.split(r"\s*,\s*", t.strip())),
    },
    "run": {"seed": int, "method": str, "chi": parse_length, "workers": int, "out": str},
}

_RENAME = {
    ("phantom", "kind"): "phantom", ("phantom", "seed"): "phantom_seed",
    ("tumor", "kind"): "tumor", ("tumor", "eps"): "tumor_eps", ("tumor", "sigma"): "tumor_sigma",
    ("tumor", "x"): "tumor_x", ("tumor", "y"): "tumor_y", ("tumor", "semi_a"): "tumor_a",
    ("tumor", "semi_b"): "tumor_b", ("tumor", "angle"): "tumor_angle",
}


def load_config(path=None, text: str | None = None) -> RunConfig:
    """Read a configuration file (or string); missing keys keep their defaults."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    if path is not None:
        text = Path(path).read_text()
    if text:
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise FormatError(str(exc)) from exc
    values = {}
    for section in parser.sections():
        if section not in _KEYS:
            raise FormatError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            conv = _KEYS[section].get(key)
            if conv is None:
                raise FormatError(f"unknown key {key!r} in [{section}]")
            try:
                val = conv(raw)
            except ValueError as exc:
                raise FormatError(f"[{section}] {key}: {exc}") from exc
            values[_RENAME.get((section, key), key)] = val
    if "d_range" in values and len(values["d_range"]) != 2:
        raise FormatError("d_range needs two lengths")
    known = {f.name for f in fields(RunConfig)}
    assert set(values) <= known
    return RunConfig(**values)
