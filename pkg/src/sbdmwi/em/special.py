"""Bessel and Hankel functions used by the scattering kernels.

Thin wrappers over :mod:`scipy.special`; the wrappers pin down the domain
checks and the outgoing-wave convention used throughout the package
(time dependence ``exp(+j 2 pi f t)``, hence Hankel functions of the second
kind).
"""

import math

import numpy as np
from scipy import special as sps


def bessel_j0_y0_j1(x):
    """Return ``(J0(x), Y0(x), J1(x))`` for real ``x >= 0``.

    Raises
    ------
    ValueError
        If ``x`` is negative, not finite, or zero (``Y0`` diverges there).
    """
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise ValueError(f"argument must be finite and >= 0, got {x}")
    if x == 0.0:
        raise ValueError("Y0 is singular at x = 0")
    return float(sps.j0(x)), float(sps.y0(x)), float(sps.j1(x))


def bessel_j0_j1(x):
    """``(J0(x), J1(x))``, defined on the whole real axis including 0."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"argument must be finite, got {x}")
    return float(sps.j0(x)), float(sps.j1(x))


def hankel2_0(z):
    """Zeroth order Hankel function of the second kind, ``J0 - j Y0``."""
    return sps.hankel2(0, np.asarray(z))


def hankel2_1(z):
    """First order Hankel function of the second kind."""
    return sps.hankel2(1, np.asarray(z))
