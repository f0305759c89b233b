"""Independent reference computations used by the tests.

Nothing here imports the numerical kernels under test: special functions
come from mpmath, cell integrals from adaptive quadrature, the cylinder
field from its Bessel series and the Kriging formulas from explicit loops.
"""

from __future__ import annotations

import mpmath as mp
import numpy as np
from scipy import integrate
from scipy.special import h2vp, hankel2, jv, jvp


def mp_hankel2(n: int, z: complex) -> complex:
    return complex(mp.besselj(n, z) - 1j * mp.bessely(n, z))


def mp_besselj(n: int, x: float) -> float:
    return float(mp.besselj(n, x))


def mp_bessely(n: int, x: float) -> float:
    return float(mp.bessely(n, x))


def cell_integral_quad(k: complex, a: float, d: float) -> complex:
    """``-j k^2/4`` times the integral of ``H0^(2)(k|r - c|)`` over a disk.

    The disk has radius ``a``; its centre sits at distance ``d`` from the
    observation point, which must lie outside the disk.
    """

    def f(r, t, part):
        rho = np.sqrt(d * d + r * r - 2 * d * r * np.cos(t))
        val = -0.25j * k * k * hankel2(0, k * rho) * r
        return val.real if part == 0 else val.imag

    re = integrate.dblquad(lambda t, r: f(r, t, 0), 0, a, 0, 2 * np.pi, epsabs=1e-13, epsrel=1e-11)[0]
    im = integrate.dblquad(lambda t, r: f(r, t, 1), 0, a, 0, 2 * np.pi, epsabs=1e-13, epsrel=1e-11)[0]
    return re + 1j * im


def self_integral_quad(k: complex, a: float) -> complex:
    """Self-cell integral on a disk centred on the observation point."""

    def f(r, part):
        val = -0.25j * k * k * hankel2(0, k * r) * r * 2 * np.pi
        return val.real if part == 0 else val.imag

    re = integrate.quad(lambda r: f(r, 0), 0, a, limit=200, epsabs=1e-13)[0]
    im = integrate.quad(lambda r: f(r, 1), 0, a, limit=200, epsabs=1e-13)[0]
    return re + 1j * im


def cylinder_scattered(k0: complex, k1: complex, a: float, src, obs, nmax: int = 40) -> np.ndarray:
    """Scattered field of a penetrable circular cylinder (centred at the origin).

    Illuminated by a unit line current at ``src`` radiating
    ``-(j/4) H0^(2)(k0 |r - r_s|)``; ``obs`` are points outside the cylinder.
    """
    src = np.asarray(src, dtype=float)
    obs = np.atleast_2d(obs)
    rs, ps = np.hypot(*src), np.arctan2(src[1], src[0])
    r = np.hypot(obs[:, 0], obs[:, 1])
    p = np.arctan2(obs[:, 1], obs[:, 0])
    out = np.zeros(len(obs), dtype=complex)
    for n in range(-nmax, nmax + 1):
        amp = -0.25j * hankel2(n, k0 * rs)
        num = k1 * jvp(n, k1 * a) * jv(n, k0 * a) - k0 * jvp(n, k0 * a) * jv(n, k1 * a)
        den = k0 * h2vp(n, k0 * a) * jv(n, k1 * a) - k1 * jvp(n, k1 * a) * hankel2(n, k0 * a)
        out += amp * num / den * hankel2(n, k0 * r) * np.exp(1j * n * (p - ps))
    return out


def disk_fraction(centers: np.ndarray, h: float, radius: float, sub: int = 20) -> np.ndarray:
    """Area fraction of each square cell inside a disk centred at the origin."""
    offs = ((np.arange(sub) + 0.5) / sub - 0.5) * h
    frac = np.zeros(len(centers))
    for dx in offs:
        for dy in offs:
            frac += np.hypot(centers[:, 0] + dx, centers[:, 1] + dy) < radius
    return frac / sub**2


def count_points_in_circle(centers: np.ndarray, c, radius: float) -> int:
    return sum(1 for x, y in centers if (x - c[0]) ** 2 + (y - c[1]) ** 2 < radius**2)


def kriging_bruteforce(x, y, theta, nu, points, dps: int = 40):
    """Ordinary Kriging written out with explicit double sums.

    Evaluated in ``dps``-digit arithmetic so the oracle stays accurate even
    when the correlation matrix is poorly conditioned. Returns
    ``(gamma, xi2, phi_hat, varsigma)``, the last two for every row of
    ``points``.
    """
    x = np.asarray(x, dtype=float)
    y = [mp.mpf(float(v)) for v in np.ravel(y)]
    b = len(y)
    with mp.workdps(dps):

        def w(a, c):
            return mp.exp(-sum(mp.mpf(float(theta[k])) * abs(mp.mpf(float(a[k])) - mp.mpf(float(c[k]))) ** mp.mpf(nu) for k in range(len(a))))

        u = mp.matrix([[w(x[i], x[j]) for j in range(b)] for i in range(b)]) ** -1
        gamma = sum(u[i, j] * y[j] for i in range(b) for j in range(b)) / sum(u[i, j] for i in range(b) for j in range(b))
        xi2 = sum((y[i] - gamma) * u[i, j] * (y[j] - gamma) for i in range(b) for j in range(b)) / b
        phi, sig = [], []
        for p in np.atleast_2d(points):
            wv = [w(p, x[i]) for i in range(b)]
            phi.append(gamma + sum(wv[i] * u[i, j] * (y[j] - gamma) for i in range(b) for j in range(b)))
            quad = sum(wv[i] * u[i, j] * wv[j] for i in range(b) for j in range(b))
            sig.append(2 * mp.sqrt(xi2) * mp.sqrt(max(mp.mpf(0), 1 - quad)))
        return float(gamma), float(xi2), np.array([float(v) for v in phi]), np.array([float(v) for v in sig])
