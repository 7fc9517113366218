"""Hermite-Gaussian beam modes and their propagation geometry.

A mode is indexed by a pair (l, m) of non-negative integers. Fields are
evaluated directly from the closed-form paraxial solution; the transverse
profile is built from normalized Hermite functions evaluated by a stable
recurrence, so high orders neither overflow nor lose the unit L2 norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate

__all__ = [
    "BeamGeometry",
    "BeamParameters",
    "ModeIndex",
    "beam_geometry",
    "captured_power",
    "hermite_1d",
    "hg_field",
    "optimal_waist",
]


class ModeIndex(NamedTuple):
    """Transverse mode orders along x and y."""

    l: int
    m: int


@dataclass(frozen=True)
class BeamParameters:
    """Waist, wavelength and the two array planes of a beam link.

    The focal plane sits at z = 0; ``tx_z`` is negative and ``rx_z``
    positive. The Rayleigh distance ``pi * waist^2 / wavelength`` controls
    beam spreading away from the focal plane.
    """

    waist: float
    wavelength: float
    tx_z: float
    rx_z: float

    def __post_init__(self) -> None:
        if self.waist <= 0 or self.wavelength <= 0:
            raise ValueError("waist and wavelength must be > 0")
        if not self.tx_z < self.rx_z:
            raise ValueError("tx_z must lie below rx_z along the propagation axis")

    @property
    def rayleigh_distance(self) -> float:
        return np.pi * self.waist**2 / self.wavelength

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi / self.wavelength

    @classmethod
    def symmetric(cls, waist: float, wavelength: float, distance: float) -> "BeamParameters":
        """Arrays placed symmetrically about the focal plane, ``distance`` apart."""
        return cls(waist=waist, wavelength=wavelength, tx_z=-0.5 * distance, rx_z=0.5 * distance)


class BeamGeometry(NamedTuple):
    radius: float
    inverse_curvature: float
    gouy_base: float


def beam_geometry(params: BeamParameters, z: float) -> BeamGeometry:
    """Beam radius, inverse wavefront curvature and base Gouy angle at plane z.

    The curvature is returned as 1/R(z) = z / (z^2 + Z_ray^2), finite at the
    focal plane where R itself diverges. The full Gouy phase of mode (l, m)
    is ``(1 + l + m) * gouy_base``.
    """
    zr = params.rayleigh_distance
    radius = params.waist * np.sqrt(1.0 + (z / zr) ** 2)
    return BeamGeometry(
        radius=float(radius),
        inverse_curvature=z / (z**2 + zr**2),
        gouy_base=float(np.arctan2(z, zr)),
    )


def optimal_waist(wavelength: float, distance: float) -> BeamParameters:
    """Waist minimizing the beam radius on two planes ``distance`` apart.

    With symmetric placement the minimizing waist is
    ``sqrt(wavelength * distance / (2 pi))``; the resulting Rayleigh distance
    equals half the separation, and the radius at either plane is
    ``sqrt(2)`` times the waist.
    """
    if wavelength <= 0 or distance <= 0:
        raise ValueError("wavelength and distance must be > 0")
    waist = math.sqrt(wavelength * (0.5 * distance) / math.pi)
    return BeamParameters.symmetric(waist=waist, wavelength=wavelength, distance=distance)


def hermite_1d(n: int, xi: float | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Physicists' Hermite polynomial H_n and the normalized Hermite function.

    Returns ``(H_n(xi), phi_n(xi))`` where
    ``phi_n = H_n(xi) exp(-xi^2/2) / sqrt(2^n n! sqrt(pi))`` has unit L2 norm
    on the real line. ``phi_n`` is computed by its own normalized three-term
    recurrence, never forming ``2^n n!``; the raw polynomial overflows for
    large n and is intended for small-order checks.
    """
    if n < 0:
        raise ValueError("Hermite order must be >= 0")
    x = np.asarray(xi, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        h_prev = np.ones_like(x)
        h = 2.0 * x if n >= 1 else h_prev
        for k in range(1, n):
            h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    phi = _hermite_functions(n, x)[n]
    return h, phi


def _hermite_functions(n_max: int, x: np.ndarray) -> np.ndarray:
    """All normalized Hermite functions up to order n_max, shape (n_max+1, *x.shape)."""
    out = np.empty((n_max + 1,) + x.shape, dtype=float)
    out[0] = np.pi ** (-0.25) * np.exp(-0.5 * x**2)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(1, n_max):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * x * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def hg_field(
    mode: ModeIndex | tuple[int, int],
    x: float | np.ndarray,
    y: float | np.ndarray,
    z: float,
    params: BeamParameters,
) -> np.ndarray:
    """Complex Hermite-Gaussian field of ``mode`` at points (x, y) on plane z.

    The transverse profile is sqrt(2)/w(z) times the normalized Hermite
    functions of sqrt(2)x/w and sqrt(2)y/w, so the continuous-plane power
    integral is exactly 1 for every mode and plane. The propagation phase
    combines the quadratic curvature term, the (1+l+m) Gouy advance and the
    plane-wave carrier exp(-j k z).
    """
    l, m = mode
    if l < 0 or m < 0:
        raise ValueError("mode indices must be >= 0")
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    geo = beam_geometry(params, z)
    w = geo.radius
    k = params.wavenumber
    order = max(l, m)
    phi_x = _hermite_functions(order, np.sqrt(2.0) * xs / w)[l]
    phi_y = _hermite_functions(order, np.sqrt(2.0) * ys / w)[m]
    rho2 = xs**2 + ys**2
    phase = (
        -0.5 * k * rho2 * geo.inverse_curvature
        + (1 + l + m) * geo.gouy_base
        - k * z
    )
    return (np.sqrt(2.0) / w) * phi_x * phi_y * np.exp(1j * phase)


def _axis_capture(order: int, alpha: float) -> float:
    """Fraction of a normalized Hermite function's power inside |u| <= alpha."""
    if alpha == 0.0:
        return 0.0
    # The density is negligible beyond the classical turning point; clamp the
    # interval so adaptive quadrature never chases an empty far tail.
    turning = math.sqrt(2.0 * order + 1.0)
    upper = min(alpha, turning + 25.0)
    density = lambda u: float(_hermite_functions(order, np.asarray(u))[order] ** 2)
    breakpoints = [p for p in (turning,) if 0.0 < p < upper]
    value, _ = integrate.quad(density, 0.0, upper, points=breakpoints or None, limit=200)
    return 2.0 * value


def captured_power(mode: ModeIndex | tuple[int, int], half_width_over_radius: float) -> float:
    """Power fraction of ``mode`` captured by a square aperture.

    The aperture half-width ``a`` is given relative to the beam radius
    ``w(z)`` at the aperture plane. The unit-power mode separates per axis,
    so the fraction is the product of two 1-D integrals of the normalized
    Hermite function densities over ``|u| <= sqrt(2) a / w``.
    """
    l, m = mode
    if half_width_over_radius < 0:
        raise ValueError("aperture half-width must be >= 0")
    alpha = math.sqrt(2.0) * half_width_over_radius
    fraction = _axis_capture(l, alpha) * _axis_capture(m, alpha)
    return float(min(max(fraction, 0.0), 1.0))
