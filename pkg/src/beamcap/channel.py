"""Antenna-domain LOS channel: link budget, Friis matrix fill and its SVD."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .arrays import ArraySpec, ElementPattern, build_array, element_gain

__all__ = [
    "BOLTZMANN_J_PER_K",
    "LinkBudget",
    "NativeChannel",
    "NoisePower",
    "SingularTriple",
    "build_native_channel",
    "decompose",
    "friis_coefficient",
    "noise_power",
    "watts_to_dbm",
]

BOLTZMANN_J_PER_K = 1.380649e-23
_REFERENCE_TEMP_K = 290.0


def watts_to_dbm(power_w: float) -> float:
    return 10.0 * np.log10(power_w * 1e3)


@dataclass(frozen=True)
class LinkBudget:
    """Carrier, power and noise parameters of the point-to-point link.

    ``wavelength_m`` is normally derived from the carrier frequency; passing
    it explicitly pins the wavelength exactly (convenient for desk-checkable
    phases such as a separation of an integer number of wavelengths) and the
    carrier frequency is re-derived so that
    ``wavelength = speed_of_light / carrier_frequency`` always holds.
    """

    carrier_frequency_hz: float
    bandwidth_hz: float
    tx_power_dbm: float
    noise_figure_db: float
    distance_m: float
    speed_of_light: float = 299792458.0
    wavelength_m: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.wavelength_m is None:
            if self.carrier_frequency_hz <= 0:
                raise ValueError("carrier_frequency_hz must be > 0")
            object.__setattr__(self, "wavelength_m", self.speed_of_light / self.carrier_frequency_hz)
        else:
            if self.wavelength_m <= 0:
                raise ValueError("wavelength_m must be > 0")
            object.__setattr__(self, "carrier_frequency_hz", self.speed_of_light / self.wavelength_m)
        for name in ("bandwidth_hz", "distance_m", "speed_of_light"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def tx_power_w(self) -> float:
        return 10.0 ** (self.tx_power_dbm / 10.0) * 1e-3

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi / self.wavelength_m


class NoisePower(NamedTuple):
    watts: float
    dbm: float


def noise_power(link: LinkBudget) -> NoisePower:
    """Thermal noise power over the link bandwidth, including the RX noise figure.

    ``sigma^2 = k_B * 290 K * B * 10^(NF/10)``.
    """
    watts = (
        BOLTZMANN_J_PER_K
        * _REFERENCE_TEMP_K
        * link.bandwidth_hz
        * 10.0 ** (link.noise_figure_db / 10.0)
    )
    return NoisePower(watts=watts, dbm=watts_to_dbm(watts))


def friis_coefficient(
    wavelength: float,
    distance: float,
    g_tx: float = 1.0,
    g_rx: float = 1.0,
) -> complex:
    """Complex free-space amplitude coupling one TX element to one RX element.

    ``h = lambda/(4 pi d) * sqrt(g_tx g_rx) * exp(-j 2 pi d / lambda)`` so that
    ``|h|^2`` is the Friis received/transmitted power ratio.
    """
    if distance <= 0:
        raise ZeroDivisionError("Friis coefficient is singular at zero distance")
    if wavelength <= 0:
        raise ValueError("wavelength must be > 0")
    amplitude = wavelength / (4.0 * np.pi * distance) * np.sqrt(g_tx * g_rx)
    return complex(amplitude * np.exp(-2j * np.pi * distance / wavelength))


@dataclass(frozen=True)
class NativeChannel:
    """Antenna-domain channel matrix (RX elements x TX elements)."""

    matrix: np.ndarray
    tx: ArraySpec
    rx: ArraySpec


def build_native_channel(
    tx: ArraySpec,
    rx: ArraySpec,
    link: LinkBudget,
    pattern: ElementPattern = ElementPattern(),
) -> NativeChannel:
    """Fill the per-pair Friis channel between two facing arrays.

    Every entry ``H[r, t]`` is the Friis coefficient of the (t, r) element
    pair with the per-element directional gains evaluated at the pair's
    off-boresight angles. Deterministic for fixed inputs; element ordering
    follows :func:`beamcap.arrays.build_array`.
    """
    tx_pos = build_array(tx)
    rx_pos = build_array(rx)
    ray = rx_pos[None, :, :] - tx_pos[:, None, :]  # (tx, rx, 3)
    dist = np.sqrt(np.einsum("trk,trk->tr", ray, ray))
    if np.any(dist == 0.0):
        raise ZeroDivisionError("arrays overlap: at least one TX/RX pair has zero separation")
    cos_tx = np.clip(ray @ tx.boresight_vector / dist, -1.0, 1.0)
    cos_rx = np.clip(-(ray @ rx.boresight_vector) / dist, -1.0, 1.0)
    gains = element_gain(pattern, np.arccos(cos_tx)) * element_gain(pattern, np.arccos(cos_rx))
    lam = link.wavelength_m
    h = lam / (4.0 * np.pi * dist) * np.sqrt(gains) * np.exp(-2j * np.pi * dist / lam)
    return NativeChannel(matrix=h.T.copy(), tx=tx, rx=rx)


@dataclass(frozen=True)
class SingularTriple:
    """SVD factors with ``H = U @ diag(s) @ V.conj().T`` and s descending."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def vh(self) -> np.ndarray:
        return self.v.conj().T


def decompose(channel) -> SingularTriple:
    """Singular value decomposition with a deterministic phase convention.

    Accepts a :class:`NativeChannel`, any object carrying a ``matrix``
    attribute, or a plain 2-D complex array. Each column of V is rotated so
    that its largest-magnitude entry is real and positive, with the matching
    column of U rotated identically (the product U S V^H is unchanged), so
    two runs produce comparable singular vectors.
    """
    h = np.asarray(getattr(channel, "matrix", channel))
    if not np.all(np.isfinite(h.view(float) if np.iscomplexobj(h) else h)):
        raise ValueError("channel matrix contains non-finite entries")
    u, s, vh = np.linalg.svd(h, full_matrices=False)
    v = vh.conj().T
    anchor = np.argmax(np.abs(v), axis=0)
    cols = np.arange(v.shape[1])
    pivot = v[anchor, cols]
    phase = np.where(np.abs(pivot) > 0, pivot / np.where(np.abs(pivot) > 0, np.abs(pivot), 1.0), 1.0)
    v = v * phase.conj()
    u = u * phase.conj()
    return SingularTriple(u=u, s=s, v=v)
