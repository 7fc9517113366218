"""Square uniform planar arrays, element positions and per-element gain patterns."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ArraySpec",
    "ElementPattern",
    "build_array",
    "element_gain",
    "pair_geometry",
]

_BORESIGHTS = ("+z", "-z")


@dataclass(frozen=True)
class ArraySpec:
    """A (2N+1) x (2N+1) square array centred on the z-axis.

    Elements are indexed ``i, j`` in ``-N..N`` with coordinates
    ``(i*spacing, j*spacing, z_position)``. ``half_index`` is N, so the
    aperture half-width is ``N*spacing``. The boresight points along +z
    or -z; two arrays facing each other use +z on the transmit side and
    -z on the receive side.
    """

    half_index: int
    spacing: float
    z_position: float
    boresight: str = "+z"

    def __post_init__(self) -> None:
        if self.half_index < 0:
            raise ValueError(f"half_index must be >= 0, got {self.half_index}")
        if self.spacing <= 0:
            raise ValueError(f"spacing must be > 0, got {self.spacing}")
        if self.boresight not in _BORESIGHTS:
            raise ValueError(f"boresight must be one of {_BORESIGHTS}, got {self.boresight!r}")

    @property
    def side_count(self) -> int:
        return 2 * self.half_index + 1

    @property
    def element_count(self) -> int:
        return self.side_count**2

    @property
    def half_width(self) -> float:
        """Coordinate of the outermost element along either axis."""
        return self.half_index * self.spacing

    @property
    def boresight_vector(self) -> np.ndarray:
        return np.array([0.0, 0.0, 1.0 if self.boresight == "+z" else -1.0])


@dataclass(frozen=True)
class ElementPattern:
    """Directional gain of a single antenna element.

    ``isotropic`` returns unit linear gain at every angle. ``directional``
    is the parametric single-element shape
    ``G_dB(theta) = max_gain_dbi - min(12*(theta/rolloff)^2, floor)``,
    maximal at boresight and clamped ``attenuation_floor_db`` below the
    maximum far off axis.
    """

    kind: str = "isotropic"
    max_gain_dbi: float = 8.0
    rolloff_angle_deg: float = 65.0
    attenuation_floor_db: float = 30.0

    def __post_init__(self) -> None:
        if self.kind not in ("isotropic", "directional"):
            raise ValueError(f"pattern kind must be 'isotropic' or 'directional', got {self.kind!r}")
        if self.rolloff_angle_deg <= 0:
            raise ValueError("rolloff_angle_deg must be > 0")
        if self.attenuation_floor_db < 0:
            raise ValueError("attenuation_floor_db must be >= 0")


def build_array(spec: ArraySpec) -> np.ndarray:
    """Element positions of ``spec`` as an ``(element_count, 3)`` array.

    Canonical row-major ordering, i outer and j inner: the element (i, j)
    lands at row ``(i+N)*(2N+1) + (j+N)``. All consumers of element-indexed
    vectors and matrices rely on this ordering.
    """
    idx = np.arange(-spec.half_index, spec.half_index + 1, dtype=float) * spec.spacing
    x = np.repeat(idx, spec.side_count)
    y = np.tile(idx, spec.side_count)
    z = np.full_like(x, spec.z_position)
    return np.column_stack([x, y, z])


def element_gain(pattern: ElementPattern, angle: float | np.ndarray) -> float | np.ndarray:
    """Linear power gain of ``pattern`` at ``angle`` radians off boresight.

    ``angle`` must lie in [0, pi]; scalar in, scalar out.
    """
    theta = np.asarray(angle, dtype=float)
    if np.any(theta < 0.0) or np.any(theta > np.pi):
        raise ValueError("off-boresight angle must lie in [0, pi]")
    if pattern.kind == "isotropic":
        gain = np.ones_like(theta)
    else:
        ratio = np.degrees(theta) / pattern.rolloff_angle_deg
        loss_db = np.minimum(12.0 * ratio**2, pattern.attenuation_floor_db)
        gain = 10.0 ** ((pattern.max_gain_dbi - loss_db) / 10.0)
    return float(gain) if np.ndim(angle) == 0 else gain


def pair_geometry(
    tx_pos: np.ndarray,
    rx_pos: np.ndarray,
    tx_boresight: np.ndarray = (0.0, 0.0, 1.0),
    rx_boresight: np.ndarray = (0.0, 0.0, -1.0),
) -> tuple[float, float, float]:
    """Distance and off-boresight angles for one TX/RX element pair.

    Returns ``(distance, tx_angle, rx_angle)``, with each angle measured
    between the ray connecting the two elements and the respective
    boresight direction.
    """
    tx = np.asarray(tx_pos, dtype=float)
    rx = np.asarray(rx_pos, dtype=float)
    ray = rx - tx
    distance = float(np.linalg.norm(ray))
    if distance == 0.0:
        raise ValueError("TX and RX positions coincide")
    tx_b = np.asarray(tx_boresight, dtype=float)
    rx_b = np.asarray(rx_boresight, dtype=float)
    cos_tx = np.clip(ray @ tx_b / (distance * np.linalg.norm(tx_b)), -1.0, 1.0)
    cos_rx = np.clip(-ray @ rx_b / (distance * np.linalg.norm(rx_b)), -1.0, 1.0)
    return distance, float(np.arccos(cos_tx)), float(np.arccos(cos_rx))
