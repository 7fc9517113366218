"""Figure rendering for the emitted datasets (PNG files next to the CSVs)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "allocation_bars",
    "capacity_convergence",
    "captured_power_sweep",
    "residual_curves",
    "singular_spectrum",
    "spectrum_comparison",
]

_DPI = 150


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def singular_spectrum(path, s: np.ndarray) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    k = np.arange(1, len(s) + 1)
    floor = np.finfo(float).tiny
    ax.plot(k, 20.0 * np.log10(np.maximum(s, floor)), lw=1.2)
    ax.set_xlabel("singular value index k")
    ax.set_ylabel("singular value [dB]")
    ax.set_title("Singular values of the antenna-domain channel")
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def captured_power_sweep(path, grid, curves: dict, operating_point: float | None = None) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    shown = [(0, 0), (1, 1), (2, 2), (4, 4), (8, 8), (8, 0)]
    for mode in shown:
        if mode in curves:
            ax.plot(grid, curves[mode], label=f"({mode[0]},{mode[1]})", lw=1.2)
    if operating_point is not None:
        ax.axvline(operating_point, color="k", ls=":", lw=1, label="array a/w")
    ax.set_xlabel("aperture half-width / beam radius a/w")
    ax.set_ylabel("captured power fraction")
    ax.set_title("Power captured by a square aperture per mode")
    ax.set_ylim(0, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8, title="(l,m)")
    _save(fig, path)


def residual_curves(path, l_values, table: np.ndarray) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    k = np.arange(1, table.shape[0] + 1)
    floor = 1e-17
    for col, l_max in enumerate(l_values):
        ax.semilogy(k, np.maximum(table[:, col], floor), lw=1.2, label=f"L={l_max}")
    ax.set_xlabel("singular mode index k")
    ax.set_ylabel("residual representation error")
    ax.set_title("Projection residual of singular modes vs beam-space size")
    ax.grid(True, alpha=0.3, which="both")
    ax.legend(fontsize=8, ncol=3)
    _save(fig, path)


def spectrum_comparison(path, s_native: np.ndarray, s_hg: np.ndarray, l_max: int) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    floor = np.finfo(float).tiny
    n = min(len(s_native), 2 * len(s_hg))
    ax.plot(
        np.arange(1, n + 1),
        20.0 * np.log10(np.maximum(s_native[:n], floor)),
        lw=1.2,
        label="antenna domain",
    )
    ax.plot(
        np.arange(1, len(s_hg) + 1),
        20.0 * np.log10(np.maximum(s_hg, floor)),
        "--",
        lw=1.2,
        label=f"beam domain (L={l_max})",
    )
    ax.set_xlabel("singular value index k")
    ax.set_ylabel("singular value [dB]")
    ax.set_title("Native vs beam-domain singular values")
    ax.grid(True, alpha=0.3)
    ax.legend()
    _save(fig, path)


def capacity_convergence(path, records, native_se: float | None = None) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    l_values = [r.l_max for r in records]
    se = [r.spectral_efficiency for r in records]
    ax.plot(l_values, se, "o-", lw=1.2, label="beam-space capacity")
    if native_se is not None:
        ax.axhline(native_se, color="r", lw=1.2, label="native channel capacity")
    ax.set_xlabel("maximum mode index L")
    ax.set_ylabel("spectral efficiency [bits/s/Hz]")
    ax.set_title("Capacity convergence with growing beam space")
    ax.grid(True, alpha=0.3)
    ax.legend()
    _save(fig, path)


def mode_profiles(path, positions: np.ndarray, fields: dict, side_count: int) -> None:
    n = len(fields)
    cols = 3
    rows = (n + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(3 * cols, 2.8 * rows))
    extent_m = positions[:, 0].max()
    for ax, (mode, field) in zip(np.atleast_1d(axes).ravel(), fields.items()):
        intensity = np.abs(field.reshape(side_count, side_count)) ** 2
        ax.imshow(
            intensity.T,
            origin="lower",
            extent=(-extent_m, extent_m, -extent_m, extent_m),
            cmap="viridis",
        )
        ax.set_title(f"({mode[0]},{mode[1]})", fontsize=9)
        ax.set_xticks([])
        ax.set_yticks([])
    for ax in np.atleast_1d(axes).ravel()[n:]:
        ax.axis("off")
    fig.suptitle("Mode intensity on the transmit array")
    _save(fig, path)


def allocation_bars(path, s: np.ndarray, alloc, noise_w: float) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    active = alloc.powers > 0
    n_show = max(int(np.count_nonzero(active)) + 5, 10)
    n_show = min(n_show, len(s))
    k = np.arange(1, n_show + 1)
    inv_gain = noise_w / np.maximum(s[:n_show], np.finfo(float).tiny) ** 2
    ax.bar(k, inv_gain, color="0.7", label="noise / gain")
    ax.bar(k, alloc.powers[:n_show], bottom=inv_gain, color="tab:blue", label="allocated power")
    ax.axhline(alloc.water_level, color="tab:red", ls="--", label="water level")
    ax.set_xlabel("singular mode index k")
    ax.set_ylabel("power [W]")
    ax.set_title("Water-filling power allocation")
    ax.set_ylim(0, 2.5 * alloc.water_level)
    ax.grid(True, alpha=0.3, axis="y")
    ax.legend()
    _save(fig, path)
