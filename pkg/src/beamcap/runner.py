"""Experiment orchestration: compute datasets, write CSV/JSON/figures, manifest.

Each subcommand produces the delimited dataset(s) behind one of the standard
result views (native singular spectrum, captured-power sweep, projection
residuals, beam-domain spectrum, capacity convergence trace) plus a rendered
figure per dataset. Outputs are deterministic for a fixed configuration and
seed; the manifest records every emitted file with its content hash along
with per-stage timings.
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import matplotlib
import numpy as np

from . import __version__, figures
from .arrays import build_array, pair_geometry
from .beamspace import (
    basis_prefix,
    build_beam_basis,
    compress_channel,
    ls_estimate,
    make_channel_source,
    project_field,
)
from .capacity import effective_rank, iterative_capacity, spectral_efficiency, water_fill
from .channel import build_native_channel, decompose, friis_coefficient, noise_power, watts_to_dbm
from .config import ExperimentConfig
from .hgmodes import beam_geometry, captured_power, hg_field

__all__ = ["OutputBundle", "StageError", "SUBCOMMANDS", "run"]

SUBCOMMANDS = ("link-budget", "native", "capture", "project", "beamspace", "capacity", "all")

# Snapshot sizes for the fixed-size datasets: the beam-domain spectrum is
# reported at 81 modes, the residual curves sweep the same frontier range.
SNAPSHOT_L_MAX = 8
RESIDUAL_L_VALUES = tuple(range(SNAPSHOT_L_MAX + 1))
RESIDUAL_MODE_COUNT = 100
CAPTURE_GRID = tuple(np.round(np.linspace(0.0, 3.0, 61), 4))
CAPTURE_MODES = tuple((l, 0) for l in range(9)) + tuple((l, l) for l in range(1, 9))
PROFILE_MODES = ((0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (3, 3))


def _scipy_version() -> str:
    import scipy

    return scipy.__version__


class StageError(RuntimeError):
    """A computation stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class OutputBundle:
    """Where a run wrote its results and the manifest that indexes them."""

    out_dir: Path
    manifest: dict

    @property
    def files(self) -> tuple[str, ...]:
        return tuple(entry["name"] for entry in self.manifest["files"])

    def path(self, name: str) -> Path:
        return self.out_dir / name


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


class _Emitter:
    """Collects emitted files and their hashes under one output directory."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.entries: list[dict] = []

    def _register(self, path: Path) -> None:
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        self.entries.append(
            {"name": path.name, "sha256": digest, "size_bytes": path.stat().st_size}
        )

    def csv(self, name: str, header: Iterable[str], rows: Iterable[Iterable]) -> Path:
        path = self.out_dir / name
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(list(header))
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        self._register(path)
        return path

    def json(self, name: str, payload: dict) -> Path:
        path = self.out_dir / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        self._register(path)
        return path

    def npy(self, name: str, array: np.ndarray) -> Path:
        path = self.out_dir / name
        np.save(path, array)
        self._register(path)
        return path

    def figure(self, name: str, render, *args, **kwargs) -> Path:
        path = self.out_dir / name
        render(path, *args, **kwargs)
        self._register(path)
        return path


class _Workspace:
    """Lazily computed shared state for the experiment stages."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.link = config.link_budget()
        self.noise = noise_power(self.link)
        self.tx = config.tx_spec()
        self.rx = config.rx_spec()
        self.pattern = config.element_pattern()
        self.params = config.beam_parameters()
        self._native = None
        self._svd = None
        self._tx_basis = None
        self._rx_basis = None

    @property
    def native(self):
        if self._native is None:
            self._native = build_native_channel(self.tx, self.rx, self.link, self.pattern)
        return self._native

    @property
    def svd(self):
        if self._svd is None:
            self._svd = decompose(self.native)
        return self._svd

    def bases(self, l_max: int):
        if self._tx_basis is None or len(self._tx_basis.modes) < (l_max + 1) ** 2:
            drop_tol = self.config.algorithm.drop_tol
            self._tx_basis = build_beam_basis(self.tx, self.params, l_max, drop_tol)
            self._rx_basis = build_beam_basis(self.rx, self.params, l_max, drop_tol)
        n = (l_max + 1) ** 2
        return basis_prefix(self._tx_basis, n), basis_prefix(self._rx_basis, n)

    def native_capacity(self):
        alloc = water_fill(self.svd.s, self.noise.watts, self.link.tx_power_w)
        result = spectral_efficiency(
            alloc,
            self.svd.s,
            self.noise.watts,
            cap=self.config.algorithm.mcs_cap,
            bandwidth_hz=self.link.bandwidth_hz,
        )
        return alloc, result


def _sigma_rows(s: np.ndarray) -> list[tuple]:
    floor = np.finfo(float).tiny
    return [
        (k + 1, float(sigma), float(20.0 * np.log10(max(sigma, floor))))
        for k, sigma in enumerate(s)
    ]


def _stage_link_budget(ws: _Workspace, emitter: _Emitter) -> None:
    link = ws.link
    tx_pos = build_array(ws.tx)
    rx_pos = build_array(ws.rx)
    center = tx_pos[ws.tx.element_count // 2], rx_pos[ws.rx.element_count // 2]
    d_center, *_ = pair_geometry(center[0], center[1])
    corners = (tx_pos[0], tx_pos[-1])
    d_max = max(pair_geometry(c, r)[0] for c in corners for r in (rx_pos[0], rx_pos[-1]))
    h_center = friis_coefficient(link.wavelength_m, d_center)
    h_far = friis_coefficient(link.wavelength_m, d_max)
    emitter.json(
        "link_budget.json",
        {
            "wavelength_m": link.wavelength_m,
            "carrier_frequency_hz": link.carrier_frequency_hz,
            "bandwidth_hz": link.bandwidth_hz,
            "tx_power_dbm": link.tx_power_dbm,
            "tx_power_w": link.tx_power_w,
            "noise_power_w": ws.noise.watts,
            "noise_power_dbm": ws.noise.dbm,
            "center_pair_distance_m": d_center,
            "center_pair_loss_db": -20.0 * np.log10(abs(h_center)),
            "max_pair_distance_m": d_max,
            "max_pair_loss_db": -20.0 * np.log10(abs(h_far)),
            "element_count_per_array": ws.tx.element_count,
        },
    )


def _stage_native(ws: _Workspace, emitter: _Emitter) -> None:
    rows = _sigma_rows(ws.svd.s)
    emitter.csv("singular_values.csv", ("k", "sigma", "sigma_db"), rows)
    emitter.figure("singular_values.png", figures.singular_spectrum, ws.svd.s)
    if ws.config.output.dump_channel:
        emitter.npy("native_channel.npy", ws.native.matrix)


def _stage_capture(ws: _Workspace, emitter: _Emitter) -> None:
    rows = []
    curves = {}
    for mode in CAPTURE_MODES:
        fractions = [captured_power(mode, aw) for aw in CAPTURE_GRID]
        curves[mode] = fractions
        rows.extend(
            (mode[0], mode[1], aw, frac) for aw, frac in zip(CAPTURE_GRID, fractions)
        )
    emitter.csv("captured_power.csv", ("l", "m", "a_over_w", "fraction"), rows)
    radius = beam_geometry(ws.params, ws.params.rx_z).radius
    emitter.figure(
        "captured_power.png",
        figures.captured_power_sweep,
        CAPTURE_GRID,
        curves,
        ws.tx.half_width / radius,
    )
    positions = build_array(ws.tx)
    profile_rows = []
    profile_fields = {}
    for mode in PROFILE_MODES:
        field = hg_field(mode, positions[:, 0], positions[:, 1], ws.params.tx_z, ws.params)
        profile_fields[mode] = field
        profile_rows.extend(
            (mode[0], mode[1], x, y, f.real, f.imag)
            for (x, y), f in zip(positions[:, :2], field)
        )
    emitter.csv("mode_profiles.csv", ("l", "m", "x_m", "y_m", "re", "im"), profile_rows)
    emitter.figure(
        "mode_profiles.png", figures.mode_profiles, positions, profile_fields, ws.tx.side_count
    )


def _stage_project(ws: _Workspace, emitter: _Emitter) -> None:
    tx_full, _ = ws.bases(max(RESIDUAL_L_VALUES))
    n_modes = min(RESIDUAL_MODE_COUNT, ws.tx.element_count)
    rows = []
    table = np.empty((n_modes, len(RESIDUAL_L_VALUES)))
    for col, l_max in enumerate(RESIDUAL_L_VALUES):
        basis = basis_prefix(tx_full, (l_max + 1) ** 2)
        for k in range(n_modes):
            err = project_field(ws.svd.v[:, k], basis).residual
            table[k, col] = err
            rows.append((k + 1, l_max, err))
    emitter.csv("residuals.csv", ("k", "l_max", "err"), rows)
    emitter.figure("residuals.png", figures.residual_curves, RESIDUAL_L_VALUES, table)


def _stage_beamspace(ws: _Workspace, emitter: _Emitter) -> None:
    tx_basis, rx_basis = ws.bases(SNAPSHOT_L_MAX)
    compressed = compress_channel(ws.native, tx_basis, rx_basis)
    s_hg = np.linalg.svd(compressed.matrix, compute_uv=False)
    emitter.csv("beamspace_sv.csv", ("k", "sigma", "sigma_db"), _sigma_rows(s_hg))
    emitter.figure(
        "beamspace_sv.png", figures.spectrum_comparison, ws.svd.s, s_hg, SNAPSHOT_L_MAX
    )
    alg = ws.config.algorithm
    if alg.estimation == "ls":
        estimate = ls_estimate(
            ws.native, tx_basis, rx_basis, ws.link, repetitions=alg.repetitions, seed=alg.seed
        )
        mse = float(np.mean(np.abs(estimate.matrix - compressed.matrix) ** 2))
        emitter.csv(
            "estimation_error.csv",
            ("l_max", "repetitions", "mse"),
            [(SNAPSHOT_L_MAX, alg.repetitions, mse)],
        )


def _stage_capacity(ws: _Workspace, emitter: _Emitter) -> None:
    alg = ws.config.algorithm
    source = make_channel_source(
        ws.native,
        ws.params,
        estimation=alg.estimation,
        link=ws.link,
        repetitions=alg.repetitions,
        seed=alg.seed,
        drop_tol=alg.drop_tol,
    )
    trace = iterative_capacity(
        source,
        ws.link,
        epsilon=alg.epsilon,
        relative_epsilon=alg.relative_epsilon,
        hard_cap=alg.hard_cap,
        mcs_cap=alg.mcs_cap,
    )
    trace_rows = [
        (r.i, r.l_max, r.n_modes, r.spectral_efficiency, r.delta) for r in trace.records
    ]
    emitter.csv(
        "capacity_trace.csv", ("i", "l_max", "n_modes", "se_bits_per_hz", "delta"), trace_rows
    )

    s_final = trace.final_singular_values
    alloc = trace.final_allocation
    if alloc is not None:
        rates = np.log2(1.0 + alloc.powers * s_final**2 / ws.noise.watts)
        if alg.mcs_cap is not None:
            rates = np.minimum(rates, alg.mcs_cap)
        alloc_rows = [
            (k + 1, float(s_final[k]), float(alloc.powers[k]), float(rates[k]))
            for k in range(len(s_final))
        ]
        rank = effective_rank(alloc)
    else:
        alloc_rows = []
        rank = 0
    emitter.csv(
        "allocation.csv", ("k", "sigma", "power_w", "rate_bits_per_hz"), alloc_rows
    )

    _, native_result = ws.native_capacity()
    native_se = native_result.spectral_efficiency
    final_se = trace.final_spectral_efficiency
    hg_refs = trace.records[-1].n_modes
    antenna_refs = ws.tx.element_count
    summary = {
        "spectral_efficiency_bits_per_hz": final_se,
        "capacity_bits_per_s": final_se * ws.link.bandwidth_hz,
        "l_max": trace.l_max,
        "effective_rank": rank,
        "converged": trace.converged,
        "hg_reference_signals": hg_refs,
        "antenna_reference_signals": antenna_refs,
        "overhead_reduction": 1.0 - hg_refs / antenna_refs,
        "native_spectral_efficiency_bits_per_hz": native_se,
        "relative_capacity_error": abs(final_se - native_se) / native_se if native_se else None,
        "noise_power_dbm": ws.noise.dbm,
        "tx_power_dbm": ws.link.tx_power_dbm,
    }
    emitter.json("summary.json", summary)
    emitter.figure("capacity_trace.png", figures.capacity_convergence, trace.records, native_se)
    if alloc is not None:
        emitter.figure("allocation.png", figures.allocation_bars, s_final, alloc, ws.noise.watts)


_STAGES = {
    "link-budget": (("link_budget", _stage_link_budget),),
    "native": (("native_spectrum", _stage_native),),
    "capture": (("captured_power", _stage_capture),),
    "project": (("projection_residuals", _stage_project),),
    "beamspace": (("beamspace_spectrum", _stage_beamspace),),
    "capacity": (("capacity_iteration", _stage_capacity),),
}


def run(
    subcommand: str,
    config: ExperimentConfig,
    out_dir: Optional[str] = None,
) -> OutputBundle:
    """Execute one subcommand (or ``all``) and write its outputs.

    Returns the bundle describing the output directory and manifest. Raises
    :class:`StageError` when a computation stage fails, naming the stage.
    """
    if subcommand not in SUBCOMMANDS:
        raise ValueError(f"unknown subcommand {subcommand!r}; choose from {SUBCOMMANDS}")
    started = time.perf_counter()
    target = Path(out_dir if out_dir is not None else config.output.directory)
    target.mkdir(parents=True, exist_ok=True)
    emitter = _Emitter(target)
    ws = _Workspace(config)

    names = SUBCOMMANDS[:-1] if subcommand == "all" else (subcommand,)
    timings: dict[str, float] = {}
    for name in names:
        for stage_name, stage_fn in _STAGES[name]:
            t0 = time.perf_counter()
            try:
                stage_fn(ws, emitter)
            except Exception as exc:
                raise StageError(stage_name, exc) from exc
            timings[stage_name] = time.perf_counter() - t0

    manifest = {
        "subcommand": subcommand,
        "config": config.to_dict(),
        "versions": {
            "beamcap": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": _scipy_version(),
            "matplotlib": matplotlib.__version__,
        },
        "timings_s": {k: round(v, 6) for k, v in timings.items()},
        "wall_clock_s": round(time.perf_counter() - started, 6),
        "files": sorted(emitter.entries, key=lambda e: e["name"]),
    }
    manifest_path = target / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return OutputBundle(out_dir=target, manifest=manifest)
