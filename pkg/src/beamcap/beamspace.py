"""Finite-aperture beam bases and the beam-domain channel.

Hermite-Gaussian modes sampled on a finite array are no longer orthogonal,
so they are re-orthonormalized over the aperture (modified Gram-Schmidt with
one re-orthogonalization pass) before anything is projected onto them. The
aperture inner product is the plain element-wise conjugate sum. Bases grow
frontier by frontier; previously orthonormalized columns never change, which
makes every downstream quantity (projection residuals, compressed channel
blocks, capacities) nested across frontier extensions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .arrays import ArraySpec, build_array
from .channel import LinkBudget, NativeChannel, SingularTriple, noise_power
from .hgmodes import BeamParameters, ModeIndex, hg_field

__all__ = [
    "BeamBasis",
    "BeamspaceChannel",
    "ModeOrdering",
    "ProjectionResult",
    "antenna_filters",
    "basis_prefix",
    "build_beam_basis",
    "canonical_mode_order",
    "compress_channel",
    "empty_basis",
    "extend_orthonormal_basis",
    "frontier_modes",
    "ls_estimate",
    "make_channel_source",
    "project_field",
    "sample_modes",
]

DEFAULT_DROP_TOL = 1e-8


def frontier_modes(i: int) -> tuple[ModeIndex, ...]:
    """The 2i+1 modes with max(l, m) = i, swept (0,i)..(i,i) then (i,i-1)..(i,0)."""
    if i < 0:
        raise ValueError("frontier index must be >= 0")
    if i == 0:
        return (ModeIndex(0, 0),)
    rising = [ModeIndex(l, i) for l in range(i + 1)]
    falling = [ModeIndex(i, m) for m in range(i - 1, -1, -1)]
    return tuple(rising + falling)


@dataclass(frozen=True)
class ModeOrdering:
    """Canonical enumeration of modes by frontiers of increasing max(l, m).

    ``frontier_starts[i]`` is the offset of frontier i, which occupies
    ``i*i .. (i+1)*(i+1) - 1``; the prefix of length ``(L+1)^2`` therefore
    holds exactly the modes with ``max(l, m) <= L``.
    """

    modes: tuple[ModeIndex, ...]
    frontier_starts: tuple[int, ...]

    @property
    def l_max(self) -> int:
        return len(self.frontier_starts) - 1

    def frontier_slice(self, i: int) -> slice:
        start = self.frontier_starts[i]
        end = self.frontier_starts[i + 1] if i + 1 < len(self.frontier_starts) else len(self.modes)
        return slice(start, end)


def canonical_mode_order(l_max: int) -> ModeOrdering:
    """Mode ordering covering all (l, m) with max(l, m) <= l_max."""
    if l_max < 0:
        raise ValueError("l_max must be >= 0")
    modes: list[ModeIndex] = []
    starts: list[int] = []
    for i in range(l_max + 1):
        starts.append(len(modes))
        modes.extend(frontier_modes(i))
    return ModeOrdering(modes=tuple(modes), frontier_starts=tuple(starts))


def sample_modes(
    modes: Sequence[ModeIndex] | ModeOrdering,
    array: ArraySpec,
    params: BeamParameters,
) -> np.ndarray:
    """Raw sample matrix A, one column of mode-field values per mode.

    Columns are the complex field of each mode evaluated at the array's
    element positions (canonical element ordering). The array plane must be
    one of the beam's two endpoint planes.
    """
    mode_list = modes.modes if isinstance(modes, ModeOrdering) else tuple(modes)
    z = array.z_position
    if not (np.isclose(z, params.tx_z) or np.isclose(z, params.rx_z)):
        raise ValueError(
            f"array plane z={z} matches neither beam plane ({params.tx_z}, {params.rx_z})"
        )
    pos = build_array(array)
    out = np.empty((array.element_count, len(mode_list)), dtype=complex)
    for col, mode in enumerate(mode_list):
        out[:, col] = hg_field(mode, pos[:, 0], pos[:, 1], z, params)
    return out


@dataclass(frozen=True)
class BeamBasis:
    """Aperture-sampled modes and their orthonormalized span.

    ``raw`` keeps every sampled column (kept and dropped) in ordering slots;
    ``q`` holds the orthonormal columns for kept modes only, with the
    upper-triangular ``r`` mapping ``raw[:, kept] = q @ r``. A sampled column
    whose norm after projection on the earlier columns falls below
    ``drop_tol`` times its original norm is dropped and recorded, so nesting
    offsets stay valid even on tiny apertures.
    """

    array: ArraySpec
    params: BeamParameters
    modes: tuple[ModeIndex, ...]
    raw: np.ndarray
    q: np.ndarray
    r: np.ndarray
    kept: tuple[int, ...]
    dropped: tuple[int, ...]
    drop_tol: float = DEFAULT_DROP_TOL

    @property
    def element_count(self) -> int:
        return self.array.element_count

    @property
    def kept_modes(self) -> tuple[ModeIndex, ...]:
        return tuple(self.modes[i] for i in self.kept)


def empty_basis(
    array: ArraySpec,
    params: BeamParameters,
    drop_tol: float = DEFAULT_DROP_TOL,
) -> BeamBasis:
    n = array.element_count
    return BeamBasis(
        array=array,
        params=params,
        modes=(),
        raw=np.empty((n, 0), dtype=complex),
        q=np.empty((n, 0), dtype=complex),
        r=np.empty((0, 0), dtype=complex),
        kept=(),
        dropped=(),
        drop_tol=drop_tol,
    )


def extend_orthonormal_basis(
    basis: BeamBasis,
    new_columns: np.ndarray,
    new_modes: Sequence[ModeIndex],
) -> BeamBasis:
    """Append raw columns to ``basis``, orthonormalizing them over the aperture.

    Modified Gram-Schmidt with one re-orthogonalization pass; existing
    orthonormal columns are untouched. Returns a new basis.
    """
    new_columns = np.asarray(new_columns, dtype=complex)
    if new_columns.ndim != 2 or new_columns.shape[0] != basis.element_count:
        raise ValueError("new columns must be (element_count, n) on the same aperture")
    if new_columns.shape[1] != len(new_modes):
        raise ValueError("one mode index required per new column")

    q_cols = [basis.q[:, j] for j in range(basis.q.shape[1])]
    coeff_cols = [basis.r[:, j] for j in range(basis.r.shape[1])]
    kept = list(basis.kept)
    dropped = list(basis.dropped)
    offset = len(basis.modes)

    for col in range(new_columns.shape[1]):
        slot = offset + col
        a = new_columns[:, col]
        norm0 = np.linalg.norm(a)
        v = a.astype(complex, copy=True)
        coeffs = np.zeros(len(q_cols), dtype=complex)
        for _ in range(2):
            for j, qj in enumerate(q_cols):
                c = np.vdot(qj, v)
                coeffs[j] += c
                v -= c * qj
        norm = np.linalg.norm(v)
        if norm0 == 0.0 or norm < basis.drop_tol * norm0:
            dropped.append(slot)
            continue
        q_cols.append(v / norm)
        coeff_cols.append(np.concatenate([coeffs, [norm]]))
        kept.append(slot)

    n_kept = len(kept)
    r = np.zeros((n_kept, n_kept), dtype=complex)
    for j, col in enumerate(coeff_cols):
        r[: len(col), j] = col
    return BeamBasis(
        array=basis.array,
        params=basis.params,
        modes=basis.modes + tuple(ModeIndex(*m) for m in new_modes),
        raw=np.hstack([basis.raw, new_columns]),
        q=np.column_stack(q_cols) if q_cols else basis.q,
        r=r,
        kept=tuple(kept),
        dropped=tuple(dropped),
        drop_tol=basis.drop_tol,
    )


def build_beam_basis(
    array: ArraySpec,
    params: BeamParameters,
    l_max: int,
    drop_tol: float = DEFAULT_DROP_TOL,
) -> BeamBasis:
    """Sample and orthonormalize all frontiers up to ``l_max`` in one go."""
    basis = empty_basis(array, params, drop_tol)
    for i in range(l_max + 1):
        modes = frontier_modes(i)
        basis = extend_orthonormal_basis(basis, sample_modes(modes, array, params), modes)
    return basis


@dataclass(frozen=True)
class ProjectionResult:
    """Least-squares expansion of an aperture field over a beam basis.

    ``coefficients`` are expressed in the raw-mode frame (they solve
    ``raw[:, kept] @ c ~= field``); ``residual`` is the squared reconstruction
    error normalized by the squared field norm, in [0, 1].
    """

    coefficients: np.ndarray
    modes: tuple[ModeIndex, ...]
    residual: float


def project_field(field: np.ndarray, basis: BeamBasis) -> ProjectionResult:
    """Project an element-domain field onto the orthonormalized basis span."""
    f = np.asarray(field, dtype=complex).ravel()
    if f.size != basis.element_count:
        raise ValueError("field length must equal the aperture element count")
    norm2 = float(np.real(np.vdot(f, f)))
    if norm2 == 0.0:
        raise ValueError("cannot project the zero field (residual is undefined)")
    ortho_coeffs = basis.q.conj().T @ f
    recon = basis.q @ ortho_coeffs
    residual = float(np.real(np.vdot(f - recon, f - recon))) / norm2
    if basis.r.shape[0]:
        raw_coeffs = solve_triangular(basis.r, ortho_coeffs, lower=False)
    else:
        raw_coeffs = ortho_coeffs
    return ProjectionResult(
        coefficients=raw_coeffs,
        modes=basis.kept_modes,
        residual=residual,
    )


@dataclass(frozen=True)
class BeamspaceChannel:
    """Channel matrix between RX and TX beam modes (RX modes x TX modes)."""

    matrix: np.ndarray
    tx_basis: BeamBasis
    rx_basis: BeamBasis
    l_max: int

    @property
    def tx_mode_count(self) -> int:
        return self.matrix.shape[1]

    @property
    def rx_mode_count(self) -> int:
        return self.matrix.shape[0]


def _common_l_max(tx_basis: BeamBasis, rx_basis: BeamBasis) -> int:
    counts = {len(tx_basis.modes), len(rx_basis.modes)}
    n = counts.pop()
    if counts:
        raise ValueError("TX and RX bases sample different mode sets")
    l = int(round(np.sqrt(n))) - 1
    if (l + 1) ** 2 != n:
        raise ValueError("basis does not cover whole frontiers")
    return l


def compress_channel(
    native: NativeChannel,
    tx_basis: BeamBasis,
    rx_basis: BeamBasis,
) -> BeamspaceChannel:
    """Noiseless beam-domain channel: RX filters applied to each TX mode column.

    Equals ``Q_rx^H @ H @ Q_tx``; with orthonormal-column factors every
    singular value of the result is bounded by the matching native one.
    """
    h = native.matrix
    if h.shape != (rx_basis.element_count, tx_basis.element_count):
        raise ValueError(
            f"channel is {h.shape}, bases expect "
            f"({rx_basis.element_count}, {tx_basis.element_count})"
        )
    matrix = rx_basis.q.conj().T @ (h @ tx_basis.q)
    return BeamspaceChannel(
        matrix=matrix,
        tx_basis=tx_basis,
        rx_basis=rx_basis,
        l_max=_common_l_max(tx_basis, rx_basis),
    )


def _sounding_noise(seed: int, slot: int, repetition: int, size: int, sigma2: float) -> np.ndarray:
    """Circular complex Gaussian RX noise, keyed by (seed, mode slot, repetition).

    Keying by content rather than draw order makes the estimate independent
    of the order in which modes are sounded or frontiers are appended.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(slot, repetition)))
    scale = np.sqrt(sigma2 / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def ls_estimate(
    native: NativeChannel,
    tx_basis: BeamBasis,
    rx_basis: BeamBasis,
    link: LinkBudget,
    repetitions: int = 1,
    seed: int = 0,
    noise_w: float | None = None,
) -> BeamspaceChannel:
    """Least-squares beam-domain channel estimate from mode reference signals.

    Each kept TX mode is sounded with the full TX power on its orthonormal
    aperture filter; the noisy element-domain snapshots are averaged over
    ``repetitions`` and combined through all RX mode filters. Per-entry error
    variance is sigma^2 / (P * repetitions). ``noise_w`` overrides the
    link-derived noise power; zero reduces the estimate to the noiseless
    compression.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    h = native.matrix
    if h.shape != (rx_basis.element_count, tx_basis.element_count):
        raise ValueError("channel dimensions do not match the bases")
    p_tx = link.tx_power_w
    sigma2 = noise_power(link).watts if noise_w is None else float(noise_w)
    amp = np.sqrt(p_tx)
    n_rx = rx_basis.element_count
    columns = np.empty((rx_basis.q.shape[1], tx_basis.q.shape[1]), dtype=complex)
    for col, slot in enumerate(tx_basis.kept):
        y_clean = h @ (amp * tx_basis.q[:, col])
        acc = np.zeros(n_rx, dtype=complex)
        for rep in range(repetitions):
            acc += y_clean + _sounding_noise(seed, slot, rep, n_rx, sigma2)
        columns[:, col] = rx_basis.q.conj().T @ (acc / repetitions) / amp
    return BeamspaceChannel(
        matrix=columns,
        tx_basis=tx_basis,
        rx_basis=rx_basis,
        l_max=_common_l_max(tx_basis, rx_basis),
    )


def antenna_filters(
    beamspace_svd: SingularTriple,
    tx_basis: BeamBasis,
    rx_basis: BeamBasis,
) -> tuple[np.ndarray, np.ndarray]:
    """Element-domain TX/RX filters of the beam-domain singular modes.

    Column k of the TX (RX) filter matrix is Q_tx @ v_k (Q_rx @ u_k); each
    has unit element-domain norm, and a filter pair applied to the native
    channel reproduces the corresponding beam-domain singular value.
    """
    if beamspace_svd.v.shape[0] != tx_basis.q.shape[1]:
        raise ValueError("right singular vectors do not match the TX basis size")
    if beamspace_svd.u.shape[0] != rx_basis.q.shape[1]:
        raise ValueError("left singular vectors do not match the RX basis size")
    return tx_basis.q @ beamspace_svd.v, rx_basis.q @ beamspace_svd.u


def basis_prefix(basis: BeamBasis, n_modes: int) -> BeamBasis:
    """Restrict an incrementally built basis to its first ``n_modes`` slots.

    Because extensions never touch earlier columns, the prefix is identical
    to the basis that stopping at slot ``n_modes`` would have produced.
    """
    if n_modes > len(basis.modes):
        raise ValueError("prefix longer than the basis")
    kept = tuple(s for s in basis.kept if s < n_modes)
    n_kept = len(kept)
    return BeamBasis(
        array=basis.array,
        params=basis.params,
        modes=basis.modes[:n_modes],
        raw=basis.raw[:, :n_modes],
        q=basis.q[:, :n_kept],
        r=basis.r[:n_kept, :n_kept],
        kept=kept,
        dropped=tuple(s for s in basis.dropped if s < n_modes),
        drop_tol=basis.drop_tol,
    )


def make_channel_source(
    native: NativeChannel,
    params: BeamParameters,
    estimation: str = "noiseless",
    link: LinkBudget | None = None,
    repetitions: int = 1,
    seed: int = 0,
    drop_tol: float = DEFAULT_DROP_TOL,
) -> Callable[[int], BeamspaceChannel]:
    """Build a callback mapping l_max to the beam-domain channel at that size.

    Bases are cached and extended frontier by frontier, so successive calls
    return channels whose matrices nest as leading principal submatrices.
    ``estimation`` selects the noiseless compression or the reference-signal
    LS estimate (which needs ``link`` for power and noise).
    """
    if estimation not in ("noiseless", "ls"):
        raise ValueError("estimation must be 'noiseless' or 'ls'")
    if estimation == "ls" and link is None:
        raise ValueError("LS estimation requires a link budget")
    state = {
        "tx": empty_basis(native.tx, params, drop_tol),
        "rx": empty_basis(native.rx, params, drop_tol),
        "next_frontier": 0,
    }

    def source(l_max: int) -> BeamspaceChannel:
        while state["next_frontier"] <= l_max:
            i = state["next_frontier"]
            modes = frontier_modes(i)
            for side, spec in (("tx", native.tx), ("rx", native.rx)):
                cols = sample_modes(modes, spec, params)
                state[side] = extend_orthonormal_basis(state[side], cols, modes)
            state["next_frontier"] = i + 1
        n_modes = (l_max + 1) ** 2
        tx_basis = basis_prefix(state["tx"], n_modes)
        rx_basis = basis_prefix(state["rx"], n_modes)
        if estimation == "noiseless":
            return compress_channel(native, tx_basis, rx_basis)
        return ls_estimate(native, tx_basis, rx_basis, link, repetitions=repetitions, seed=seed)

    return source
