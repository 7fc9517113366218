"""Water-filling power allocation and the iterative beam-space capacity loop."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .beamspace import BeamspaceChannel
from .channel import LinkBudget, noise_power

__all__ = [
    "CapacityResult",
    "CapacityTrace",
    "IterationRecord",
    "PowerAllocation",
    "effective_rank",
    "iterative_capacity",
    "spectral_efficiency",
    "water_fill",
]


@dataclass(frozen=True)
class PowerAllocation:
    """Water-filling solution over parallel singular-mode subchannels.

    For the active modes ``powers[k] = water_level - noise/abs(s_k)^2``;
    inactive modes (including every zero singular value) receive exactly
    zero power and satisfy ``water_level <= noise/s_k^2``.
    """

    water_level: float
    powers: np.ndarray
    active: tuple[int, ...]
    total_power: float
    noise: float


def water_fill(
    singular_values: Sequence[float] | np.ndarray,
    noise: float,
    total_power: float,
) -> PowerAllocation:
    """Capacity-optimal power split across subchannels with gains s_k^2/noise.

    Exact active-set solution: with K active modes the water level is
    ``(P + sum_k noise/s_k^2) / K`` for the largest prefix K that keeps every
    active power positive.
    """
    s = np.asarray(singular_values, dtype=float)
    if total_power <= 0:
        raise ValueError("total power must be > 0")
    if noise <= 0:
        raise ValueError("noise power must be > 0")
    if s.ndim != 1 or np.any(s < 0):
        raise ValueError("singular values must be a 1-D non-negative vector")
    if np.any(np.diff(s) > 0):
        raise ValueError("singular values must be sorted in descending order")
    positive = s > 0
    if not np.any(positive):
        raise ValueError("all singular values are zero: the channel carries no power")

    inv_gain = noise / s[positive] ** 2  # ascending since s is descending
    n = inv_gain.size
    levels = (total_power + np.cumsum(inv_gain)) / np.arange(1, n + 1)
    feasible = levels > inv_gain
    feasible[0] = True  # the strongest mode always gets power (P > 0)
    n_active = int(np.nonzero(feasible)[0][-1]) + 1
    mu = float(levels[n_active - 1])

    powers = np.zeros_like(s)
    powers[:n_active] = np.maximum(mu - inv_gain[:n_active], 0.0)
    # absorb the rounding residue in the strongest mode so the budget is met
    # exactly even when P is many orders below the inverse gains
    powers[0] += total_power - powers[:n_active].sum()
    return PowerAllocation(
        water_level=mu,
        powers=powers,
        active=tuple(range(n_active)),
        total_power=float(total_power),
        noise=float(noise),
    )


@dataclass(frozen=True)
class CapacityResult:
    """Spectral efficiency and per-mode rates for a power allocation."""

    spectral_efficiency: float
    snr: np.ndarray
    rates: np.ndarray
    rate_cap: Optional[float] = None
    capacity_bits_per_s: Optional[float] = None

    @property
    def cap_applied(self) -> bool:
        return self.rate_cap is not None


def spectral_efficiency(
    alloc: PowerAllocation,
    singular_values: Sequence[float] | np.ndarray,
    noise: float,
    cap: Optional[float] = None,
    bandwidth_hz: Optional[float] = None,
) -> CapacityResult:
    """Sum rate of the allocated modes, optionally clamped per mode.

    The per-mode rate is log2(1 + p_k s_k^2 / noise). A modulation-order cap
    clamps each mode's rate after allocation (simple clamp, not the jointly
    optimal capped allocation). With a bandwidth the result also carries the
    capacity in bits/s.
    """
    s = np.asarray(singular_values, dtype=float)
    if s.shape != alloc.powers.shape:
        raise ValueError("allocation and singular values disagree in length")
    snr = alloc.powers * s**2 / noise
    rates = np.log2(1.0 + snr)
    if cap is not None:
        rates = np.minimum(rates, cap)
    se = float(np.sum(rates))
    return CapacityResult(
        spectral_efficiency=se,
        snr=snr,
        rates=rates,
        rate_cap=cap,
        capacity_bits_per_s=None if bandwidth_hz is None else se * bandwidth_hz,
    )


def effective_rank(alloc: PowerAllocation) -> int:
    """Number of singular modes that actually receive transmit power."""
    return int(np.count_nonzero(alloc.powers > 0))


@dataclass(frozen=True)
class IterationRecord:
    i: int
    l_max: int
    n_modes: int
    spectral_efficiency: float
    delta: Optional[float]


@dataclass(frozen=True)
class CapacityTrace:
    """History of the frontier-growth capacity iteration."""

    records: tuple[IterationRecord, ...]
    converged: bool
    epsilon: Optional[float]
    relative_epsilon: float
    final_singular_values: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    final_allocation: Optional[PowerAllocation] = field(repr=False, default=None)

    @property
    def l_max(self) -> int:
        return self.records[-1].l_max

    @property
    def final_spectral_efficiency(self) -> float:
        return self.records[-1].spectral_efficiency


def _channel_se(
    channel: BeamspaceChannel,
    noise: float,
    power: float,
    cap: Optional[float],
) -> tuple[float, np.ndarray, Optional[PowerAllocation]]:
    s = np.linalg.svd(channel.matrix, compute_uv=False)
    if not np.any(s > 0):
        return 0.0, s, None
    alloc = water_fill(s, noise, power)
    result = spectral_efficiency(alloc, s, noise, cap=cap)
    return result.spectral_efficiency, s, alloc


def iterative_capacity(
    channel_source: Callable[[int], BeamspaceChannel],
    link: LinkBudget,
    epsilon: Optional[float] = None,
    relative_epsilon: float = 1e-3,
    hard_cap: int = 20,
    mcs_cap: Optional[float] = None,
) -> CapacityTrace:
    """Grow the beam space frontier by frontier until capacity stalls.

    Starts from the four modes with max(l, m) <= 1 (frontiers 0 and 1); each
    iteration appends the next frontier, re-decomposes the beam-domain
    channel and recomputes the water-filling capacity. The loop stops when
    successive capacities differ by at most ``epsilon`` bits/s/Hz (or
    ``relative_epsilon`` times the current capacity when no absolute
    tolerance is given), or at the ``hard_cap`` frontier, whichever comes
    first. A channel whose matrix is entirely zero counts as zero capacity.
    """
    if epsilon is not None and epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if relative_epsilon <= 0:
        raise ValueError("relative_epsilon must be > 0")
    if hard_cap < 1:
        raise ValueError("hard_cap must be >= 1")
    sigma2 = noise_power(link).watts
    p_tx = link.tx_power_w

    def threshold(se: float) -> float:
        return epsilon if epsilon is not None else relative_epsilon * se

    records: list[IterationRecord] = []
    se_prev, _, _ = _channel_se(channel_source(0), sigma2, p_tx, mcs_cap)
    records.append(IterationRecord(0, 0, 1, se_prev, None))

    i = 1
    channel = channel_source(1)
    se, s, alloc = _channel_se(channel, sigma2, p_tx, mcs_cap)
    delta = abs(se - se_prev)
    records.append(IterationRecord(1, 1, channel.tx_mode_count, se, delta))
    while delta > threshold(se) and i < hard_cap:
        i += 1
        se_prev = se
        channel = channel_source(i)
        se, s, alloc = _channel_se(channel, sigma2, p_tx, mcs_cap)
        delta = abs(se - se_prev)
        records.append(IterationRecord(i, i, channel.tx_mode_count, se, delta))
    return CapacityTrace(
        records=tuple(records),
        converged=delta <= threshold(se),
        epsilon=epsilon,
        relative_epsilon=relative_epsilon,
        final_singular_values=s,
        final_allocation=alloc,
    )
