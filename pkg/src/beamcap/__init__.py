"""Near-field LOS MIMO capacity via a truncated Hermite-Gaussian beam space.

The package builds the antenna-domain channel between two facing square
arrays from the per-pair free-space model, compresses it into a finite,
re-orthonormalized Hermite-Gaussian mode basis, simulates reference-signal
channel estimation in that beam domain, and computes water-filling capacity
by growing the beam space frontier by frontier until the capacity converges.
"""

from .arrays import ArraySpec, ElementPattern, build_array, element_gain, pair_geometry
from .beamspace import (
    BeamBasis,
    BeamspaceChannel,
    ModeOrdering,
    ProjectionResult,
    antenna_filters,
    basis_prefix,
    build_beam_basis,
    canonical_mode_order,
    compress_channel,
    empty_basis,
    extend_orthonormal_basis,
    frontier_modes,
    ls_estimate,
    make_channel_source,
    project_field,
    sample_modes,
)
from .capacity import (
    CapacityResult,
    CapacityTrace,
    PowerAllocation,
    effective_rank,
    iterative_capacity,
    spectral_efficiency,
    water_fill,
)
from .channel import (
    LinkBudget,
    NativeChannel,
    NoisePower,
    SingularTriple,
    build_native_channel,
    decompose,
    friis_coefficient,
    noise_power,
    watts_to_dbm,
)
from .hgmodes import (
    BeamGeometry,
    BeamParameters,
    ModeIndex,
    beam_geometry,
    captured_power,
    hermite_1d,
    hg_field,
    optimal_waist,
)

__version__ = "0.1.0"

__all__ = [
    "ArraySpec",
    "BeamBasis",
    "BeamGeometry",
    "BeamParameters",
    "BeamspaceChannel",
    "CapacityResult",
    "CapacityTrace",
    "ElementPattern",
    "LinkBudget",
    "ModeIndex",
    "ModeOrdering",
    "NativeChannel",
    "NoisePower",
    "PowerAllocation",
    "ProjectionResult",
    "SingularTriple",
    "antenna_filters",
    "basis_prefix",
    "beam_geometry",
    "build_array",
    "build_beam_basis",
    "build_native_channel",
    "canonical_mode_order",
    "captured_power",
    "compress_channel",
    "decompose",
    "effective_rank",
    "element_gain",
    "empty_basis",
    "extend_orthonormal_basis",
    "friis_coefficient",
    "frontier_modes",
    "hermite_1d",
    "hg_field",
    "iterative_capacity",
    "ls_estimate",
    "make_channel_source",
    "noise_power",
    "optimal_waist",
    "pair_geometry",
    "project_field",
    "sample_modes",
    "spectral_efficiency",
    "water_fill",
    "watts_to_dbm",
]
