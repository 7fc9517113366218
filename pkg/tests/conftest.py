import numpy as np
import pytest

import beamcap as bc


@pytest.fixture(scope="session")
def table1_link():
    """Reference link: 60 GHz carrier with the wavelength pinned to 5 mm."""
    return bc.LinkBudget(
        carrier_frequency_hz=60e9,
        bandwidth_hz=2e9,
        tx_power_dbm=-20.0,
        noise_figure_db=8.0,
        distance_m=15.0,
        wavelength_m=0.005,
    )


@pytest.fixture(scope="session")
def table1_arrays():
    tx = bc.ArraySpec(half_index=13, spacing=0.02, z_position=-7.5, boresight="+z")
    rx = bc.ArraySpec(half_index=13, spacing=0.02, z_position=+7.5, boresight="-z")
    return tx, rx


@pytest.fixture(scope="session")
def table1_params(table1_link):
    return bc.optimal_waist(table1_link.wavelength_m, table1_link.distance_m)


@pytest.fixture(scope="session")
def small_arrays():
    """5x5 arrays on the reference geometry: fast enough for exhaustive checks."""
    tx = bc.ArraySpec(half_index=2, spacing=0.02, z_position=-7.5, boresight="+z")
    rx = bc.ArraySpec(half_index=2, spacing=0.02, z_position=+7.5, boresight="-z")
    return tx, rx


@pytest.fixture(scope="session")
def small_native(small_arrays, table1_link):
    tx, rx = small_arrays
    return bc.build_native_channel(tx, rx, table1_link)


@pytest.fixture(scope="session")
def small_bases(small_arrays, table1_params):
    tx, rx = small_arrays
    tx_basis = bc.build_beam_basis(tx, table1_params, 2)
    rx_basis = bc.build_beam_basis(rx, table1_params, 2)
    return tx_basis, rx_basis


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)
