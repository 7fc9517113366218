import numpy as np
import pytest

import beamcap as bc
from beamcap import (
    ArraySpec,
    ElementPattern,
    LinkBudget,
    build_native_channel,
    decompose,
    friis_coefficient,
    noise_power,
)


class TestLinkBudget:
    def test_wavelength_derived_from_carrier(self):
        link = LinkBudget(
            carrier_frequency_hz=60e9, bandwidth_hz=2e9, tx_power_dbm=-20.0,
            noise_figure_db=8.0, distance_m=15.0,
        )
        assert link.wavelength_m == pytest.approx(299792458.0 / 60e9, rel=1e-15)

    def test_wavelength_override_rederives_carrier(self, table1_link):
        # the invariant wavelength = c / carrier holds either way
        assert table1_link.wavelength_m == 0.005
        assert table1_link.carrier_frequency_hz == pytest.approx(299792458.0 / 0.005)

    def test_tx_power_watts(self, table1_link):
        assert table1_link.tx_power_w == pytest.approx(1e-5, rel=1e-12)

    def test_invalid_values_rejected(self):
        with pytest.raises(ValueError):
            LinkBudget(carrier_frequency_hz=1e9, bandwidth_hz=0.0, tx_power_dbm=0,
                       noise_figure_db=0, distance_m=1.0)
        with pytest.raises(ValueError):
            LinkBudget(carrier_frequency_hz=1e9, bandwidth_hz=1.0, tx_power_dbm=0,
                       noise_figure_db=0, distance_m=1.0, wavelength_m=-1.0)


class TestNoisePower:
    def _link(self, bandwidth, nf):
        return LinkBudget(carrier_frequency_hz=60e9, bandwidth_hz=bandwidth,
                          tx_power_dbm=-20.0, noise_figure_db=nf, distance_m=15.0)

    def test_one_hertz_reference(self):
        assert noise_power(self._link(1.0, 0.0)).dbm == pytest.approx(-174.0, abs=0.1)

    def test_one_hertz_with_noise_figure(self):
        assert noise_power(self._link(1.0, 8.0)).dbm == pytest.approx(-166.0, abs=0.1)

    def test_reference_bandwidth(self):
        got = noise_power(self._link(2e9, 8.0))
        assert got.dbm == pytest.approx(-72.99, abs=0.1)
        expected_w = 1.380649e-23 * 290.0 * 2e9 * 10 ** 0.8
        assert got.watts == pytest.approx(expected_w, rel=1e-12)


class TestFriisCoefficient:
    def test_reference_pair_power(self):
        h = friis_coefficient(0.005, 15.0)
        assert abs(h) ** 2 == pytest.approx(7.036e-10, rel=1e-3)
        assert 10 * np.log10(abs(h) ** 2) == pytest.approx(-91.53, abs=0.01)

    def test_integer_wavelength_distance_has_zero_phase(self):
        # 15 m is exactly 3000 wavelengths of 5 mm
        h = friis_coefficient(0.005, 15.0)
        assert np.angle(h) == pytest.approx(0.0, abs=1e-9)

    def test_one_wavelength_separation(self):
        h = friis_coefficient(0.005, 0.005)
        assert abs(h) == pytest.approx(1.0 / (4 * np.pi), rel=1e-12)
        assert np.angle(h) == pytest.approx(0.0, abs=1e-12)

    def test_gains_scale_amplitude(self):
        unit = friis_coefficient(0.01, 3.0)
        boosted = friis_coefficient(0.01, 3.0, g_tx=4.0, g_rx=9.0)
        assert abs(boosted) == pytest.approx(6.0 * abs(unit), rel=1e-12)

    def test_zero_distance_singular(self):
        with pytest.raises(ZeroDivisionError):
            friis_coefficient(0.005, 0.0)


class TestBuildNativeChannel:
    def test_center_pair_matches_single_coefficient(self, small_native, table1_link):
        center = small_native.tx.element_count // 2
        expected = friis_coefficient(table1_link.wavelength_m, table1_link.distance_m)
        assert small_native.matrix[center, center] == pytest.approx(expected, rel=1e-12)

    def test_mirror_facing_arrays_give_symmetric_matrix(self, small_native):
        h = small_native.matrix
        assert np.abs(h - h.T).max() < 1e-12 * np.abs(h).max()

    def test_single_element_arrays(self, table1_link):
        tx = ArraySpec(0, 0.02, -7.5, "+z")
        rx = ArraySpec(0, 0.02, +7.5, "-z")
        channel = build_native_channel(tx, rx, table1_link)
        assert channel.matrix.shape == (1, 1)
        expected = friis_coefficient(table1_link.wavelength_m, 15.0)
        assert channel.matrix[0, 0] == pytest.approx(expected, rel=1e-12)

    def test_directional_pattern_reduces_edge_coupling(self, small_arrays, table1_link):
        tx, rx = small_arrays
        iso = build_native_channel(tx, rx, table1_link, ElementPattern("isotropic"))
        directional = build_native_channel(tx, rx, table1_link, ElementPattern("directional"))
        boost = np.abs(directional.matrix) / np.abs(iso.matrix)
        # boresight gain applies to every pair; off-axis pairs get slightly less
        assert boost.max() == pytest.approx(10 ** 0.8, rel=1e-6)
        assert boost.min() < boost.max()

    def test_overlapping_arrays_rejected(self, table1_link):
        tx = ArraySpec(1, 0.02, 0.0, "+z")
        rx = ArraySpec(1, 0.02, 0.0, "-z")
        with pytest.raises(ZeroDivisionError):
            build_native_channel(tx, rx, table1_link)


class TestDecompose:
    def test_identity(self):
        triple = decompose(np.eye(4, dtype=complex))
        np.testing.assert_allclose(triple.s, np.ones(4))

    def test_diagonal(self):
        triple = decompose(np.diag([3.0, 1.0]).astype(complex))
        np.testing.assert_allclose(triple.s, [3.0, 1.0])

    def test_rank_one_outer_product(self, rng):
        a = rng.normal(size=5) + 1j * rng.normal(size=5)
        b = rng.normal(size=7) + 1j * rng.normal(size=7)
        triple = decompose(np.outer(a, b.conj()))
        assert triple.s[0] == pytest.approx(np.linalg.norm(a) * np.linalg.norm(b), rel=1e-12)
        assert np.all(triple.s[1:] < 1e-12 * triple.s[0])

    def _random_matrix(self, rng, shape=(12, 9)):
        return rng.normal(size=shape) + 1j * rng.normal(size=shape)

    def test_reconstruction_and_orthonormality(self, rng):
        h = self._random_matrix(rng)
        t = decompose(h)
        recon = t.u @ np.diag(t.s) @ t.vh
        assert np.linalg.norm(recon - h) <= 1e-8 * np.linalg.norm(h)
        k = t.s.size
        assert np.abs(t.u.conj().T @ t.u - np.eye(k)).max() < 1e-8
        assert np.abs(t.v.conj().T @ t.v - np.eye(k)).max() < 1e-8

    def test_energy_conservation(self, rng):
        h = self._random_matrix(rng)
        t = decompose(h)
        assert np.sum(t.s**2) == pytest.approx(np.linalg.norm(h) ** 2, rel=1e-10)

    def test_phase_convention_pivot_real_positive(self, rng):
        t = decompose(self._random_matrix(rng))
        for k in range(t.s.size):
            pivot = t.v[np.argmax(np.abs(t.v[:, k])), k]
            assert abs(pivot.imag) < 1e-12
            assert pivot.real > 0

    def test_repeatable_across_runs(self, rng):
        h = self._random_matrix(rng)
        t1 = decompose(h)
        t2 = decompose(h.copy())
        assert np.abs(t1.v - t2.v).max() < 1e-8
        assert np.abs(t1.u - t2.u).max() < 1e-8

    def test_singular_values_invariant_under_global_phase(self, rng):
        h = self._random_matrix(rng)
        s1 = decompose(h).s
        s2 = decompose(h * np.exp(1j * 0.7321)).s
        np.testing.assert_allclose(s1, s2, rtol=1e-12)

    def test_accepts_channel_objects(self, small_native):
        t = decompose(small_native)
        assert t.s.shape == (small_native.matrix.shape[1],)

    def test_non_finite_rejected(self):
        bad = np.ones((2, 2), dtype=complex)
        bad[0, 0] = np.nan
        with pytest.raises(ValueError):
            decompose(bad)


def test_watts_dbm_round_trip():
    assert bc.watts_to_dbm(1e-3) == pytest.approx(0.0, abs=1e-12)
    assert bc.watts_to_dbm(2.0) == pytest.approx(33.0103, abs=1e-4)
