import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamspace_lab.array_core import (
    ArrayConfig,
    BeamspaceWindow,
    beamspace_transform,
    capture_lower_bound,
    dirichlet,
    energy_capture,
    locate_on_grid,
    place_window,
    steering_vector,
    window_matrix,
    window_response,
    wrap_angle,
)

N_LIST = (32, 64, 128, 256)
DELTAS = np.linspace(0.0, 0.5, 101)
CORNER = 80 / (9 * math.pi**2)


def _omega(n0, delta, n, sign=1):
    return 2 * np.pi * (n0 + sign * delta) / n


class TestArrayConfig:
    def test_fft_size(self):
        assert ArrayConfig(64).n_fft == 64
        assert ArrayConfig(64, 2).n_fft == 128

    @pytest.mark.parametrize("zp", [0, 3, 4])
    def test_rejects_other_zero_padding(self, zp):
        with pytest.raises(ValueError, match="unsupported zero-pad factor"):
            ArrayConfig(64, zp)

    def test_rejects_tiny_array(self):
        with pytest.raises(ValueError):
            ArrayConfig(1)


class TestSteeringVector:
    def test_zero_frequency(self):
        np.testing.assert_allclose(steering_vector(0.0, 4), np.ones(4))

    def test_alternating(self):
        np.testing.assert_allclose(steering_vector(np.pi, 2), [1, -1], atol=1e-15)

    def test_unit_modulus(self, rng):
        a = steering_vector(rng.uniform(-np.pi, np.pi, 100), 128)
        assert a.shape == (128, 100)
        np.testing.assert_allclose(np.sum(np.abs(a) ** 2, axis=0), 128)


class TestDirichlet:
    def test_limit_at_zero(self):
        assert dirichlet(0.0, 17) == pytest.approx(1.0)
        assert dirichlet(2 * np.pi, 16) == pytest.approx(1.0)

    def test_grid_zero(self):
        assert abs(dirichlet(2 * np.pi / 32, 32)) < 1e-14

    def test_pi_for_two(self):
        assert abs(dirichlet(np.pi, 2)) < 1e-15

    @given(st.floats(-10, 10), st.integers(2, 300))
    def test_matches_direct_sum(self, omega, n):
        direct = np.mean(np.exp(1j * omega * np.arange(n)))
        assert abs(dirichlet(omega, n) - direct) < 1e-10

    @pytest.mark.parametrize("n", N_LIST)
    def test_dominates_sinc(self, n):
        t = np.linspace(1e-6, n / 2 - 1e-6, 20001)
        assert np.all(np.abs(dirichlet(2 * np.pi * t / n, n)) >= np.abs(np.sinc(t)) - 1e-13)


class TestLocateOnGrid:
    def test_positive_offset(self):
        pos = locate_on_grid(_omega(3.3, 0, 128), ArrayConfig(128))
        assert (pos.n0, pos.sign) == (3, 1)
        assert pos.delta == pytest.approx(0.3)

    def test_on_grid(self):
        pos = locate_on_grid(_omega(3, 0, 128), ArrayConfig(128))
        assert (pos.n0, pos.delta, pos.sign) == (3, 0.0, 1)

    def test_negative_offset(self):
        pos = locate_on_grid(_omega(3.8, 0, 128), ArrayConfig(128))
        assert (pos.n0, pos.sign) == (4, -1)
        assert pos.delta == pytest.approx(0.2)

    def test_wraps_to_lower_half(self):
        cfg = ArrayConfig(128)
        assert locate_on_grid(-np.pi, cfg).n0 == -64
        assert locate_on_grid(np.pi, cfg).n0 == -64
        # nearest point of 63.9 is 64, which maps to -64
        assert locate_on_grid(_omega(63.9, 0, 128), cfg).n0 == -64

    def test_half_bin_tie(self):
        pos = locate_on_grid(_omega(5.5, 0, 64), ArrayConfig(64))
        assert (pos.n0, pos.delta, pos.sign) == (5, 0.5, 1)

    @given(st.floats(-np.pi, np.pi, exclude_max=True), st.sampled_from(N_LIST))
    def test_reconstructs_frequency(self, omega, n):
        pos = locate_on_grid(omega, ArrayConfig(n))
        assert -n // 2 <= pos.n0 < n // 2
        assert 0 <= pos.delta <= 0.5
        assert abs(wrap_angle(pos.omega - omega)) < 1e-12


class TestPlaceWindow:
    def test_odd_width(self):
        win = place_window(_omega(10, 0.2, 128), ArrayConfig(128), 5)
        assert list(win.indices) == [8, 9, 10, 11, 12]

    def test_even_width_positive_side(self):
        win = place_window(_omega(10, 0.2, 128), ArrayConfig(128), 4)
        assert list(win.indices) == [9, 10, 11, 12]

    def test_even_width_negative_side(self):
        win = place_window(_omega(10, 0.2, 128, sign=-1), ArrayConfig(128), 4)
        assert list(win.indices) == [8, 9, 10, 11]

    def test_wraps_modulo_fft_size(self):
        win = place_window(0.0, ArrayConfig(128), 5)
        assert list(win.indices) == [126, 127, 0, 1, 2]

    def test_zero_padded_anchor(self):
        # 10.2 bins on the base grid is 20.4 on the doubled grid
        win = place_window(_omega(10, 0.2, 128), ArrayConfig(128, 2), 3)
        assert list(win.indices) == [19, 20, 21]

    @pytest.mark.parametrize("w", [0, 129])
    def test_width_out_of_range(self, w):
        with pytest.raises(ValueError):
            place_window(0.1, ArrayConfig(128), w)

    @given(st.floats(-np.pi, np.pi, exclude_max=True), st.integers(1, 64), st.sampled_from([1, 2]))
    def test_contiguous_and_contains_nearest(self, omega, w, zp):
        cfg = ArrayConfig(64, zp)
        win = place_window(omega, cfg, w)
        assert win.width == w
        assert len(set(win.indices)) == w
        assert np.all(np.diff(win.offsets) == 1)
        nearest = round(wrap_angle(omega) * cfg.n_fft / (2 * np.pi)) % cfg.n_fft
        assert nearest in set(win.indices)


class TestBeamspaceTransform:
    def test_full_window_is_unitary(self, rng):
        cfg = ArrayConfig(64)
        x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        y = beamspace_transform(x, cfg, BeamspaceWindow(tuple(range(64)), 64))
        assert np.linalg.norm(y) ** 2 == pytest.approx(np.linalg.norm(x) ** 2, rel=1e-10)

    def test_on_grid_concentration(self):
        cfg = ArrayConfig(32)
        x = steering_vector(_omega(5, 0, 32), 32)
        y = beamspace_transform(x, cfg, BeamspaceWindow((5,), 32))
        assert abs(y[0]) ** 2 == pytest.approx(32)

    def test_zero_padded_on_grid(self):
        cfg = ArrayConfig(32, 2)
        x = steering_vector(_omega(5, 0, 32), 32)
        y = beamspace_transform(x, cfg, BeamspaceWindow((10,), 64))
        # direct 2N-point DFT of the same vector
        direct = np.sum(x * np.exp(-2j * np.pi * 10 * np.arange(32) / 64)) / 8
        assert abs(y[0]) ** 2 == pytest.approx(16)
        assert y[0] == pytest.approx(direct)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            beamspace_transform(np.ones(10), ArrayConfig(16), BeamspaceWindow((0,), 16))

    @pytest.mark.parametrize("zp", [1, 2])
    def test_matches_matrix_and_closed_form(self, rng, zp):
        cfg = ArrayConfig(48, zp)
        omega = rng.uniform(-np.pi, np.pi)
        win = place_window(omega, cfg, 6)
        a = steering_vector(omega, 48)
        y = beamspace_transform(a, cfg, win)
        np.testing.assert_allclose(y, window_matrix(cfg, win) @ a, atol=1e-12)
        np.testing.assert_allclose(y / np.sqrt(48), window_response(omega, cfg, win), atol=1e-12)


class TestEnergyCapture:
    @pytest.mark.parametrize("w", [1, 2, 5])
    def test_on_grid(self, w):
        assert energy_capture(_omega(7, 0, 64), ArrayConfig(64), w) == pytest.approx(1.0)

    def test_full_window(self):
        assert energy_capture(0.123, ArrayConfig(64), 64) == pytest.approx(1.0)

    def test_half_bin_brute_force(self):
        n, omega = 64, _omega(9, 0.5, 64)
        spec = np.abs(np.fft.fft(steering_vector(omega, n))) ** 2 / n**2
        brute = sum(spec[k % n] for k in range(8, 12))
        value = energy_capture(omega, ArrayConfig(n), 4)
        assert value == pytest.approx(brute, rel=1e-12)
        assert CORNER <= value <= 1.0

    @given(st.floats(-np.pi, np.pi, exclude_max=True), st.sampled_from([1, 2]))
    @settings(max_examples=50)
    def test_nondecreasing_in_width(self, omega, zp):
        cfg = ArrayConfig(32, zp)
        values = [energy_capture(omega, cfg, w) for w in range(1, 12)]
        assert np.all(np.diff(values) >= -1e-12)


class TestCaptureLowerBound:
    def test_corner_value(self):
        assert capture_lower_bound(4, 0, 0.5, 1) == pytest.approx(CORNER)

    def test_single_bin_on_grid(self):
        assert capture_lower_bound(1, 0, 0.0, 1) == pytest.approx(1.0)
        assert capture_lower_bound(1, 0, 0.0, 1, zp_factor=2) == pytest.approx(0.5)

    def test_minimum_at_half_bin(self):
        values = [capture_lower_bound(4, 0, d, 1) for d in DELTAS]
        assert int(np.argmin(values)) == len(DELTAS) - 1

    def test_zero_pad_oracle(self):
        # on-grid W=1 at bin 2*n0 of the padded DFT captures N/2 of N
        cfg = ArrayConfig(64, 2)
        assert energy_capture(_omega(3, 0, 64), cfg, 1) == pytest.approx(0.5)

    @pytest.mark.parametrize("zp", [1, 2])
    @pytest.mark.parametrize("n", N_LIST)
    def test_dominated_by_capture(self, n, zp):
        cfg = ArrayConfig(n, zp)
        n0 = n // 8
        for sign in (1, -1):
            for d in DELTAS:
                omega = _omega(n0, d, n, sign)
                pos = locate_on_grid(omega, cfg)
                for w in range(1, 9):
                    bound = capture_lower_bound(w, pos.n0, pos.delta, pos.sign, zp)
                    assert energy_capture(omega, cfg, w) >= bound - 1e-12
