import numpy as np
import pytest

from beamspace_lab.array_core import ArrayConfig
from beamspace_lab.channel_model import PathRecord, UserChannel, WidebandConfig, synth_multipath
from beamspace_lab.scheduling import GuardPolicy, schedule_users
from beamspace_lab.wideband import (
    beamspace_lmmse_se,
    full_array_lmmse_se,
    sir_trace,
    spectral_efficiency_report,
    unconstrained_se,
)

SNR = np.arange(0, 41, 5.0)
WCFG = WidebandConfig.fractional(0.2, n_subcarriers=32)


def _users_at(omegas, extra=None):
    users = [UserChannel(i, [PathRecord(1 + 0j, 0.0, float(np.arcsin(o / np.pi)))]) for i, o in enumerate(omegas)]
    if extra is not None:
        users[0] = UserChannel(0, users[0].paths + [extra])
    return users


@pytest.fixture(scope="module")
def scheduled():
    rng = np.random.default_rng(8)
    cfg = ArrayConfig(32)
    pool = synth_multipath(rng, 200, (4, 8))
    return cfg, schedule_users(rng, pool, 16, cfg, WCFG, GuardPolicy(0.95, "lowest_frequency"))


class TestUnconstrained:
    def test_single_user_single_path(self):
        cfg = ArrayConfig(32)
        se = unconstrained_se(_users_at([0.9]), cfg, WCFG, SNR)
        np.testing.assert_allclose(se, np.log2(1 + 10 ** (SNR / 10)), rtol=1e-12)

    def test_vanishes_at_low_snr(self, scheduled):
        cfg, users = scheduled
        assert unconstrained_se(users, cfg, WCFG, [-200.0])[0] < 1e-15

    def test_quadrature_converged(self):
        cfg = ArrayConfig(32)
        users = synth_multipath(np.random.default_rng(0), 2, 1)
        a = unconstrained_se(users, cfg, WidebandConfig.fractional(0.2, n_subcarriers=64), [20.0])
        b = unconstrained_se(users, cfg, WidebandConfig.fractional(0.2, n_subcarriers=128), [20.0])
        assert abs(a[0] - b[0]) < 1e-6


class TestFullArray:
    def test_single_user_matches_benchmark(self):
        cfg = ArrayConfig(32)
        users = synth_multipath(np.random.default_rng(1), 1, 5)
        np.testing.assert_allclose(full_array_lmmse_se(users, cfg, WCFG, SNR),
                                   unconstrained_se(users, cfg, WCFG, SNR), rtol=1e-9)

    def test_orthogonal_users(self):
        cfg = ArrayConfig(16)
        narrow = WidebandConfig(bandwidth=0.0, n_subcarriers=4)
        users = _users_at(2 * np.pi * np.array([0, 3, -5]) / 16)
        np.testing.assert_allclose(full_array_lmmse_se(users, cfg, narrow, SNR),
                                   np.log2(1 + 10 ** (SNR / 10)), rtol=1e-9)


class TestBeamspace:
    def test_full_window_matches_full_array(self, scheduled):
        cfg, users = scheduled
        se, _ = beamspace_lmmse_se(users, cfg, WCFG, cfg.n_fft, SNR)
        np.testing.assert_allclose(se, full_array_lmmse_se(users, cfg, WCFG, SNR), rtol=1e-8)

    @pytest.mark.parametrize("zp", [1, 2])
    def test_ordering_and_monotone(self, scheduled, zp):
        _, users = scheduled
        rep = spectral_efficiency_report(users, ArrayConfig(32, zp), WCFG, 5, SNR)
        assert np.all(rep.beamspace <= rep.full_array + 1e-9)
        assert np.all(rep.full_array <= rep.unconstrained + 1e-9)
        for curve in (rep.beamspace, rep.full_array, rep.unconstrained):
            assert np.all(np.diff(curve) >= -1e-12)
        assert rep.sir.shape == (16, WCFG.n_subcarriers)

    def test_dominant_only_tracks_benchmark(self, scheduled):
        cfg, users = scheduled
        users = [u.dominant_only() for u in users]
        grid = [10.0, 20.0, 30.0]
        se, _ = beamspace_lmmse_se(users, cfg, WCFG, 5, grid)
        assert np.all(full_array_lmmse_se(users, cfg, WCFG, grid) - se < 1.0)

    def test_squint_tracking_helps(self, scheduled):
        cfg, users = scheduled
        users = [u.dominant_only() for u in users]
        tracked, _ = beamspace_lmmse_se(users, cfg, WidebandConfig.fractional(0.4, n_subcarriers=32), 3, [30.0])
        fixed, _ = beamspace_lmmse_se(users, cfg, WidebandConfig.fractional(0.4, n_subcarriers=32), 3, [30.0],
                                      track_squint=False)
        assert tracked[0] > fixed[0]


class TestSirTrace:
    def test_single_user_is_infinite(self):
        trace = sir_trace(0, _users_at([0.4]), ArrayConfig(32), WCFG, 5)
        assert trace.shape == (WCFG.n_subcarriers,)
        assert np.all(np.isinf(trace))

    def test_dominant_only_above_prediction(self, scheduled):
        # margin-based prediction at N=32, W=5, 1-bin guard, K=16 is about 19 dB
        cfg, users = scheduled
        users = [u.dominant_only() for u in users]
        traces = np.array([sir_trace(k, users, cfg, WCFG, 5) for k in range(len(users))])
        assert 10 * np.log10(np.median(traces)) > 19.0

    def test_in_window_secondary_path_hurts(self):
        cfg = ArrayConfig(32)
        # enough users that the interference fills the 5-bin window
        omegas = 2 * np.pi * np.array([0.3, 6.2, -9.4, 12.7, -3.1, 3.4, 9.1, -13.3]) / 32
        clean = sir_trace(1, _users_at(omegas), cfg, WCFG, 5)
        # user 0 gets a strong echo landing next to user 1
        echo = PathRecord(0.5 + 0j, 3e-9, float(np.arcsin(2 * np.pi * 6.9 / 32 / np.pi)))
        dirty = sir_trace(1, _users_at(omegas, extra=echo), cfg, WCFG, 5)
        assert np.min(dirty) < np.min(clean)
