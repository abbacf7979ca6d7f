"""
Spectral efficiency of per-subcarrier reception for MIMO-OFDM uplink.

Three quantities are compared, each averaged over users and subcarriers
(midpoint rule over the band):

* ``unconstrained_se`` - ``log2 det(I + H^H H / noise_var) / K``
* ``full_array_lmmse_se`` - LMMSE on all ``N`` antennas, ``log2(1 + SINR)``
* ``beamspace_lmmse_se`` - LMMSE inside each user's ``W``-bin window

The SNR axis is the beamformed SNR of every user's dominant path; users are
rescaled per SNR point with :func:`normalize_dominant_snr`, which keeps the
relative path gains of each user.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .array_core import ArrayConfig, place_window, window_matrix
from .channel_model import WidebandConfig, channel_matrix, normalize_dominant_snr, spatial_frequency_at

__all__ = [
    "SpectralEfficiencyReport",
    "subcarrier_channels",
    "unconstrained_se",
    "full_array_lmmse_se",
    "beamspace_lmmse_se",
    "sir_trace",
    "spectral_efficiency_report",
]


@dataclass
class SpectralEfficiencyReport:
    snr_db: np.ndarray
    unconstrained: np.ndarray
    full_array: np.ndarray
    beamspace: np.ndarray
    sir: np.ndarray  # (K, M) noise-free beamspace SIR, linear, inf where undefined


def subcarrier_channels(users, cfg: ArrayConfig, wcfg: WidebandConfig) -> np.ndarray:
    """Channel matrices at every subcarrier, shape ``(M, N, K)``.

    Users are scaled so each dominant path has unit beamformed SNR.
    """
    users = normalize_dominant_snr(users, 0.0, cfg, wcfg.noise_var)
    return np.stack([channel_matrix(users, f, cfg, wcfg) for f in wcfg.subcarrier_freqs()])


def _snr_lin(snr_grid_db) -> np.ndarray:
    return 10 ** (np.atleast_1d(np.asarray(snr_grid_db, dtype=float)) / 10)


def unconstrained_se(users, cfg: ArrayConfig, wcfg: WidebandConfig, snr_grid_db) -> np.ndarray:
    """Sum-rate log-det benchmark divided by ``K`` (bits/s/Hz per user)."""
    h = subcarrier_channels(users, cfg, wcfg)
    k = h.shape[2]
    gram = np.conj(np.swapaxes(h, 1, 2)) @ h / wcfg.noise_var
    lam = np.clip(np.linalg.eigvalsh(gram), 0.0, None)  # (M, K)
    s = _snr_lin(snr_grid_db)
    return np.array([np.mean(np.sum(np.log2(1 + si * lam), axis=1)) / k for si in s])


def _full_sinrs(h, noise_var, s) -> np.ndarray:
    # SINR_k = 1 / [(I + s H^H H / noise_var)^{-1}]_kk - 1
    gram = np.conj(np.swapaxes(h, 1, 2)) @ h / noise_var
    lam, v = np.linalg.eigh(gram)
    lam = np.clip(lam, 0.0, None)
    w2 = np.abs(v) ** 2  # (M, K, K): user, mode
    out = []
    for si in s:
        mmse = np.einsum("mki,mi->mk", w2, 1.0 / (1.0 + si * lam))
        out.append(1.0 / mmse - 1.0)
    return np.clip(np.array(out), 0.0, None)  # (S, M, K)


def full_array_lmmse_se(users, cfg: ArrayConfig, wcfg: WidebandConfig, snr_grid_db) -> np.ndarray:
    """Per-user, per-subcarrier LMMSE over all antennas."""
    h = subcarrier_channels(users, cfg, wcfg)
    sinr = _full_sinrs(h, wcfg.noise_var, _snr_lin(snr_grid_db))
    return np.mean(np.log2(1 + sinr), axis=(1, 2))


def _user_windows(users, cfg, wcfg, w, track_squint):
    """Window transforms ``T[m][k]`` for every subcarrier and user."""
    freqs = wcfg.subcarrier_freqs()
    ref = np.array([u.dominant.omega_ref for u in users])
    out = []
    for f in freqs:
        om = spatial_frequency_at(ref, f if track_squint else 0.0, wcfg.f_c)
        out.append(np.stack([window_matrix(cfg, place_window(o, cfg, w)) for o in np.atleast_1d(om)]))
    return np.array(out)  # (M, K, W, N)


def _beamspace_terms(users, cfg, wcfg, w, track_squint):
    h = subcarrier_channels(users, cfg, wcfg)  # (M, N, K)
    t = _user_windows(users, cfg, wcfg, w, track_squint)  # (M, K, W, N)
    g = t @ h[:, None, :, :]  # (M, K, W, K): user k's window applied to all users
    k = h.shape[2]
    idx = np.arange(k)
    desired = g[:, idx, :, idx].transpose(1, 0, 2)  # (M, K, W)
    total = g @ np.conj(np.swapaxes(g, 2, 3))
    interf = total - desired[..., :, None] * np.conj(desired[..., None, :])
    noise = wcfg.noise_var * t @ np.conj(np.swapaxes(t, 2, 3))
    return desired, interf, noise


def _quad_inv(r, u) -> np.ndarray:
    x = np.linalg.solve(r, u[..., None])[..., 0]
    return np.real(np.sum(np.conj(u) * x, axis=-1))


def _sir(desired, interf) -> np.ndarray:
    lam = np.linalg.eigvalsh(interf)
    singular = lam[..., 0] <= 1e-12 * np.maximum(lam[..., -1], 1e-300)
    safe = np.where(singular[..., None, None], np.eye(interf.shape[-1]), interf)
    out = _quad_inv(safe, desired)
    return np.where(singular, np.inf, out)


def beamspace_lmmse_se(users, cfg: ArrayConfig, wcfg: WidebandConfig, w: int, snr_grid_db,
                       track_squint: bool = True):
    """Per-subcarrier LMMSE inside each user's ``w``-bin beamspace window.

    With ``track_squint`` the window follows the dominant path's squinted
    frequency at every subcarrier; otherwise it stays at the carrier
    position. Returns ``(se_curve, sir)`` where ``sir`` has shape ``(K, M)``.
    """
    desired, interf, noise = _beamspace_terms(users, cfg, wcfg, w, track_squint)
    se = []
    for si in _snr_lin(snr_grid_db):
        sinr = si * _quad_inv(si * interf + noise, desired)
        se.append(np.mean(np.log2(1 + np.clip(sinr, 0.0, None))))
    return np.array(se), _sir(desired, interf).T


def sir_trace(user_idx: int, users, cfg: ArrayConfig, wcfg: WidebandConfig, w: int,
              track_squint: bool = True) -> np.ndarray:
    """Noise-free beamspace SIR of one user across subcarriers (linear, ``inf`` if undefined)."""
    desired, interf, _ = _beamspace_terms(users, cfg, wcfg, w, track_squint)
    return _sir(desired[:, user_idx], interf[:, user_idx])


def spectral_efficiency_report(users, cfg: ArrayConfig, wcfg: WidebandConfig, w: int, snr_grid_db,
                               track_squint: bool = True) -> SpectralEfficiencyReport:
    bs, sir = beamspace_lmmse_se(users, cfg, wcfg, w, snr_grid_db, track_squint)
    return SpectralEfficiencyReport(
        np.atleast_1d(np.asarray(snr_grid_db, dtype=float)),
        unconstrained_se(users, cfg, wcfg, snr_grid_db),
        full_array_lmmse_se(users, cfg, wcfg, snr_grid_db),
        bs,
        sir,
    )
