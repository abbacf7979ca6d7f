"""
Covariances and linear receivers in a (possibly reduced) signal space.

Powers are antenna-space receive powers and ``noise_var`` is the complex
noise variance per antenna (``2 sigma^2``). SINRs are linear ratios; the
conversion to dB happens at the reporting layer.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import linalg

from .array_core import (
    ArrayConfig,
    BeamspaceWindow,
    dirichlet,
    place_window,
    steering_vector,
    window_matrix,
)
from .scheduling import uniform_outside

__all__ = [
    "SingularCovarianceError",
    "ReceiverScene",
    "is_hermitian_psd",
    "hpd_solve",
    "noise_covariance",
    "scene_covariance",
    "lmmse_weights",
    "lmmse_sinr",
    "output_sinr",
    "noise_limited_capture",
    "two_bin_response",
    "two_bin_combiner",
    "MatchedFilterStats",
    "two_bin_mf_stats",
]

log = logging.getLogger(__name__)


class SingularCovarianceError(np.linalg.LinAlgError):
    """Covariance is not positive definite even after jitter."""


@dataclass
class ReceiverScene:
    """Desired signature plus interferers and noise in a ``W``-dim space.

    ``interferers`` holds one signature per column (shape ``(W, K-1)``).
    """

    desired: np.ndarray
    desired_power: float
    interferers: np.ndarray = None
    powers: np.ndarray = None
    noise_cov: np.ndarray = None

    def __post_init__(self):
        self.desired = np.asarray(self.desired, dtype=complex)
        w = self.desired.shape[0]
        if self.interferers is None:
            self.interferers = np.zeros((w, 0), dtype=complex)
        self.interferers = np.asarray(self.interferers, dtype=complex).reshape(w, -1)
        k = self.interferers.shape[1]
        self.powers = np.ones(k) if self.powers is None else np.asarray(self.powers, dtype=float)
        if self.powers.shape != (k,):
            raise ValueError("need one power per interferer")
        if self.desired_power <= 0 or np.any(self.powers <= 0):
            raise ValueError("powers must be positive")
        if self.noise_cov is None:
            self.noise_cov = np.zeros((w, w), dtype=complex)
        self.noise_cov = np.asarray(self.noise_cov, dtype=complex)
        if self.noise_cov.shape != (w, w):
            raise ValueError("noise covariance does not match signature length")

    @property
    def dim(self) -> int:
        return self.desired.shape[0]


def is_hermitian_psd(a, tol: float = 1e-10) -> bool:
    a = np.asarray(a)
    scale = max(np.max(np.abs(a)), 1e-300)
    if np.max(np.abs(a - a.conj().T)) > tol * scale:
        return False
    ev = np.linalg.eigvalsh((a + a.conj().T) / 2)
    return bool(ev[0] >= -tol * max(ev[-1], 0.0))


def hpd_solve(r, b):
    """Solve ``r x = b`` for Hermitian positive-definite ``r``.

    Falls back to adding ``1e-12 * trace / W`` to the diagonal when the
    Cholesky factorization fails.
    """
    r = np.asarray(r)
    try:
        return linalg.cho_solve(linalg.cho_factor(r, lower=True), b)
    except linalg.LinAlgError:
        pass
    w = r.shape[0]
    jitter = 1e-12 * np.real(np.trace(r)) / w
    if not jitter > 0:
        raise SingularCovarianceError(
            "covariance is singular; add a nonzero noise floor"
        )
    log.warning("covariance not positive definite, adding jitter %.3g", jitter)
    try:
        return linalg.cho_solve(linalg.cho_factor(r + jitter * np.eye(w), lower=True), b)
    except linalg.LinAlgError:
        raise SingularCovarianceError(
            "covariance is singular; add a nonzero noise floor"
        ) from None


def noise_covariance(cfg: ArrayConfig, win: BeamspaceWindow, noise_var: float = 1.0) -> np.ndarray:
    """Beamspace noise covariance ``noise_var * T T^H`` for the window transform."""
    t = window_matrix(cfg, win)
    return noise_var * (t @ t.conj().T)


def scene_covariance(scene: ReceiverScene) -> np.ndarray:
    u = scene.interferers
    return (u * scene.powers) @ u.conj().T + scene.noise_cov


def lmmse_weights(scene: ReceiverScene) -> np.ndarray:
    """Whitened matched filter ``R^{-1} u1`` (LMMSE up to scale)."""
    return hpd_solve(scene_covariance(scene), scene.desired)


def lmmse_sinr(scene: ReceiverScene) -> float:
    c = lmmse_weights(scene)
    return float(scene.desired_power * np.real(np.vdot(scene.desired, c)))


def output_sinr(c, scene: ReceiverScene) -> float:
    """SINR at the output of an arbitrary linear correlator ``c``."""
    c = np.asarray(c)
    sig = scene.desired_power * abs(np.vdot(c, scene.desired)) ** 2
    den = np.real(np.vdot(c, scene_covariance(scene) @ c))
    return float(sig / den)


def noise_limited_capture(omega: float, cfg: ArrayConfig, w: int) -> float:
    """Whitened-matched-filter SNR in beamspace relative to the full array.

    Equals ``v^H P v / ||v||^2`` with ``P`` the orthogonal projector onto
    the row space of the window transform; the noise level cancels.
    """
    win = place_window(omega, cfg, w)
    t = window_matrix(cfg, win)
    v = steering_vector(omega, cfg.n_antennas)
    u = t @ v
    gram = t @ t.conj().T
    return float(np.real(np.vdot(u, hpd_solve(gram, u))) / cfg.n_antennas)


def two_bin_response(omega, n: int) -> np.ndarray:
    """Normalized responses of DFT bins 0 and 1 to frequency ``omega``, shape ``(2, ...)``."""
    omega = np.asarray(omega, dtype=float)
    return np.stack([dirichlet(omega, n), dirichlet(omega - 2 * np.pi / n, n)])


def two_bin_combiner(n: int) -> np.ndarray:
    """Fixed combiner adding the two bin responses of a frequency in ``[0, 2*pi/n]`` in phase."""
    return np.array([1.0, -np.exp(1j * np.pi / n)])


class MatchedFilterStats(NamedTuple):
    signal_energy: float
    mean_interference_energy: float
    n_samples: int


def two_bin_mf_stats(omega_desired: float, cfg, rng, n_samples: int = 1_000_000,
                     chunk: int = 200_000) -> MatchedFilterStats:
    """Signal energy and mean interference energy of the fixed two-bin combiner.

    Interferers are uniform on the circle outside ``[-0.5*pi/n, 2.5*pi/n]``.
    Returns ``|c^H u1|^2`` and a Monte-Carlo estimate of ``E|c^H u(Omega)|^2``.
    ``cfg`` is an :class:`ArrayConfig` or a plain antenna count.
    """
    n = cfg.n_antennas if isinstance(cfg, ArrayConfig) else int(cfg)
    if not -1e-12 <= omega_desired <= 2 * np.pi / n + 1e-12:
        raise ValueError("desired frequency must lie in [0, 2*pi/n]")
    rng = np.random.default_rng(rng)
    c = two_bin_combiner(n)
    sig = abs(np.vdot(c, two_bin_response(omega_desired, n))) ** 2
    lo, hi = -0.5 * np.pi / n, 2.5 * np.pi / n
    total = 0.0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        om = uniform_outside(rng, lo, hi, m)
        z = c.conj() @ two_bin_response(om, n)
        total += float(np.sum(np.abs(z) ** 2))
        done += m
    return MatchedFilterStats(float(sig), total / n_samples, n_samples)
