"""
Array processing primitives for a half-wavelength uniform linear array.

Steering vectors, the Dirichlet kernel, spatial-DFT (beamspace) transforms
with optional 2x zero padding, beamspace window placement and the energy
captured by a window together with its sinc-based lower bound.

All spatial frequencies are in radians per element. Bin indices are taken
modulo the DFT size ``n_fft``; the unitary DFT convention
``F[m, n] = exp(-2j*pi*m*n/n_fft) / sqrt(n_fft)`` is used throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ArrayConfig",
    "GridPosition",
    "BeamspaceWindow",
    "wrap_angle",
    "steering_vector",
    "dirichlet",
    "sinc",
    "locate_on_grid",
    "place_window",
    "window_matrix",
    "beamspace_transform",
    "window_response",
    "energy_capture",
    "capture_lower_bound",
]

# Tolerance used to decide that a continuous bin index sits exactly halfway
# between two grid points.
_TIE_TOL = 1e-9
_SNAP_TOL = 1e-13  # in bins; far below the 1e-12 rad reconstruction tolerance


@dataclass(frozen=True)
class ArrayConfig:
    """Antenna count and spatial DFT size.

    Parameters
    ----------
    n_antennas : int
        Number of array elements ``N`` (at least 2).
    zp_factor : int
        Zero-padding factor, 1 or 2. The DFT size is ``zp_factor * N``.
    """

    n_antennas: int
    zp_factor: int = 1

    def __post_init__(self):
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 2:
            raise ValueError(f"n_antennas must be an integer >= 2, got {self.n_antennas}")
        if self.zp_factor not in (1, 2):
            raise ValueError(f"unsupported zero-pad factor {self.zp_factor}; use 1 or 2")

    @property
    def n_fft(self) -> int:
        return self.zp_factor * self.n_antennas

    def with_zp(self, zp_factor: int) -> "ArrayConfig":
        return ArrayConfig(self.n_antennas, zp_factor)


@dataclass(frozen=True)
class GridPosition:
    """Position of a spatial frequency relative to a DFT grid.

    ``omega = 2*pi*(n0 + sign*delta) / n_points`` with ``n0`` the nearest
    grid point in ``{-n_points/2, ..., n_points/2 - 1}``.
    """

    n0: int
    delta: float
    sign: int
    n_points: int

    @property
    def nu(self) -> float:
        """Continuous bin index ``n0 + sign*delta`` (not wrapped)."""
        return self.n0 + self.sign * self.delta

    @property
    def omega(self) -> float:
        return wrap_angle(2 * np.pi * self.nu / self.n_points)


@dataclass(frozen=True)
class BeamspaceWindow:
    """Contiguous (modulo ``n_fft``) set of beamspace bins.

    ``offsets`` are the unwrapped bin indices, useful when evaluating
    closed-form expressions near the anchor; ``indices`` are the same bins
    reduced modulo ``n_fft`` and index DFT outputs.
    """

    offsets: tuple
    n_fft: int

    def __post_init__(self):
        if not 1 <= len(self.offsets) <= self.n_fft:
            raise ValueError(f"window width {len(self.offsets)} outside [1, {self.n_fft}]")

    @property
    def indices(self) -> np.ndarray:
        return np.mod(np.asarray(self.offsets, dtype=int), self.n_fft)

    @property
    def width(self) -> int:
        return len(self.offsets)


def wrap_angle(omega):
    """Wrap angles into the half-open interval ``[-pi, pi)``."""
    wrapped = np.mod(np.asarray(omega, dtype=float) + np.pi, 2 * np.pi) - np.pi
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def steering_vector(omega, n: int) -> np.ndarray:
    """Array response ``[1, e^{j omega}, ..., e^{j (n-1) omega}]``.

    A scalar ``omega`` gives shape ``(n,)``; an array of ``K`` frequencies
    gives an ``(n, K)`` matrix with one steering vector per column.
    """
    omega = np.asarray(omega, dtype=float)
    m = np.arange(n)
    if omega.ndim == 0:
        return np.exp(1j * omega * m)
    return np.exp(1j * np.outer(m, omega))


def dirichlet(omega, n: int):
    """Normalized Dirichlet kernel ``(1/n) * sum_{k<n} exp(j*omega*k)``.

    The removable singularities at multiples of ``2*pi`` return their limit.
    """
    omega = np.asarray(omega, dtype=float)
    half = omega / 2
    den = n * np.sin(half)
    singular = np.abs(den) < 1e-12 * n
    safe_den = np.where(singular, 1.0, den)
    ratio = np.where(
        singular,
        np.cos(n * half) / np.where(singular, np.cos(half), 1.0),
        np.sin(n * half) / safe_den,
    )
    out = np.exp(1j * (n - 1) * half) * ratio
    if out.ndim == 0:
        return complex(out)
    return out


def sinc(x):
    """Normalized sinc ``sin(pi x) / (pi x)`` with ``sinc(0) = 1``."""
    return np.sinc(x)


def _grid_position(omega: float, n_points: int) -> GridPosition:
    nu = wrap_angle(omega) * n_points / (2 * np.pi)
    base = np.floor(nu)
    frac = nu - base
    if abs(frac - 0.5) < _TIE_TOL:
        # exact half-bin: keep the lower grid point, positive offset
        n0, delta, sign = int(base), 0.5, 1
    elif frac < 0.5:
        n0, delta, sign = int(base), frac, 1
    else:
        n0, delta, sign = int(base) + 1, 1.0 - frac, -1
    if delta < _SNAP_TOL:
        # on-grid up to rounding
        delta, sign = 0.0, 1
    half = n_points // 2
    if n0 >= half:
        n0 -= n_points
    return GridPosition(n0=n0, delta=float(delta), sign=sign, n_points=n_points)


def locate_on_grid(omega: float, cfg: ArrayConfig) -> GridPosition:
    """Nearest point of the base ``N``-point grid and the fractional offset."""
    return _grid_position(omega, cfg.n_antennas)


def _window_offsets(n0: int, sign: int, w: int) -> tuple:
    k = w // 2
    if w % 2:
        lo = n0 - k
    elif sign > 0:
        lo = n0 - k + 1
    else:
        lo = n0 - k
    return tuple(range(lo, lo + w))


def place_window(omega: float, cfg: ArrayConfig, w: int) -> BeamspaceWindow:
    """Beamspace window of ``w`` bins around the bin nearest ``omega``.

    Odd widths are centred on the nearest bin. Even widths extend one extra
    bin towards the side of the true frequency. With zero padding the
    anchor is the nearest bin of the ``n_fft``-point grid.
    """
    if not 1 <= w <= cfg.n_fft:
        raise ValueError(f"window width {w} outside [1, {cfg.n_fft}]")
    pos = _grid_position(omega, cfg.n_fft)
    return BeamspaceWindow(_window_offsets(pos.n0, pos.sign, w), cfg.n_fft)


def window_matrix(cfg: ArrayConfig, win: BeamspaceWindow) -> np.ndarray:
    """The ``W x N`` matrix selecting window rows of the zero-padded unitary DFT."""
    m = np.arange(cfg.n_antennas)
    k = win.indices
    return np.exp(-2j * np.pi * np.outer(k, m) / cfg.n_fft) / np.sqrt(cfg.n_fft)


def beamspace_transform(x, cfg: ArrayConfig, win: BeamspaceWindow) -> np.ndarray:
    """Zero-pad, apply the unitary DFT along axis 0 and keep the window rows."""
    x = np.asarray(x)
    if x.shape[0] != cfg.n_antennas:
        raise ValueError(f"expected {cfg.n_antennas} antenna samples, got {x.shape[0]}")
    if win.n_fft != cfg.n_fft:
        raise ValueError("window was placed for a different DFT size")
    spec = np.fft.fft(x, n=cfg.n_fft, axis=0) / np.sqrt(cfg.n_fft)
    return spec[win.indices]


def window_response(omega, cfg: ArrayConfig, win: BeamspaceWindow) -> np.ndarray:
    """Windowed beamspace signature of unit-energy steering vectors.

    Equals ``beamspace_transform(steering_vector(omega, N) / sqrt(N))`` but
    is evaluated in closed form through the Dirichlet kernel, which keeps
    large Monte-Carlo batches cheap. Shape ``(W,)`` or ``(W, K)``.
    """
    omega = np.asarray(omega, dtype=float)
    n = cfg.n_antennas
    grid = 2 * np.pi * win.indices / cfg.n_fft
    if omega.ndim == 0:
        arg = omega - grid
    else:
        arg = omega[None, :] - grid[:, None]
    return np.sqrt(n / cfg.n_fft) * dirichlet(arg, n)


def energy_capture(omega: float, cfg: ArrayConfig, w: int) -> float:
    """Fraction of a single path's energy inside its beamspace window."""
    win = place_window(omega, cfg, w)
    u = window_response(omega, cfg, win)
    return float(np.sum(np.abs(u) ** 2))


def capture_lower_bound(w: int, n0: int, delta: float, sign: int, zp_factor: int = 1) -> float:
    """Sinc-based lower bound on :func:`energy_capture`.

    ``(n0, delta, sign)`` locate the frequency on the base ``N``-point grid.
    For ``zp_factor=2`` the window is anchored on the doubled grid and each
    term carries the factor one half of the padded DFT normalization.
    """
    if zp_factor not in (1, 2):
        raise ValueError(f"unsupported zero-pad factor {zp_factor}")
    nu = n0 + sign * delta
    if zp_factor == 1:
        offsets = np.asarray(_window_offsets(n0, sign, w))
        return float(np.sum(sinc(offsets - nu) ** 2))
    # anchor on the doubled grid: continuous index 2*nu
    nu2 = 2 * nu
    base = np.floor(nu2)
    frac = nu2 - base
    if frac < _SNAP_TOL:
        anchor, s2 = int(base), 1
    elif 1 - frac < _SNAP_TOL:
        anchor, s2 = int(base) + 1, 1
    elif abs(frac - 0.5) < _TIE_TOL or frac < 0.5:
        anchor, s2 = int(base), 1
    else:
        anchor, s2 = int(base) + 1, -1
    offsets = np.asarray(_window_offsets(anchor, s2, w))
    return float(0.5 * np.sum(sinc(offsets / 2 - nu) ** 2))
