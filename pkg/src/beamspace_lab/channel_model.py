"""
Multipath channel construction for the uplink array.

Each user is a list of propagation paths (complex gain, delay, angle of
arrival). Channels are evaluated at a baseband frequency ``f`` with beam
squint ``Omega(f) = Omega_ref * (1 + f / f_c)``.

Path datasets are read from and written to a CSV file with the header::

    user_id,path_id,gain_db,phase_rad,delay_ns,aoa_deg
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .array_core import ArrayConfig, steering_vector, wrap_angle

__all__ = [
    "PathRecord",
    "UserChannel",
    "WidebandConfig",
    "PathFileError",
    "spatial_frequency_at",
    "channel_at",
    "channel_matrix",
    "load_paths",
    "save_paths",
    "synth_multipath",
    "normalize_dominant_snr",
]

CSV_FIELDS = ("user_id", "path_id", "gain_db", "phase_rad", "delay_ns", "aoa_deg")


class PathFileError(ValueError):
    """Raised for unreadable or malformed path files."""


@dataclass(frozen=True)
class PathRecord:
    gain: complex
    delay: float
    aoa: float

    def __post_init__(self):
        if not np.isfinite(self.gain):
            raise ValueError("path gain must be finite")
        if self.delay < 0:
            raise ValueError("path delay must be non-negative")
        if abs(self.aoa) > np.pi / 2 + 1e-12:
            raise ValueError(f"angle of arrival {self.aoa} rad outside [-pi/2, pi/2]")

    @property
    def omega_ref(self) -> float:
        """Spatial frequency at the carrier, ``pi * sin(aoa)``."""
        return float(np.pi * np.sin(self.aoa))


@dataclass
class UserChannel:
    user_id: int
    paths: list = field(default_factory=list)

    def __post_init__(self):
        if not self.paths:
            raise ValueError(f"user {self.user_id} has no paths")

    @property
    def dominant_index(self) -> int:
        # np.argmax returns the first maximum, i.e. the lowest path index
        return int(np.argmax([abs(p.gain) for p in self.paths]))

    @property
    def dominant(self) -> PathRecord:
        return self.paths[self.dominant_index]

    def scaled(self, factor: float) -> "UserChannel":
        return UserChannel(self.user_id, [replace(p, gain=p.gain * factor) for p in self.paths])

    def dominant_only(self) -> "UserChannel":
        return UserChannel(self.user_id, [self.dominant])


@dataclass(frozen=True)
class WidebandConfig:
    """Carrier, bandwidth and subcarrier grid.

    ``noise_var`` is the complex noise variance per antenna (``2 sigma^2``).
    Subcarrier ``m`` sits at the midpoint of its ``B/M`` slice of the band.
    """

    f_c: float = 28.5e9
    bandwidth: float = 5.7e9
    n_subcarriers: int = 64
    noise_var: float = 1.0

    def __post_init__(self):
        if self.f_c <= 0 or self.bandwidth < 0:
            raise ValueError("carrier must be positive and bandwidth non-negative")
        if self.bandwidth >= 2 * self.f_c:
            raise ValueError("bandwidth must be below twice the carrier frequency")
        if self.n_subcarriers < 1:
            raise ValueError("need at least one subcarrier")
        if self.noise_var <= 0:
            raise ValueError("noise_var must be positive")

    @classmethod
    def fractional(cls, fraction: float, f_c: float = 28.5e9, **kw) -> "WidebandConfig":
        return cls(f_c=f_c, bandwidth=fraction * f_c, **kw)

    def subcarrier_freqs(self) -> np.ndarray:
        m = np.arange(self.n_subcarriers)
        return -self.bandwidth / 2 + self.bandwidth * (m + 0.5) / self.n_subcarriers


def spatial_frequency_at(omega_ref, f, f_c: float):
    """Squinted spatial frequency ``omega_ref * (1 + f / f_c)``, wrapped."""
    return wrap_angle(np.asarray(omega_ref) * (1 + np.asarray(f) / f_c))


def channel_at(user: UserChannel, f: float, cfg: ArrayConfig, wcfg: WidebandConfig) -> np.ndarray:
    """Antenna-space channel of one user at baseband frequency ``f``."""
    gains = np.array([p.gain for p in user.paths], dtype=complex)
    delays = np.array([p.delay for p in user.paths])
    omegas = spatial_frequency_at([p.omega_ref for p in user.paths], f, wcfg.f_c)
    phases = np.exp(-2j * np.pi * (wcfg.f_c + f) * delays)
    return steering_vector(np.atleast_1d(omegas), cfg.n_antennas) @ (gains * phases)


def channel_matrix(users, f: float, cfg: ArrayConfig, wcfg: WidebandConfig) -> np.ndarray:
    """``N x K`` matrix with one user channel per column."""
    return np.column_stack([channel_at(u, f, cfg, wcfg) for u in users])


def _parse_row(row: dict, lineno: int) -> tuple:
    try:
        uid = int(row["user_id"])
        pid = int(row["path_id"])
        gain_db = float(row["gain_db"])
        phase = float(row["phase_rad"])
        delay_ns = float(row["delay_ns"])
        aoa_deg = float(row["aoa_deg"])
    except (KeyError, TypeError, ValueError) as exc:
        raise PathFileError(f"line {lineno}: malformed row ({exc})") from None
    if not all(map(math.isfinite, (gain_db, phase, delay_ns, aoa_deg))):
        raise PathFileError(f"line {lineno}: non-finite value")
    if abs(aoa_deg) > 90:
        raise PathFileError(f"line {lineno}: aoa_deg {aoa_deg} outside [-90, 90]")
    if delay_ns < 0:
        raise PathFileError(f"line {lineno}: negative delay")
    gain = 10 ** (gain_db / 20) * np.exp(1j * phase)
    return uid, pid, PathRecord(complex(gain), delay_ns * 1e-9, math.radians(aoa_deg))


def load_paths(path) -> list:
    """Read a path CSV file into a list of :class:`UserChannel`.

    Users are returned in order of first appearance; paths within a user
    are sorted by ``path_id``.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise PathFileError(f"{path}: empty file")
        missing = set(CSV_FIELDS) - set(reader.fieldnames)
        if missing:
            raise PathFileError(f"{path}: header missing columns {sorted(missing)}")
        grouped: dict = {}
        for row in reader:
            if None in row or len(row) != len(reader.fieldnames):
                raise PathFileError(f"line {reader.line_num}: wrong number of fields")
            uid, pid, rec = _parse_row(row, reader.line_num)
            grouped.setdefault(uid, []).append((pid, rec))
    if not grouped:
        raise PathFileError(f"{path}: no path rows")
    return [
        UserChannel(uid, [rec for _, rec in sorted(items, key=lambda t: t[0])])
        for uid, items in grouped.items()
    ]


def save_paths(users, path) -> None:
    """Write users to the path CSV format (inverse of :func:`load_paths`)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for user in users:
            for pid, p in enumerate(user.paths):
                mag = abs(p.gain)
                gain_db = 20 * math.log10(mag) if mag > 0 else -400.0
                writer.writerow([
                    user.user_id, pid, repr(gain_db), repr(float(np.angle(p.gain))),
                    repr(p.delay * 1e9), repr(math.degrees(p.aoa)),
                ])


def synth_multipath(
    rng,
    n_users: int,
    paths_per_user=(24, 36),
    dominant_margin_db: float = 20.0,
    delay_spread: float = 100e-9,
    fov: float = math.radians(60),
) -> list:
    """Random sparse multipath users standing in for measured channels.

    Every user gets one unit-magnitude dominant path with angle of arrival
    uniform in ``[-fov, fov]`` and zero delay, plus secondary paths whose
    power in dB relative to the dominant path is uniform in
    ``[-40, -dominant_margin_db]``. Secondary angles are uniform over the
    same field of view and their delays uniform in ``[0, delay_spread]``.
    All phases are uniform. ``dominant_margin_db=inf`` zeroes the
    secondary gains.

    ``paths_per_user`` is an int or an inclusive ``(low, high)`` range.
    """
    rng = np.random.default_rng(rng)
    if not 0 < fov <= np.pi / 2:
        raise ValueError(f"field of view {fov} rad must lie in (0, pi/2]")
    lo, hi = (paths_per_user, paths_per_user) if np.isscalar(paths_per_user) else paths_per_user
    if not 1 <= lo <= hi <= 64:
        raise ValueError("paths_per_user must lie within [1, 64]")
    floor_db = min(-40.0, -dominant_margin_db)
    users = []
    for uid in range(n_users):
        n_paths = int(rng.integers(lo, hi + 1))
        paths = [PathRecord(complex(np.exp(2j * np.pi * rng.random())), 0.0,
                            float(rng.uniform(-fov, fov)))]
        for _ in range(n_paths - 1):
            if math.isinf(dominant_margin_db):
                gain = 0j
            else:
                level_db = rng.uniform(floor_db, -dominant_margin_db)
                gain = 10 ** (level_db / 20) * np.exp(2j * np.pi * rng.random())
            paths.append(PathRecord(complex(gain), float(rng.uniform(0, delay_spread)),
                                    float(rng.uniform(-fov, fov))))
        users.append(UserChannel(uid, paths))
    return users


def normalize_dominant_snr(users, target_snr_db: float, cfg: ArrayConfig, noise_var: float) -> list:
    """Rescale each user so its dominant path has the given beamformed SNR.

    Beamformed SNR of the dominant path is ``|alpha|^2 * N / noise_var``.
    Phases and the within-user relative path gains are untouched.
    """
    target = 10 ** (target_snr_db / 10)
    out = []
    for user in users:
        mag = abs(user.dominant.gain)
        if mag == 0:
            raise ValueError(f"user {user.user_id} has zero dominant gain")
        scale = math.sqrt(target * noise_var / cfg.n_antennas) / mag
        out.append(user.scaled(scale))
    return out
