"""
User placement in spatial frequency under guard-interval constraints.

Guards are expressed in bins of the base ``N``-point DFT grid: an ``x``-bin
guard requires every pair of users to be more than ``x * 2*pi/N`` apart,
measured circularly on ``[-pi, pi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .array_core import ArrayConfig, wrap_angle
from .channel_model import spatial_frequency_at

__all__ = [
    "GuardPolicy",
    "InfeasibleScheduleError",
    "circular_distance",
    "guard_width",
    "max_users",
    "guard_satisfied",
    "sample_user_frequencies",
    "uniform_outside",
    "sample_interferer",
    "fov_limit",
    "check_field_of_view",
    "wideband_guard_ok",
    "schedule_users",
]


class InfeasibleScheduleError(RuntimeError):
    """The requested users cannot be placed under the guard constraint."""


@dataclass(frozen=True)
class GuardPolicy:
    guard_bins: float
    reference: str = "narrowband"

    def __post_init__(self):
        if self.guard_bins < 0:
            raise ValueError("guard_bins must be non-negative")
        if self.reference not in ("narrowband", "lowest_frequency"):
            raise ValueError(f"unknown guard reference {self.reference!r}")


def circular_distance(a, b):
    """Distance between angles on the circle, in ``[0, pi]``."""
    return np.abs(wrap_angle(np.asarray(a) - np.asarray(b)))


def guard_width(guard_bins: float, n: int) -> float:
    return guard_bins * 2 * np.pi / n


def max_users(cfg: ArrayConfig, guard_bins: float) -> int:
    """Largest ``K`` whose pairwise guard fits on the circle.

    ``K`` gaps strictly wider than ``g`` need ``K * g < 2*pi``.
    """
    if guard_bins == 0:
        return np.iinfo(np.int64).max
    ratio = cfg.n_antennas / guard_bins
    k = math.floor(ratio)
    return k - 1 if math.isclose(k, ratio) else k


def guard_satisfied(omegas, guard: float) -> bool:
    """True when all pairwise circular distances exceed ``guard`` radians."""
    om = np.sort(np.asarray(omegas, dtype=float))
    if om.size < 2:
        return True
    gaps = np.diff(np.concatenate([om, [om[0] + 2 * np.pi]]))
    if guard == 0:
        return bool(np.all(gaps > 0))
    return bool(np.all(gaps > guard))


def sample_user_frequencies(rng, k_users: int, cfg: ArrayConfig, policy: GuardPolicy) -> np.ndarray:
    """Draw ``k_users`` spatial frequencies with pairwise guard spacing.

    The draw is uniform over all admissible configurations: ``K`` uniform
    points are placed on a circle shortened by ``K * guard``, sorted, and
    each is pushed forward by the guards of its predecessors; a uniform
    global rotation makes every marginal uniform on ``[-pi, pi)``.
    Returned in random order.
    """
    rng = np.random.default_rng(rng)
    if k_users < 1:
        raise ValueError("k_users must be positive")
    if k_users == 1:
        return np.array([wrap_angle(rng.uniform(-np.pi, np.pi))])
    g = guard_width(policy.guard_bins, cfg.n_antennas)
    free = 2 * np.pi - k_users * g
    if free <= 0:
        raise InfeasibleScheduleError(
            f"cannot place {k_users} users with a {policy.guard_bins}-bin guard at "
            f"N={cfg.n_antennas}; at most {max_users(cfg, policy.guard_bins)} fit"
        )
    for _ in range(100):
        x = np.sort(rng.uniform(0.0, free, k_users))
        om = wrap_angle(x + np.arange(k_users) * g + rng.uniform(-np.pi, np.pi))
        om = np.atleast_1d(om)
        # ties are a measure-zero event; redraw rather than return them
        if guard_satisfied(om, g):
            return rng.permutation(om)
    raise InfeasibleScheduleError("could not draw a strictly separated configuration")


def uniform_outside(rng, lo: float, hi: float, size=None):
    """Uniform draws on the circle excluding the arc ``[lo, hi]`` (``lo < hi``)."""
    rng = np.random.default_rng(rng)
    width = hi - lo
    if not 0 <= width < 2 * np.pi:
        raise ValueError("excluded arc must satisfy 0 <= hi - lo < 2*pi")
    x = rng.uniform(0.0, 2 * np.pi - width, size)
    # uniform(a, b) may return a; shift the left edge off the closed arc
    return wrap_angle(hi + np.where(x == 0.0, np.finfo(float).eps, x))


def sample_interferer(rng, omega_desired: float, cfg: ArrayConfig, guard_bins: float = 0.0, size=None):
    """Uniform interferer frequencies outside the guard around ``omega_desired``.

    Interferers are independent of each other; only the distance to the
    desired user is constrained.
    """
    g = guard_width(guard_bins, cfg.n_antennas)
    if g >= np.pi:
        raise ValueError("guard covers the whole circle")
    return uniform_outside(rng, omega_desired - g, omega_desired + g, size)


def fov_limit(bandwidth: float, f_c: float) -> float:
    """Largest ``|theta|`` (radians) keeping ``|Omega|`` below ``pi`` over the band."""
    if bandwidth >= 2 * f_c:
        raise ValueError("bandwidth must be below twice the carrier frequency")
    return math.asin(1.0 / (1.0 + bandwidth / (2 * f_c)))


def check_field_of_view(theta, bandwidth: float, f_c: float):
    return np.abs(theta) < fov_limit(bandwidth, f_c)


def _dominant_freqs(users, f: float, wcfg) -> np.ndarray:
    ref = np.array([u.dominant.omega_ref for u in users])
    return np.atleast_1d(spatial_frequency_at(ref, f, wcfg.f_c))


def _edge_freqs(policy: GuardPolicy, wcfg) -> tuple:
    if policy.reference == "lowest_frequency":
        return (-wcfg.bandwidth / 2, wcfg.bandwidth / 2)
    return (0.0,)


def wideband_guard_ok(users, cfg: ArrayConfig, wcfg, policy: GuardPolicy) -> bool:
    """Dominant-path guard check for a wideband user set.

    With ``reference='lowest_frequency'`` the guard is enforced over the
    whole band. Squint shrinks ordinary separations towards ``f = -B/2``,
    while pairs that face each other across ``+-pi`` come closest at
    ``f = +B/2``; circular distance is smallest at one of the two edges,
    so both are checked. All dominant angles must also lie inside the
    field-of-view limit.
    """
    aoas = np.array([u.dominant.aoa for u in users])
    if not np.all(check_field_of_view(aoas, wcfg.bandwidth, wcfg.f_c)):
        return False
    g = guard_width(policy.guard_bins, cfg.n_antennas)
    return all(guard_satisfied(_dominant_freqs(users, f, wcfg), g) for f in _edge_freqs(policy, wcfg))


def schedule_users(rng, pool, k_users: int, cfg: ArrayConfig, wcfg, policy: GuardPolicy,
                   max_restarts: int = 100) -> list:
    """Pick ``k_users`` users from ``pool`` that jointly satisfy the guard.

    Users are visited in random order and kept when compatible with those
    already kept; the scan restarts with a fresh order when it falls short.
    """
    rng = np.random.default_rng(rng)
    g = guard_width(policy.guard_bins, cfg.n_antennas)
    aoas = np.array([u.dominant.aoa for u in pool])
    in_fov = check_field_of_view(aoas, wcfg.bandwidth, wcfg.f_c)
    freqs = np.stack([_dominant_freqs(pool, f, wcfg) for f in _edge_freqs(policy, wcfg)])
    best = 0
    for _ in range(max_restarts):
        chosen: list = []
        for i in rng.permutation(len(pool)):
            if not in_fov[i]:
                continue
            if all(np.all(circular_distance(freqs[:, i], freqs[:, j]) > g) for j in chosen):
                chosen.append(i)
                if len(chosen) == k_users:
                    return [pool[j] for j in chosen]
        best = max(best, len(chosen))
    raise InfeasibleScheduleError(
        f"scheduled at most {best} of {k_users} users from a pool of {len(pool)}"
    )
