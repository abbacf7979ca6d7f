"""
Mean interference covariance and the SINR predictions built on it.

Signatures here are unit-energy normalized, ``u(Omega) = T a(Omega) / sqrt(N)``,
so ``trace(M_I)`` is the mean fraction of a typical interferer's energy that
lands in the desired user's window. In these units a user's power is its
beamformed power ``N * P_k``; with ``noise_var = 1`` it is the beamformed SNR.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .array_core import (
    ArrayConfig,
    BeamspaceWindow,
    GridPosition,
    locate_on_grid,
    place_window,
    window_response,
)
from .receiver import hpd_solve, noise_covariance, two_bin_mf_stats
from .scheduling import GuardPolicy, max_users, sample_interferer, sample_user_frequencies

__all__ = [
    "MeanInterferenceModel",
    "EigenReport",
    "estimate_mean_interference",
    "desired_signature",
    "mean_total_covariance",
    "sir_margin",
    "expected_sinr_lower_bound",
    "predicted_sinr_equal_power",
    "predicted_sinr_min_power",
    "eigen_report",
    "jensen_gap",
    "JensenReport",
    "verify_operator_jensen",
    "simulate_user_sinrs",
    "PowerScenario",
    "TABLE1_SCENARIOS",
    "assign_powers",
    "TableRow",
    "sinr_table",
    "ScalingRow",
    "ScalingResult",
    "scaling_study",
    "mf_scaling",
    "db",
]


def db(x):
    return 10 * np.log10(x)


@dataclass
class MeanInterferenceModel:
    m_i: np.ndarray
    n_samples: int
    guard_bins: float
    anchor: GridPosition
    cfg: ArrayConfig
    window: BeamspaceWindow
    omega_desired: float

    @property
    def zp_factor(self) -> int:
        return self.cfg.zp_factor

    @property
    def width(self) -> int:
        return self.window.width


def _chunk_outer(args):
    child, omega_desired, cfg, win, guard_bins, m = args
    om = sample_interferer(child, omega_desired, cfg, guard_bins, m)
    u = window_response(om, cfg, win)
    return u @ u.conj().T


def estimate_mean_interference(omega_desired: float, cfg: ArrayConfig, w: int, guard_bins: float,
                               rng, n_samples: int = 200_000, chunk: int = 50_000,
                               workers: int = 1) -> MeanInterferenceModel:
    """Monte-Carlo estimate of ``M_I = E[u(Omega) u(Omega)^H]``.

    Interferers are uniform outside the guard around ``omega_desired``.
    Each chunk draws from its own child stream of ``rng`` and the partial
    sums are added in chunk order, so the result does not depend on
    ``workers``.
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    rng = np.random.default_rng(rng)
    win = place_window(omega_desired, cfg, w)
    sizes = [chunk] * (n_samples // chunk)
    if n_samples % chunk:
        sizes.append(n_samples % chunk)
    jobs = [(child, omega_desired, cfg, win, guard_bins, m)
            for child, m in zip(rng.spawn(len(sizes)), sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_outer, jobs))
    else:
        parts = [_chunk_outer(j) for j in jobs]
    m_i = sum(parts) / n_samples
    m_i = (m_i + m_i.conj().T) / 2
    return MeanInterferenceModel(m_i, n_samples, guard_bins, locate_on_grid(omega_desired, cfg),
                                 cfg, win, float(omega_desired))


def desired_signature(model: MeanInterferenceModel, omega=None) -> np.ndarray:
    """Normalized windowed signature of a desired path (default: the model's anchor)."""
    omega = model.omega_desired if omega is None else omega
    return window_response(omega, model.cfg, model.window)


def mean_total_covariance(model: MeanInterferenceModel, p_tot: float, noise_var: float = 1.0,
                          noise_cov=None) -> np.ndarray:
    """``p_tot * M_I + C_n``; ``C_n`` defaults to the window's colored noise."""
    if noise_cov is None:
        noise_cov = noise_covariance(model.cfg, model.window, noise_var)
    return p_tot * model.m_i + noise_cov


def sir_margin(u1, model: MeanInterferenceModel) -> float:
    """``u1^H M_I^{-1} u1``: mean SIR against one equal-power typical interferer."""
    u1 = np.asarray(u1)
    return float(np.real(np.vdot(u1, hpd_solve(model.m_i, u1))))


def expected_sinr_lower_bound(u1, p1: float, model: MeanInterferenceModel, p_tot: float,
                              noise_var: float = 1.0, noise_cov=None) -> float:
    """Lower bound on mean LMMSE SINR from the averaged interference covariance."""
    u1 = np.asarray(u1)
    r = mean_total_covariance(model, p_tot, noise_var, noise_cov)
    return float(p1 * np.real(np.vdot(u1, hpd_solve(r, u1))))


def predicted_sinr_equal_power(margin: float, k_users: int) -> float:
    """Interference-limited SINR in dB for ``k_users`` equal-power users."""
    if k_users < 2:
        raise ValueError("need at least one interferer")
    return float(db(margin) - db(k_users - 1))


def predicted_sinr_min_power(margin: float, k_users: int, p_min: float) -> float:
    """Worst-case SINR in dB when powers have unit mean and are at least ``p_min``."""
    if k_users < 2 or p_min <= 0:
        raise ValueError("need k_users >= 2 and p_min > 0")
    return float(db(p_min / (k_users - 1)) + db(margin))


@dataclass
class EigenReport:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    cumulative_shares: np.ndarray
    projections: np.ndarray

    @property
    def total_db(self) -> float:
        return float(db(np.sum(self.eigenvalues)))

    @property
    def margin_from_modes(self) -> float:
        return float(np.sum(self.projections / self.eigenvalues))


def eigen_report(model: MeanInterferenceModel, u1) -> EigenReport:
    """Eigenmodes of ``M_I`` (largest first) and the desired user's energy on each."""
    lam, q = np.linalg.eigh(model.m_i)
    lam = np.clip(lam, 0.0, None)
    # descending value; equal values ordered by index of their largest component
    lead = np.argmax(np.abs(q), axis=0)
    order = np.lexsort((lead, -lam))
    lam, q = lam[order], q[:, order]
    proj = np.abs(q.conj().T @ np.asarray(u1)) ** 2
    return EigenReport(lam, q, np.cumsum(lam) / np.sum(lam), proj)


def jensen_gap(matrices, vectors, weights=None) -> np.ndarray:
    """``u^H E[R]^{-1} u - E[u^H R^{-1} u]`` for each column ``u`` of ``vectors``.

    ``matrices`` has shape ``(m, W, W)``; the expectation is a weighted
    average over its first axis. Returns ``(gap, E[u^H R^{-1} u])``; the gap
    is non-positive for positive-definite ensembles.
    """
    matrices = np.asarray(matrices)
    m = matrices.shape[0]
    wts = np.full(m, 1.0 / m) if weights is None else np.asarray(weights) / np.sum(weights)
    mean_r = np.tensordot(wts, matrices, axes=1)
    lhs = np.real(np.einsum("wv,wv->v", vectors.conj(), np.linalg.solve(mean_r, vectors)))
    per = np.linalg.solve(matrices, np.broadcast_to(vectors, (m,) + vectors.shape))
    rhs = np.real(np.einsum("wv,mwv->v", vectors.conj(), per * wts[:, None, None]))
    return lhs - rhs, rhs


class JensenReport(NamedTuple):
    max_relative_violation: float
    n_violations: int
    min_gap_eigenvalue: float
    n_ensembles: int


def _random_pd(rng, m: int, dim: int) -> np.ndarray:
    a = (rng.standard_normal((m, dim, dim)) + 1j * rng.standard_normal((m, dim, dim))) / math.sqrt(2)
    eps = 10 ** rng.uniform(-3, 0, (m, 1, 1))
    return a.conj().transpose(0, 2, 1) @ a / dim + eps * np.eye(dim)


def verify_operator_jensen(rng, dim: int = 5, n_matrices: int = 8, n_vectors: int = 16,
                           n_ensembles: int = 1, tol: float = 1e-9) -> JensenReport:
    """Check ``u^H E[R]^{-1} u <= E[u^H R^{-1} u]`` on random PD ensembles.

    Each ensemble is ``n_matrices`` Wishart-type matrices ``A^H A / W + eps I``
    with random weights. Also reports the smallest eigenvalue of
    ``E[R^{-1}] - E[R]^{-1}``, which should be non-negative.
    """
    rng = np.random.default_rng(rng)
    worst, count, min_eig = -np.inf, 0, np.inf
    for _ in range(n_ensembles):
        mats = _random_pd(rng, n_matrices, dim)
        wts = rng.random(n_matrices) + 0.1
        vecs = rng.standard_normal((dim, n_vectors)) + 1j * rng.standard_normal((dim, n_vectors))
        gap, rhs = jensen_gap(mats, vecs, wts)
        rel = gap / rhs
        worst = max(worst, float(np.max(rel)))
        count += int(np.sum(rel > tol))
        wn = wts / wts.sum()
        diff = np.tensordot(wn, np.linalg.inv(mats), axes=1) - np.linalg.inv(np.tensordot(wn, mats, axes=1))
        diff = (diff + diff.conj().T) / 2
        scale = np.max(np.abs(diff))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(diff)[0] / scale))
    return JensenReport(worst, count, min_eig, n_ensembles)


def simulate_user_sinrs(omegas, powers, cfg: ArrayConfig, w: int, noise_var: float = 1.0,
                        users=None) -> np.ndarray:
    """Beamspace LMMSE SINR of each user against all others (linear).

    Every user is received through its own ``w``-bin window. ``powers``
    are beamformed powers (see module notes). ``users`` restricts the
    computation to a subset of indices.
    """
    omegas = np.asarray(omegas, dtype=float)
    powers = np.asarray(powers, dtype=float)
    idx = range(len(omegas)) if users is None else users
    out = []
    for k in idx:
        win = place_window(omegas[k], cfg, w)
        u = window_response(omegas, cfg, win)
        others = np.delete(np.arange(len(omegas)), k)
        uo = u[:, others]
        r = (uo * powers[others]) @ uo.conj().T + noise_covariance(cfg, win, noise_var)
        out.append(powers[k] * np.real(np.vdot(u[:, k], hpd_solve(r, u[:, k]))))
    return np.array(out)


@dataclass(frozen=True)
class PowerScenario:
    """Per-user beamformed SNR levels and the level whose users are reported.

    Users are split across ``levels_db``; the reported level receives the
    extra users so that its members see the other levels in equal numbers.
    """

    name: str
    levels_db: tuple
    report_db: float


TABLE1_SCENARIOS = (
    PowerScenario("10 dB, equal power", (10.0,), 10.0),
    PowerScenario("10 dB, half of the interferers 10 dB stronger", (10.0, 20.0), 10.0),
    PowerScenario("20 dB, half of the interferers 10 dB weaker", (10.0, 20.0), 20.0),
    PowerScenario("30 dB, equal power", (30.0,), 30.0),
    PowerScenario("60 dB, equal power", (60.0,), 60.0),
)


def assign_powers(k_users: int, scenario: PowerScenario, rng=None) -> np.ndarray:
    """Linear per-user powers for ``scenario``, randomly permuted when ``rng`` is given."""
    others = [lv for lv in scenario.levels_db if lv != scenario.report_db]
    per = (k_users - 1) // len(scenario.levels_db) if others else 0
    levels = [scenario.report_db] * (k_users - per * len(others))
    for lv in others:
        levels += [lv] * per
    p = 10 ** (np.array(levels) / 10)
    if rng is not None:
        p = np.random.default_rng(rng).permutation(p)
    return p


class TableRow(NamedTuple):
    scenario: str
    zp_factor: int
    prediction_db: float
    sim_min_db: float
    sim_mean_db: float


def sinr_table(omegas, cfg: ArrayConfig, w: int, guard_bins: float, rng,
               scenarios=TABLE1_SCENARIOS, n_samples: int = 200_000, delta: float = 0.25,
               model: MeanInterferenceModel = None) -> list:
    """Predicted vs simulated SINR for a fixed user layout ``omegas``.

    The prediction uses one ``M_I`` computed for a desired user at
    fractional offset ``delta`` and is applied to every reported user.
    Simulated statistics are the min and mean (in dB) over reported users.
    """
    rng = np.random.default_rng(rng)
    k = len(omegas)
    if model is None:
        omega_ref = 2 * np.pi * delta / cfg.n_antennas
        model = estimate_mean_interference(omega_ref, cfg, w, guard_bins, rng, n_samples)
    u1 = desired_signature(model)
    rows = []
    for sc in scenarios:
        p = assign_powers(k, sc, rng)
        report = np.flatnonzero(np.isclose(p, 10 ** (sc.report_db / 10)))
        p1 = p[report[0]]
        pred = expected_sinr_lower_bound(u1, p1, model, float(np.sum(p) - p1))
        sims = db(simulate_user_sinrs(omegas, p, cfg, w, users=report))
        rows.append(TableRow(sc.name, cfg.zp_factor, float(db(pred)), float(np.min(sims)),
                             float(np.mean(sims))))
    return rows


class ScalingRow(NamedTuple):
    n_antennas: int
    k_users: int
    margin_db: float
    predicted_db: float
    sim_min_db: float
    sim_mean_db: float


class ScalingResult(NamedTuple):
    rows: list
    slope: float


def scaling_study(n_list, w: int, guard_bins: float, rng, n_samples: int = 200_000,
                  snr_per_antenna_db: float = 40.0, delta: float = 0.25, k_users=None) -> ScalingResult:
    """SIR margin and simulated SINR versus array size.

    For each ``N`` the margin is computed at offset ``delta`` and an
    equal-power layout of ``K`` users with the same guard is simulated;
    ``K`` defaults to two fewer than the most users the guard admits.
    ``slope`` is the least-squares slope of margin (dB) against ``10 log10 N``.
    """
    rng = np.random.default_rng(rng)
    n_list = list(n_list)
    if n_list != sorted(n_list):
        raise ValueError("n_list must be sorted")
    rows = []
    for n in n_list:
        cfg = ArrayConfig(n)
        k = k_users(n) if callable(k_users) else (k_users or max(2, max_users(cfg, guard_bins) - 2))
        model = estimate_mean_interference(2 * np.pi * delta / n, cfg, w, guard_bins, rng, n_samples)
        margin = sir_margin(desired_signature(model), model)
        omegas = sample_user_frequencies(rng, k, cfg, GuardPolicy(guard_bins))
        p = np.full(k, n * 10 ** (snr_per_antenna_db / 10))
        sims = db(simulate_user_sinrs(omegas, p, cfg, w))
        rows.append(ScalingRow(n, k, float(db(margin)), predicted_sinr_equal_power(margin, k),
                               float(np.min(sims)), float(np.mean(sims))))
    x = db(np.array(n_list, dtype=float))
    y = np.array([r.margin_db for r in rows])
    slope = float(np.polyfit(x, y, 1)[0]) if len(rows) > 1 else float("nan")
    return ScalingResult(rows, slope)


def mf_scaling(n_list, rng, n_samples: int = 1_000_000, frac: float = 0.5) -> list:
    """Two-bin combiner statistics versus ``N``: ``(N, signal, E[Z^2], N*E[Z^2])``.

    The desired frequency sits at ``frac`` of the way between bins 0 and 1.
    """
    rng = np.random.default_rng(rng)
    out = []
    for n in n_list:
        st = two_bin_mf_stats(2 * np.pi * frac / n, n, rng, n_samples)
        out.append((n, st.signal_energy, st.mean_interference_energy, n * st.mean_interference_energy))
    return out
