"""
Named experiments behind the ``beamspace-lab`` command.

An :class:`ExperimentConfig` is a flat record (mirrored by JSON config files
and command-line flags). Each experiment turns a validated config into a
:class:`Result`: column names, one row per parameter point, and a small
metadata dict.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .array_core import ArrayConfig, capture_lower_bound, energy_capture, locate_on_grid, place_window, window_response
from .channel_model import WidebandConfig, load_paths, synth_multipath
from .receiver import noise_limited_capture
from .scheduling import GuardPolicy, max_users, sample_user_frequencies, schedule_users
from .stochastic import (
    TABLE1_SCENARIOS,
    db,
    desired_signature,
    eigen_report,
    estimate_mean_interference,
    mf_scaling,
    scaling_study,
    sinr_table,
    sir_margin,
    verify_operator_jensen,
)
from .wideband import spectral_efficiency_report

__all__ = [
    "EXPERIMENTS",
    "PRESETS",
    "ConfigError",
    "ExperimentConfig",
    "Result",
    "load_config",
    "load_preset",
    "validate",
    "run_experiment",
    "format_result",
]

EXPERIMENTS = (
    "energy-capture", "noise-capture", "cosine-sim", "eigen-concentration", "sir-margin",
    "scaling", "sinr-table", "wideband-se", "jensen-check", "mf-scaling",
)
PRESETS = ("table1", "fig5", "fig6", "fig8", "fig10")
THREADS_ENV = "BEAMSPACE_LAB_THREADS"


class ConfigError(ValueError):
    """Config file or flag values could not be parsed."""


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class ExperimentConfig:
    experiment: str = ""
    n: int = 128
    w: int = 5
    zp: int = 1
    guard: float = 2.0
    delta: float = 0.25
    k_users: int = None
    seed: int = 0
    mc_samples: int = 200_000
    snr_grid_db: list = None
    n_list: list = field(default_factory=lambda: [32, 64, 128, 256])
    guard_list: list = None
    delta_list: list = None
    n_ensembles: int = 10_000
    n_subcarriers: int = 64
    fractional_bandwidth: float = 0.2
    f_c: float = 28.5e9
    paths_file: str = None
    paths_per_user: list = field(default_factory=lambda: [24, 36])
    dominant_margin_db: float = 20.0
    dominant_only: bool = False
    pool_size: int = 200
    out: str = None
    format: str = "csv"
    threads: int = field(default_factory=_default_threads)
    description: str = ""

    def updated(self, values: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(self)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        merged = asdict(self)
        merged.update(values)
        return ExperimentConfig(**merged)


@dataclass
class Result:
    experiment: str
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)


def load_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def load_preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("beamspace_lab").joinpath("presets", f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


_INT_FIELDS = ("n", "w", "zp", "seed", "mc_samples", "n_ensembles", "n_subcarriers", "pool_size", "threads")
_REAL_FIELDS = ("guard", "delta", "fractional_bandwidth", "f_c", "dominant_margin_db")
_LIST_FIELDS = ("snr_grid_db", "n_list", "guard_list", "delta_list", "paths_per_user")


def _is_int(x) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def _is_real(x) -> bool:
    return isinstance(x, (int, float, np.integer, np.floating)) and not isinstance(x, bool)


def _type_diagnostics(cfg) -> list:
    diag = [f"{k} must be an integer" for k in _INT_FIELDS if not _is_int(getattr(cfg, k))]
    diag += [f"{k} must be a number" for k in _REAL_FIELDS if not _is_real(getattr(cfg, k))]
    if cfg.k_users is not None and not _is_int(cfg.k_users):
        diag.append("k_users must be an integer")
    for k in _LIST_FIELDS:
        v = getattr(cfg, k)
        if v is not None and not (isinstance(v, (list, tuple)) and all(_is_real(x) for x in v)):
            diag.append(f"{k} must be a list of numbers")
    if not isinstance(cfg.dominant_only, bool):
        diag.append("dominant_only must be true or false")
    return diag


def validate(cfg: ExperimentConfig) -> list:
    """Diagnostics for ``cfg``; an empty list means the config is runnable."""
    diag = _type_diagnostics(cfg)
    if diag:
        return diag
    if cfg.experiment not in EXPERIMENTS:
        diag.append(f"unknown experiment {cfg.experiment!r}")
    if cfg.zp not in (1, 2):
        diag.append(f"unsupported zero-pad factor {cfg.zp}; use 1 or 2")
    if cfg.n < 2:
        diag.append(f"n must be an integer >= 2, got {cfg.n!r}")
    elif cfg.zp in (1, 2) and not 1 <= cfg.w <= cfg.zp * cfg.n:
        diag.append(f"window width {cfg.w} outside [1, {cfg.zp * cfg.n}]")
    if cfg.guard < 0:
        diag.append("guard must be non-negative")
    if not 0 <= cfg.delta <= 0.5:
        diag.append("delta must lie in [0, 0.5]")
    if cfg.mc_samples < 1000:
        diag.append("mc_samples must be at least 1000")
    if cfg.format not in ("csv", "json"):
        diag.append(f"unknown output format {cfg.format!r}")
    if cfg.threads < 1:
        diag.append("threads must be at least 1")
    if not 0 <= cfg.seed < 2**64:
        diag.append("seed must be an unsigned 64-bit integer")
    if list(cfg.n_list) != sorted(cfg.n_list) or any(n < 2 for n in cfg.n_list):
        diag.append("n_list must be sorted with entries >= 2")
    if not 0 <= cfg.fractional_bandwidth < 2:
        diag.append("fractional_bandwidth must lie in [0, 2)")
    if cfg.paths_file is not None and not Path(cfg.paths_file).is_file():
        diag.append(f"paths_file {cfg.paths_file} does not exist")
    if cfg.k_users is not None and cfg.n >= 2 and cfg.guard >= 0:
        k_max = max_users(ArrayConfig(cfg.n), cfg.guard) if cfg.guard > 0 else None
        if cfg.k_users < 1:
            diag.append("k_users must be positive")
        elif k_max is not None and cfg.k_users > k_max:
            diag.append(f"a {cfg.guard}-bin guard admits at most K_max={k_max} users at "
                        f"N={cfg.n}; requested {cfg.k_users}")
    if len(cfg.paths_per_user) != 2 or not 1 <= cfg.paths_per_user[0] <= cfg.paths_per_user[1]:
        diag.append("paths_per_user must be [min, max] with 1 <= min <= max")
    return diag


# -- experiments ------------------------------------------------------------

def _delta_grid(points: int = 101) -> np.ndarray:
    return np.linspace(0.0, 0.5, points)


def _energy_capture(cfg: ExperimentConfig) -> Result:
    acfg = ArrayConfig(cfg.n, cfg.zp)
    n0 = cfg.n // 8
    rows = []
    for d in _delta_grid():
        omega = 2 * np.pi * (n0 + d) / cfg.n
        pos = locate_on_grid(omega, acfg)
        rows.append([d, energy_capture(omega, acfg, cfg.w),
                     capture_lower_bound(cfg.w, pos.n0, pos.delta, pos.sign, cfg.zp)])
    return Result(cfg.experiment, ["delta", "capture", "bound"], rows,
                  {"min_capture": min(r[1] for r in rows), "min_bound": min(r[2] for r in rows)})


def _noise_capture(cfg: ExperimentConfig) -> Result:
    acfg = ArrayConfig(cfg.n, cfg.zp)
    n0 = cfg.n // 8
    rows = [[w, d, noise_limited_capture(2 * np.pi * (n0 + d) / cfg.n, acfg, w)]
            for w in range(1, cfg.w + 1) for d in _delta_grid(51)]
    return Result(cfg.experiment, ["w", "delta", "eta"], rows)


def _cosine_sim(cfg: ExperimentConfig) -> Result:
    acfg = ArrayConfig(cfg.n, cfg.zp)
    omega1 = 2 * np.pi * cfg.delta / cfg.n
    win = place_window(omega1, acfg, cfg.w)
    u1 = window_response(omega1, acfg, win)
    steps = 32 * cfg.n
    # half-step offset keeps the sweep off the DFT grid, where signatures vanish
    grid = -np.pi + 2 * np.pi * (np.arange(steps) + 0.5) / steps
    u = window_response(grid, acfg, win)
    cos = np.abs(u1.conj() @ u) / (np.linalg.norm(u1) * np.linalg.norm(u, axis=0))
    rows = [[om * cfg.n / (2 * np.pi), c] for om, c in zip(grid, cos)]
    return Result(cfg.experiment, ["omega_bins", "cosine"], rows)


def _margin_model(cfg, acfg, guard, delta, rng):
    omega1 = 2 * np.pi * delta / cfg.n
    return estimate_mean_interference(omega1, acfg, cfg.w, guard, rng, cfg.mc_samples, workers=cfg.threads)


def _eigen_concentration(cfg: ExperimentConfig) -> Result:
    acfg = ArrayConfig(cfg.n, cfg.zp)
    rng = np.random.default_rng(cfg.seed)
    guards = cfg.guard_list if cfg.guard_list is not None else [cfg.guard]
    cols = (["guard"] + [f"cum_share_{i + 1}" for i in range(cfg.w)]
            + [f"eig_{i + 1}" for i in range(cfg.w)] + [f"proj_{i + 1}" for i in range(cfg.w)]
            + ["total_db", "margin_db"])
    rows = []
    for g in guards:
        model = _margin_model(cfg, acfg, g, cfg.delta, rng)
        u1 = desired_signature(model)
        rep = eigen_report(model, u1)
        rows.append([g, *rep.cumulative_shares, *rep.eigenvalues, *rep.projections,
                     rep.total_db, float(db(sir_margin(u1, model)))])
    return Result(cfg.experiment, cols, rows)


def _sir_margin(cfg: ExperimentConfig) -> Result:
    rng = np.random.default_rng(cfg.seed)
    guards = cfg.guard_list if cfg.guard_list is not None else [0, 0.5, 1, 1.5, 2, 2.5, 3]
    deltas = cfg.delta_list if cfg.delta_list is not None else [0.0, 0.25, 0.5]
    rows = []
    for zp in (1, 2):
        acfg = ArrayConfig(cfg.n, zp)
        for d in deltas:
            for g in guards:
                model = _margin_model(cfg, acfg, g, d, rng)
                rows.append([zp, d, g, float(db(sir_margin(desired_signature(model), model)))])
    return Result(cfg.experiment, ["zp", "delta", "guard", "margin_db"], rows)


def _scaling(cfg: ExperimentConfig) -> Result:
    res = scaling_study(cfg.n_list, cfg.w, cfg.guard, cfg.seed, cfg.mc_samples, delta=cfg.delta,
                        k_users=cfg.k_users)
    cols = ["n", "k_users", "margin_db", "predicted_db", "sim_min_db", "sim_mean_db"]
    return Result(cfg.experiment, cols, [list(r) for r in res.rows], {"slope": res.slope})


def _sinr_table(cfg: ExperimentConfig) -> Result:
    rng = np.random.default_rng(cfg.seed)
    base = ArrayConfig(cfg.n)
    k = cfg.k_users or max(2, max_users(base, cfg.guard) - 2)
    omegas = sample_user_frequencies(rng, k, base, GuardPolicy(cfg.guard))
    rows = []
    for zp in (1, 2):
        table = sinr_table(omegas, ArrayConfig(cfg.n, zp), cfg.w, cfg.guard, rng,
                           TABLE1_SCENARIOS, cfg.mc_samples, cfg.delta)
        rows += [list(r) for r in table]
    cols = ["scenario", "zp", "prediction_db", "sim_min_db", "sim_mean_db"]
    return Result(cfg.experiment, cols, rows, {"k_users": k})


def _wideband_users(cfg: ExperimentConfig, acfg, wcfg, rng):
    if cfg.paths_file:
        pool = load_paths(cfg.paths_file)
    else:
        pool = synth_multipath(rng, cfg.pool_size, tuple(cfg.paths_per_user), cfg.dominant_margin_db)
    users = schedule_users(rng, pool, cfg.k_users or 16, acfg, wcfg,
                           GuardPolicy(cfg.guard, "lowest_frequency"))
    if cfg.dominant_only:
        users = [u.dominant_only() for u in users]
    return users


def _wideband_se(cfg: ExperimentConfig) -> Result:
    rng = np.random.default_rng(cfg.seed)
    acfg = ArrayConfig(cfg.n, cfg.zp)
    wcfg = WidebandConfig.fractional(cfg.fractional_bandwidth, cfg.f_c, n_subcarriers=cfg.n_subcarriers)
    users = _wideband_users(cfg, acfg, wcfg, rng)
    snr = cfg.snr_grid_db if cfg.snr_grid_db is not None else [0, 5, 10, 15, 20, 25, 30, 35, 40]
    rep = spectral_efficiency_report(users, acfg, wcfg, cfg.w, snr)
    rows = [[s, a, b, c] for s, a, b, c in zip(rep.snr_db, rep.unconstrained, rep.full_array, rep.beamspace)]
    finite = rep.sir[np.isfinite(rep.sir)]
    meta = {"k_users": len(users)}
    if finite.size:
        meta.update(sir_min_db=float(db(finite.min())), sir_median_db=float(db(np.median(finite))))
    return Result(cfg.experiment, ["snr_db", "unconstrained", "full_array", "beamspace"], rows, meta)


def _jensen_check(cfg: ExperimentConfig) -> Result:
    rep = verify_operator_jensen(cfg.seed, dim=cfg.w, n_ensembles=cfg.n_ensembles)
    cols = ["n_ensembles", "max_relative_violation", "violations", "min_gap_eigenvalue"]
    return Result(cfg.experiment, cols,
                  [[rep.n_ensembles, rep.max_relative_violation, rep.n_violations, rep.min_gap_eigenvalue]])


def _mf_scaling(cfg: ExperimentConfig) -> Result:
    rows = [list(r) for r in mf_scaling(cfg.n_list, cfg.seed, cfg.mc_samples)]
    nz = [r[3] for r in rows]
    return Result(cfg.experiment, ["n", "signal_energy", "mean_z2", "n_mean_z2"], rows,
                  {"n_mean_z2_ratio": max(nz) / min(nz)})


_RUNNERS = {
    "energy-capture": _energy_capture,
    "noise-capture": _noise_capture,
    "cosine-sim": _cosine_sim,
    "eigen-concentration": _eigen_concentration,
    "sir-margin": _sir_margin,
    "scaling": _scaling,
    "sinr-table": _sinr_table,
    "wideband-se": _wideband_se,
    "jensen-check": _jensen_check,
    "mf-scaling": _mf_scaling,
}


def run_experiment(cfg: ExperimentConfig) -> Result:
    diag = validate(cfg)
    if diag:
        raise ConfigError("; ".join(diag))
    return _RUNNERS[cfg.experiment](cfg)


# -- output -----------------------------------------------------------------

def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "" if not math.isfinite(x) else format(float(x), ".10g")
    return str(x)


def _json_value(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else None
    return x


def format_result(res: Result, cfg: ExperimentConfig, timestamp: bool = True) -> str:
    """Serialize ``res`` as CSV or JSON text.

    Every row carries the experiment id, seed and tool version. With
    ``timestamp`` a generation time is added (a leading ``#`` line in CSV).
    """
    cols = ["experiment", *res.columns, "seed", "version"]
    rows = [[res.experiment, *r, cfg.seed, __version__] for r in res.rows]
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    if cfg.format == "json":
        doc = {"experiment": res.experiment, "version": __version__, "seed": cfg.seed}
        if timestamp:
            doc["generated"] = stamp
        doc["meta"] = {k: _json_value(v) for k, v in res.meta.items()}
        doc["rows"] = [{c: _json_value(v) for c, v in zip(cols, r)} for r in rows]
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    if timestamp:
        buf.write(f"# beamspace-lab {__version__} generated {stamp}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    writer.writerows([[_cell(x) for x in r] for r in rows])
    return buf.getvalue()
