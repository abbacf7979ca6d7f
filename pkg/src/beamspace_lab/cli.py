"""Command-line entry point: ``beamspace-lab <experiment> [options]``.

Exit status is 0 on success, 2 for configuration errors, 3 when users
cannot be scheduled under the guard and 4 on numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .channel_model import PathFileError
from .experiments import (
    EXPERIMENTS,
    PRESETS,
    THREADS_ENV,
    ConfigError,
    ExperimentConfig,
    format_result,
    load_config,
    load_preset,
    run_experiment,
    validate,
)
from .scheduling import InfeasibleScheduleError

EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERICAL = 2, 3, 4

_INT_LISTS = {"n_list", "paths_per_user"}
_FLOAT_LISTS = {"snr_grid_db", "guard_list", "delta_list"}
_INTS = {"n", "w", "zp", "seed", "mc_samples", "n_ensembles", "n_subcarriers", "pool_size", "threads", "k_users"}
_SKIP = {"experiment", "description", "format", "threads", "seed", "out"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="beamspace-lab", description="Run a named beamspace experiment and write a table.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", type=Path, help="flat JSON config; flags override its values")
    p.add_argument("--preset", choices=PRESETS, help="bundled config, applied before --config")
    S = argparse.SUPPRESS
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--out", default=S, help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=S)
    p.add_argument("--threads", type=int, default=S, help=f"worker cap (default: ${THREADS_ENV} or 1)")
    p.add_argument("--no-timestamp", action="store_true", help="omit the generation time")
    p.add_argument("-v", "--verbose", action="store_true")
    group = p.add_argument_group("experiment parameters")
    for f in fields(ExperimentConfig):
        if f.name in _SKIP:
            continue
        flag = "--" + f.name.replace("_", "-")
        if f.name == "dominant_only":
            group.add_argument(flag, action="store_true", default=S)
        elif f.name in _INT_LISTS:
            group.add_argument(flag, type=int, nargs="+", default=S)
        elif f.name in _FLOAT_LISTS:
            group.add_argument(flag, type=float, nargs="+", default=S)
        elif f.name in _INTS:
            group.add_argument(flag, type=int, default=S)
        elif f.name == "paths_file":
            group.add_argument(flag, default=S)
        else:
            group.add_argument(flag, type=float, default=S)
    return p


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge defaults, preset, config file and flags, in increasing priority."""
    cfg = ExperimentConfig()
    for source in (load_preset(args.preset) if args.preset else None,
                   load_config(args.config) if args.config else None):
        if source is None:
            continue
        if source.get("experiment", args.experiment) != args.experiment:
            raise ConfigError(f"config is for experiment {source['experiment']!r}, not {args.experiment!r}")
        cfg = cfg.updated(source)
    skip = {"experiment", "config", "preset", "no_timestamp", "verbose"}
    flags = {k: v for k, v in vars(args).items() if k not in skip}
    return cfg.updated({**flags, "experiment": args.experiment})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except (ConfigError, TypeError) as exc:
        print(f"beamspace-lab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    diag = validate(cfg)
    if diag:
        for d in diag:
            print(f"beamspace-lab: {d}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with np.errstate(divide="ignore", invalid="ignore"):
            result = run_experiment(cfg)
    except InfeasibleScheduleError as exc:
        print(f"beamspace-lab: infeasible schedule: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"beamspace-lab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, PathFileError, ValueError) as exc:
        print(f"beamspace-lab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = format_result(result, cfg, timestamp=not args.no_timestamp)
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
