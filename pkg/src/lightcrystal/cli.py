"""Command-line entry point: deterministic run orchestration.

Subcommands mirror the run modes (ground-state, quench, spectrum,
threshold-scan, sweep).  Exit codes: 0 success, 1 numeric failure,
2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import driver, io, observables, spectrum
from .errors import ConfigurationError, NumericsError

_SUBCOMMANDS = {
    "ground-state": "ground_state",
    "quench": "quench",
    "spectrum": "spectrum",
    "threshold-scan": "threshold_scan",
    "sweep": "sweep",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lightcrystal",
        description="coupled BEC/light crystallization simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a flat key=value config")
        p.add_argument("--output", default=None, help="output directory override")
        p.add_argument("--seed", type=int, default=None, help="rng seed override")
        p.add_argument("--override", action="append", default=[],
                       metavar="KEY=VALUE", help="config override (repeatable)")
    return parser


def _load_config(args) -> io.RunConfig:
    text = Path(args.config).read_text(encoding="utf-8")
    overrides = list(args.override)
    if args.output is not None:
        overrides.append(f"output_dir={args.output}")
    if args.seed is not None:
        overrides.append(f"rng_seed={args.seed}")
    if overrides:
        text = io.apply_overrides(text, overrides)
    config = io.parse_config(text)
    expected = _SUBCOMMANDS[args.command]
    if config.mode != expected:
        raise ConfigurationError(
            f"config mode {config.mode!r} does not match subcommand "
            f"{args.command!r} (expected {expected!r})")
    return config


def _run_ground_state(config: io.RunConfig, out_dir: Path) -> None:
    params = config.model_params()
    state, fields, record = driver.ground_state(
        params, seed=config.rng_seed, max_time=config.t_max,
        check_every=config.sample_every)
    record.snapshots.append(driver.take_snapshot(state, fields))
    io.write_outputs(record, config, out_dir)


def _run_quench(config: io.RunConfig, out_dir: Path) -> None:
    params = config.model_params()
    try:
        state, fields, record = driver.quench_evolution(
            params, t_max=config.t_max, sample_every=config.sample_every,
            seed=config.rng_seed, snapshot_every=1)
    except NumericsError as exc:
        partial = getattr(exc, "partial_record", None)
        if partial is not None:
            io.write_outputs(partial, config, out_dir)
        raise
    record.maxima = observables.track_intensity_maxima(
        [snap.time for snap in record.snapshots],
        [snap.intensity_total for snap in record.snapshots],
        record.snapshots[0].x)
    io.write_outputs(record, config, out_dir)


def _run_spectrum(config: io.RunConfig, out_dir: Path) -> None:
    params = config.model_params()
    state, fields, record = driver.ground_state(
        params, seed=config.rng_seed, max_time=config.t_max,
        check_every=config.sample_every, residual_tol=1e-8)
    lin = spectrum.build_linearization_matrix(state, fields, params,
                                              q_cutoff=config.q_cutoff)
    modes = spectrum.diagonalize_and_classify(lin)
    record.spectrum_table = modes.table()
    q = lin.q_grid
    omega = spectrum.homogeneous_dispersion(params, q)
    record.dispersion_table = np.column_stack([q, omega.real, omega.imag])
    record.snapshots.append(driver.take_snapshot(state, fields))
    manifest = io.write_outputs(record, config, out_dir)
    if config.write_eigenvectors:
        _write_eigenvectors(modes, manifest.parent)


def _write_eigenvectors(modes, out: Path) -> None:
    m = len(modes.q_grid)
    rows_mode, rows_q, rows_u, rows_v = [], [], [], []
    for i in range(len(modes.omega)):
        vec = modes.vectors[:, i]
        rows_mode.extend([i] * m)
        rows_q.extend(modes.q_grid)
        rows_u.extend(np.abs(vec[:m]) ** 2)
        rows_v.extend(np.abs(vec[m:]) ** 2)
    io._write_csv(out / "modes_momentum.csv",
                  ("mode", "q", "weight_u", "weight_v"),
                  (np.array(rows_mode), np.array(rows_q),
                   np.array(rows_u), np.array(rows_v)))


def _run_threshold_scan(config: io.RunConfig, out_dir: Path) -> None:
    if len(config.intensity_grid) < 2:
        raise ConfigurationError("threshold_scan requires intensity_grid with "
                                 "at least two points")
    params = config.model_params()
    threshold, record = driver.threshold_scan(
        params, config.intensity_grid, seed=config.rng_seed,
        max_time=config.t_max)
    io.write_outputs(record, config, out_dir)


def _run_sweep(config: io.RunConfig, out_dir: Path) -> None:
    if not config.intensity_grid:
        raise ConfigurationError("sweep requires a non-empty intensity_grid")
    for i, intensity in enumerate(config.intensity_grid):
        sub = Path(out_dir) / f"point_{i:04d}"
        sub_config = replace(config, mode="ground_state",
                             intensity_left=float(intensity),
                             intensity_right=float(intensity),
                             output_dir=str(sub), defaulted=frozenset())
        _run_ground_state(sub_config, sub)


_RUNNERS = {
    "ground_state": _run_ground_state,
    "quench": _run_quench,
    "spectrum": _run_spectrum,
    "threshold_scan": _run_threshold_scan,
    "sweep": _run_sweep,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        out_dir = io.ensure_writable(args.output or config.output_dir)
    except (ConfigurationError, FileNotFoundError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        _RUNNERS[config.mode](config, out_dir)
    except NumericsError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
