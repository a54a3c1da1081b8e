"""Flat-text run configuration and deterministic output serialization.

Configs are UTF-8 ``key = value`` documents with ``#`` comments.  The schema
is flat and closed: unknown keys are rejected with a line reference, defaults
are applied and recorded, and a config round-trips losslessly through
:func:`serialize_config`.  Output directories contain a manifest (a valid
config echo plus commented metadata), CSV time series, per-snapshot profile
tables and spectrum/scan tables; all floats are written with 17 significant
digits so identical runs produce byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .model import ModelParams

MODES = ("ground_state", "quench", "spectrum", "threshold_scan", "sweep")


class ParseError(ConfigurationError):
    """Malformed or out-of-range configuration text."""


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration: ModelParams fields plus run plumbing."""

    mode: str
    zeta: float
    box_length: float
    g_interaction: float = 1.0
    intensity_left: float = 0.0
    intensity_right: float = 0.0
    trap_strength: float = 0.0
    grid_points_per_wavelength: int = 32
    time_step: float = 1e-3
    padding: float = 2.0
    rng_seed: int = 0
    t_max: float = 10.0
    sample_every: int = 100
    output_dir: str = "run_output"
    q_cutoff: float = 8.0 * np.pi
    intensity_grid: tuple = ()
    write_eigenvectors: bool = False
    edge_matched: bool = False
    defaulted: frozenset = field(default_factory=frozenset, compare=False)

    def model_params(self) -> ModelParams:
        return ModelParams(
            zeta=self.zeta, box_length=self.box_length,
            g_interaction=self.g_interaction,
            intensity_left=self.intensity_left,
            intensity_right=self.intensity_right,
            trap_strength=self.trap_strength,
            grid_points_per_wavelength=self.grid_points_per_wavelength,
            time_step=self.time_step, padding=self.padding,
            edge_matched=self.edge_matched)


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_grid(text: str) -> tuple:
    if not text.strip():
        return ()
    return tuple(float(v) for v in text.split(","))


_PARSERS = {
    "mode": str,
    "zeta": float,
    "box_length": float,
    "g_interaction": float,
    "intensity_left": float,
    "intensity_right": float,
    "trap_strength": float,
    "grid_points_per_wavelength": int,
    "time_step": float,
    "padding": float,
    "rng_seed": int,
    "t_max": float,
    "sample_every": int,
    "output_dir": str,
    "q_cutoff": float,
    "intensity_grid": _parse_grid,
    "write_eigenvectors": _parse_bool,
    "edge_matched": _parse_bool,
}

_REQUIRED = ("mode", "zeta", "box_length")

_RANGE_CHECKS = {
    "zeta": lambda v: v >= 0,
    "box_length": lambda v: v > 0,
    "intensity_left": lambda v: v >= 0,
    "intensity_right": lambda v: v >= 0,
    "trap_strength": lambda v: v >= 0,
    "grid_points_per_wavelength": lambda v: v >= 32,
    "time_step": lambda v: v > 0,
    "padding": lambda v: v > 0,
    "t_max": lambda v: v > 0,
    "sample_every": lambda v: v >= 1,
    "q_cutoff": lambda v: v > 0,
    "rng_seed": lambda v: v >= 0,
}


def parse_config(text: str) -> RunConfig:
    """Parse and validate a flat key = value document.

    Raises ParseError naming the offending key and line for unknown keys,
    unparsable or out-of-range values, duplicates, and a missing mode.
    """
    raw: dict[str, str] = {}
    lines_of: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParseError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _PARSERS:
            raise ParseError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ParseError(f"line {lineno}: duplicate key {key!r} "
                             f"(first set on line {lines_of[key]})")
        raw[key] = value
        lines_of[key] = lineno

    for key in _REQUIRED:
        if key not in raw:
            raise ParseError(f"missing required key {key!r}")

    values = {}
    for key, value in raw.items():
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ParseError(
                f"line {lines_of[key]}: bad value for {key!r}: {exc}") from exc

    if values["mode"] not in MODES:
        raise ParseError(f"line {lines_of['mode']}: mode must be one of "
                         f"{', '.join(MODES)}; got {values['mode']!r}")
    for key, check in _RANGE_CHECKS.items():
        if key in values and not check(values[key]):
            where = f"line {lines_of[key]}: " if key in lines_of else ""
            raise ParseError(f"{where}value out of range for {key!r}: {values[key]!r}")
    if any(v < 0 for v in values.get("intensity_grid", ())):
        raise ParseError(f"line {lines_of['intensity_grid']}: "
                         "intensity_grid entries must be >= 0")

    known = {f.name for f in dc_fields(RunConfig)} - {"defaulted"}
    defaulted = frozenset(known - set(values))
    config = RunConfig(**values, defaulted=defaulted)
    config.model_params()  # cross-field validation
    return config


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, tuple):
        return ",".join(f"{v:.17g}" for v in value)
    return str(value)


def serialize_config(config: RunConfig) -> str:
    """Canonical text form; parse(serialize(c)) == c."""
    lines = []
    for f in dc_fields(RunConfig):
        if f.name == "defaulted":
            continue
        lines.append(f"{f.name} = {_format_value(getattr(config, f.name))}")
    return "\n".join(lines) + "\n"


def apply_overrides(config_text: str, overrides) -> str:
    """Apply key=value override strings on top of a config document."""
    parsed = {}
    for item in overrides:
        if "=" not in item:
            raise ParseError(f"override {item!r}: expected key=value")
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in _PARSERS:
            raise ParseError(f"override: unknown key {key!r}")
        parsed[key] = value
    kept = []
    for line in config_text.splitlines():
        stripped = line.split("#", 1)[0].strip()
        key = stripped.split("=", 1)[0].strip() if "=" in stripped else None
        if key not in parsed:
            kept.append(line)
    kept.extend(f"{k} = {v}" for k, v in parsed.items())
    return "\n".join(kept) + "\n"


# -- output writing ----------------------------------------------------------

def _fmt(value) -> str:
    return f"{float(value):.17g}"


def _write_csv(path: Path, header, columns) -> None:
    rows = len(columns[0]) if columns else 0
    lines = [",".join(header)]
    for i in range(rows):
        lines.append(",".join(_fmt(col[i]) for col in columns))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def ensure_writable(directory) -> Path:
    """Create the output directory and verify it accepts writes."""
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("", encoding="utf-8")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {out} is not writable: {exc}") from exc
    return out


def write_outputs(record, config: RunConfig, out_dir=None) -> Path:
    """Serialize a run record into ``out_dir``; returns the manifest path.

    The manifest is itself a parseable config (non-config metadata lives in
    comment lines), so a run can be reproduced from its output directory
    alone.  File contents depend only on the record, never on wall-clock.
    """
    from . import __version__

    out = ensure_writable(out_dir or config.output_dir)
    lines = ["# lightcrystal run manifest",
             f"# version = {__version__}",
             f"# converged = {str(record.converged).lower()}",
             f"# iterations = {record.iterations}",
             f"# stop_reason = {record.stop_reason}",
             f"# snapshots = {len(record.snapshots)}"]
    if record.threshold is not None:
        lines.append(f"# threshold = {_fmt(record.threshold)}")
    if record.seed is not None:
        lines.append(f"# seed = {record.seed}")
    manifest = out / "manifest.txt"
    manifest.write_text("\n".join(lines) + "\n" + serialize_config(config),
                        encoding="utf-8")

    if len(record.times):
        _write_csv(out / "timeseries.csv",
                   ("time", "reflectivity", "kinetic_energy", "contrast"),
                   (record.times, record.reflectivity, record.kinetic,
                    record.contrast))
    if record.snapshots:
        _write_csv(out / "snapshots.csv", ("index", "time"),
                   (np.arange(len(record.snapshots)),
                    np.array([snap.time for snap in record.snapshots])))
        for i, snap in enumerate(record.snapshots):
            _write_csv(out / f"snapshot_{i:04d}.csv",
                       ("x", "density", "intensity_left", "intensity_right",
                        "intensity_total"),
                       (snap.x, snap.density, snap.intensity_left,
                        snap.intensity_right, snap.intensity_total))
    if record.spectrum_table is not None:
        table = record.spectrum_table
        _write_csv(out / "spectrum.csv", ("q_max", "re_omega", "im_omega"),
                   (table[:, 0], table[:, 1], table[:, 2]))
    if record.dispersion_table is not None:
        table = record.dispersion_table
        _write_csv(out / "dispersion.csv", ("q", "re_omega", "im_omega"),
                   (table[:, 0], table[:, 1], table[:, 2]))
    if record.scan_table is not None:
        table = record.scan_table
        _write_csv(out / "scan.csv", ("intensity", "reflectivity", "contrast"),
                   (table[:, 0], table[:, 1], table[:, 2]))
    if record.maxima is not None and len(record.maxima.times):
        times = record.maxima.times
        pos = record.maxima.positions
        t_col, p_col, x_col = [], [], []
        for p in range(pos.shape[1]):
            t_col.extend(times)
            p_col.extend([p] * len(times))
            x_col.extend(pos[:, p])
        _write_csv(out / "maxima.csv", ("time", "peak", "position"),
                   (np.array(t_col), np.array(p_col), np.array(x_col)))
    return manifest


def read_csv_columns(path) -> dict[str, np.ndarray]:
    """Read one of the package's CSV tables into named columns."""
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    header = text[0].split(",")
    if len(text) == 1:
        return {name: np.array([]) for name in header}
    data = np.array([[float(v) for v in line.split(",")] for line in text[1:]])
    return {name: data[:, i] for i, name in enumerate(header)}
