"""Plain-text key=value run configuration with documented defaults.

Every key has a default; unknown keys and out-of-range values are rejected
with the offending key named, so a bad config never half-runs a pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date as Date
from pathlib import Path

from .errors import ConfigError
from .regression import DEFAULT_C_GRID, DEFAULT_EPSILON_GRID, DEFAULT_GAMMA_GRID


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"expected a comma-separated number list, got {text!r}") from None


@dataclass
class RunConfig:
    # paths (resolved relative to the config file location)
    manifest: Path | None = None
    aoi: Path | None = None
    soundings: Path | None = None
    curve: Path | None = None
    levels_file: Path | None = None
    truth: Path | None = None
    model: Path | None = None
    # segmentation
    bins: int = 256
    min_component_size: int = 1
    aoi_dilation: float = 10.0
    # hypsometry
    level_count: int = 200
    spillway: float | None = None
    # regression
    c_grid: tuple = DEFAULT_C_GRID
    epsilon_grid: tuple = DEFAULT_EPSILON_GRID
    gamma_grid: tuple = DEFAULT_GAMMA_GRID
    folds: int = 10
    seed: int = 0
    train_fraction: float = 0.8
    train_end_date: Date | None = None  # exclusive; scenes on/after are held out
    # persistence
    persistence_permanent_days: float = 300.0
    persistence_ephemeral_days: float = 150.0
    persistence_year: int | None = None
    # synthetic fixtures
    synth_shape: str = "bowl"
    synth_power: float = 2.0
    synth_ncols: int = 160
    synth_nrows: int = 160
    synth_cell_size: float = 10.0
    synth_base_level: float = 800.0
    synth_spillway_level: float = 850.0
    synth_noise_sd: float = 0.02
    synth_n_dates: int = 120
    synth_years: float = 3.0
    synth_low_frac: float = 0.35
    synth_high_frac: float = 0.95
    synth_sensor: str = "sentinel2"


_PATH_KEYS = ("manifest", "aoi", "soundings", "curve", "levels_file", "truth", "model")
_GRID_KEYS = ("c_grid", "epsilon_grid", "gamma_grid")


def parse_config(path: str | Path) -> RunConfig:
    """Read `key = value` lines; '#' starts a comment, blank lines skipped."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    cfg = RunConfig()
    base = path.parent
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path.name} line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        _apply_key(cfg, key, value, base, f"{path.name} line {lineno}")
    validate_config(cfg)
    return cfg


def _apply_key(cfg: RunConfig, key: str, value: str, base: Path, where: str) -> None:
    if not hasattr(cfg, key):
        raise ConfigError(f"{where}: unknown config key {key!r}")
    if key in _PATH_KEYS:
        setattr(cfg, key, (base / value).resolve())
        return
    if key in _GRID_KEYS:
        setattr(cfg, key, _float_list(value))
        return
    if key == "train_end_date":
        try:
            cfg.train_end_date = Date.fromisoformat(value)
        except ValueError:
            raise ConfigError(f"{where}: {key} must be an ISO date") from None
        return
    if key == "persistence_year":
        cfg.persistence_year = _parse_scalar(int, key, value, where)
        return
    if key in ("spillway",):
        cfg.spillway = _parse_scalar(float, key, value, where)
        return
    default = getattr(RunConfig(), key)
    kind = type(default)
    if kind is int:
        setattr(cfg, key, _parse_scalar(int, key, value, where))
    elif kind is float:
        setattr(cfg, key, _parse_scalar(float, key, value, where))
    elif kind is str:
        setattr(cfg, key, value)
    else:
        raise ConfigError(f"{where}: key {key!r} cannot be set from text")


def _parse_scalar(kind, key, value, where):
    try:
        return kind(value)
    except ValueError:
        raise ConfigError(f"{where}: {key} must be {kind.__name__}, got {value!r}") from None


def validate_config(cfg: RunConfig) -> None:
    """Range checks; raises ConfigError naming the offending key."""
    checks = [
        ("bins", cfg.bins >= 2, ">= 2"),
        ("min_component_size", cfg.min_component_size >= 1, ">= 1"),
        ("aoi_dilation", cfg.aoi_dilation >= 0, ">= 0"),
        ("level_count", cfg.level_count >= 2, ">= 2"),
        ("folds", cfg.folds >= 2, ">= 2"),
        ("train_fraction", 0.0 < cfg.train_fraction < 1.0, "in (0, 1)"),
        ("persistence_permanent_days", 0 < cfg.persistence_permanent_days <= 366, "in (0, 366]"),
        ("persistence_ephemeral_days", 0 < cfg.persistence_ephemeral_days <= 366, "in (0, 366]"),
        ("synth_noise_sd", cfg.synth_noise_sd >= 0, ">= 0"),
        ("synth_n_dates", cfg.synth_n_dates >= 2, ">= 2"),
        ("synth_ncols", cfg.synth_ncols >= 8, ">= 8"),
        ("synth_nrows", cfg.synth_nrows >= 8, ">= 8"),
        ("synth_cell_size", cfg.synth_cell_size > 0, "> 0"),
        ("synth_years", cfg.synth_years > 0, "> 0"),
        ("synth_power", cfg.synth_power > 0, "> 0"),
        (
            "synth_spillway_level",
            cfg.synth_spillway_level > cfg.synth_base_level,
            "> synth_base_level",
        ),
        (
            "synth_low_frac",
            0 < cfg.synth_low_frac < cfg.synth_high_frac <= 1.0,
            "in (0, synth_high_frac)",
        ),
    ]
    for key, ok, requirement in checks:
        if not ok:
            raise ConfigError(f"config key {key!r} must be {requirement}")
    for key in _GRID_KEYS:
        grid = getattr(cfg, key)
        if not grid:
            raise ConfigError(f"config key {key!r} must be a nonempty list")
        if key != "epsilon_grid" and any(v <= 0 for v in grid):
            raise ConfigError(f"config key {key!r} values must be > 0")
        if key == "epsilon_grid" and any(v < 0 for v in grid):
            raise ConfigError(f"config key {key!r} values must be >= 0")
