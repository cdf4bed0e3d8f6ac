"""Deterministic synthetic reservoir: analytic DEM, rendered scenes, truth.

The generator provides ground truth for end-to-end checks: a parametric
bed surface (cone, power-law bowl, or ramp), water masks from simulated
levels, and multispectral scenes rendered from separable water/land
spectra plus seeded Gaussian noise. Area and volume truth comes from the
closed-form shape formulas, never from the gridded pipeline under test.

A campaign is written to disk in the standard manifest + ASCII grid
layout, so the CLI consumes synthetic and real data identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date as Date, timedelta
from pathlib import Path

import numpy as np

from .grids import (
    AoiPolygon,
    BandGrid,
    GridSpec,
    Scene,
    cell_centers,
    get_sensor,
    serialize_ascii_grid,
)
from .hypsometry import Dem

CONE = "cone"
BOWL = "bowl"
RAMP = "ramp"

# Clear-water vs vegetated-soil reflectance; ordered so every index in use
# separates the two by a wide margin relative to the default noise.
WATER_SPECTRA = {"Green": 0.30, "NIR": 0.02, "SWIR1": 0.01, "SWIR2": 0.01}
LAND_SPECTRA = {"Green": 0.12, "NIR": 0.35, "SWIR1": 0.30, "SWIR2": 0.25}

RIM_FRACTION = 0.45  # rim radius as a fraction of the short grid side
_ROUND_DECIMALS = 6  # rendered reflectance precision (keeps fixtures small)


@dataclass(frozen=True)
class SynthSpec:
    shape: str = BOWL
    power: float = 2.0  # bowl exponent; ignored for cone/ramp
    ncols: int = 160
    nrows: int = 160
    cell_size: float = 10.0
    base_level: float = 800.0
    spillway_level: float = 850.0
    water_spectra: dict = field(default_factory=lambda: dict(WATER_SPECTRA))
    land_spectra: dict = field(default_factory=lambda: dict(LAND_SPECTRA))
    noise_sd: float = 0.02
    seed: int = 0
    sensor_id: str = "sentinel2"

    def __post_init__(self):
        if self.shape not in (CONE, BOWL, RAMP):
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")
        if not self.spillway_level > self.base_level:
            raise ValueError("spillway_level must exceed base_level")
        if self.power <= 0:
            raise ValueError("power must be > 0")

    @property
    def grid_spec(self) -> GridSpec:
        return GridSpec(self.ncols, self.nrows, float(self.cell_size))

    @property
    def depth(self) -> float:
        return self.spillway_level - self.base_level

    @property
    def rim_radius(self) -> float:
        return RIM_FRACTION * min(self.ncols, self.nrows) * self.cell_size

    @property
    def center(self) -> tuple[float, float]:
        return (
            self.ncols * self.cell_size / 2.0,
            self.nrows * self.cell_size / 2.0,
        )


# ---------------------------------------------------------------------------
# DEM and analytic truth
# ---------------------------------------------------------------------------

def synth_dem(spec: SynthSpec) -> Dem:
    """Analytic bed surface sampled at cell centers."""
    xs, ys = cell_centers(spec.grid_spec)
    X, Y = np.meshgrid(xs, ys)
    d = spec.depth
    if spec.shape == RAMP:
        width = spec.ncols * spec.cell_size
        bed = spec.base_level + d * (X / width)
    else:
        cx, cy = spec.center
        r = np.hypot(X - cx, Y - cy)
        rel = r / spec.rim_radius
        if spec.shape == CONE:
            bed = spec.base_level + d * rel
        else:
            bed = spec.base_level + d * rel ** spec.power
    return Dem(bed, spec.cell_size)


def analytic_area_volume(spec: SynthSpec, level: float) -> tuple[float, float]:
    """Closed-form inundated area (m^2) and volume (m^3) at a water level."""
    h = level - spec.base_level
    if h <= 0:
        return 0.0, 0.0
    d = spec.depth
    R = spec.rim_radius
    if spec.shape == RAMP:
        width = spec.ncols * spec.cell_size
        height = spec.nrows * spec.cell_size
        x_wet = width * h / d
        area = x_wet * height
        return area, area * h / 2.0
    if spec.shape == CONE:
        r = R * h / d
        area = math.pi * r * r
        return area, area * h / 3.0
    p = spec.power
    r = R * (h / d) ** (1.0 / p)
    area = math.pi * r * r
    return area, area * h * p / (p + 2.0)


def aoi_polygon(spec: SynthSpec, n_vertices: int = 64) -> AoiPolygon:
    """Nominal contour: the waterline at spillway level."""
    if spec.shape == RAMP:
        w = spec.ncols * spec.cell_size
        h = spec.nrows * spec.cell_size
        return AoiPolygon(((0.0, 0.0), (w, 0.0), (w, h), (0.0, h)))
    cx, cy = spec.center
    R = spec.rim_radius
    verts = []
    for k in range(n_vertices):
        a = 2.0 * math.pi * k / n_vertices
        verts.append((cx + R * math.cos(a), cy + R * math.sin(a)))
    return AoiPolygon(tuple(verts))


# ---------------------------------------------------------------------------
# Scene rendering
# ---------------------------------------------------------------------------

def synth_scene(
    dem: Dem,
    level: float,
    spec: SynthSpec,
    rng: np.random.Generator | None = None,
    when: Date = Date(2021, 1, 1),
) -> tuple[Scene, np.ndarray]:
    """Render one scene at the given level; returns (scene, truth mask).

    A pixel is wet iff its bed lies strictly below the level. Wet pixels
    take the water spectra, dry pixels the land spectra, both plus seeded
    Gaussian noise, rounded to 6 decimals so exported fixtures stay small.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    sensor = get_sensor(spec.sensor_id)
    truth = dem.values < level
    bands = {}
    for role in sorted(sensor.band_roles):
        base = np.where(truth, spec.water_spectra[role], spec.land_spectra[role])
        if spec.noise_sd > 0:
            base = base + rng.normal(0.0, spec.noise_sd, truth.shape)
        vals = np.round(base, _ROUND_DECIMALS)
        nrows, ncols = vals.shape
        bands[role] = BandGrid(ncols, nrows, dem.cell_size, -9999.0, vals)
    return Scene(when, sensor, bands), truth


# ---------------------------------------------------------------------------
# Campaigns
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CampaignScene:
    date: Date
    level: float
    scene: Scene
    truth_mask: np.ndarray
    truth_area_m2: float    # analytic
    truth_volume_m3: float  # analytic


@dataclass(frozen=True)
class Campaign:
    spec: SynthSpec
    dem: Dem
    aoi: AoiPolygon
    scenes: tuple  # (CampaignScene, ...)


def seasonal_levels(
    spec: SynthSpec,
    n_dates: int,
    years: float = 3.0,
    low_frac: float = 0.35,
    high_frac: float = 0.95,
) -> np.ndarray:
    """Sinusoidal fill/drawdown between two depth fractions."""
    k = np.arange(n_dates)
    swing = 0.5 * (1.0 - np.cos(2.0 * math.pi * k * years / n_dates))
    frac = low_frac + (high_frac - low_frac) * swing
    return spec.base_level + frac * spec.depth


def campaign_dates(n_dates: int, start: Date, years: float = 3.0) -> list[Date]:
    total_days = years * 365.0
    return [start + timedelta(days=round(k * total_days / n_dates)) for k in range(n_dates)]


def synth_campaign(
    spec: SynthSpec,
    n_dates: int,
    level_trajectory,
    start: Date = Date(2021, 1, 3),
    years: float = 3.0,
) -> Campaign:
    """Dated scene sequence with exact analytic truth per observation."""
    levels = np.asarray(level_trajectory, dtype=np.float64)
    if levels.shape != (n_dates,):
        raise ValueError(f"trajectory must have {n_dates} levels")
    if (levels < spec.base_level).any() or (levels > spec.spillway_level).any():
        raise ValueError("trajectory must stay within [base_level, spillway_level]")
    dem = synth_dem(spec)
    aoi = aoi_polygon(spec)
    rng = np.random.default_rng(spec.seed)
    dates = campaign_dates(n_dates, start, years)
    scenes = []
    for when, level in zip(dates, levels):
        scene, truth = synth_scene(dem, float(level), spec, rng, when)
        area, volume = analytic_area_volume(spec, float(level))
        scenes.append(
            CampaignScene(when, float(level), scene, truth, area, volume)
        )
    return Campaign(spec, dem, aoi, tuple(scenes))


def write_campaign(campaign: Campaign, out_dir: str | Path) -> dict:
    """Write the fixture set: bands + manifest, AOI, soundings, gauge, truth.

    Soundings sample the bed on every other row (east-west transects), all
    columns, mimicking a boat survey. Returns the paths written.
    """
    out = Path(out_dir)
    bands_dir = out / "bands"
    bands_dir.mkdir(parents=True, exist_ok=True)
    spec = campaign.spec

    manifest_lines = []
    for cs in campaign.scenes:
        parts = [f"date={cs.date.isoformat()}", f"sensor={spec.sensor_id}"]
        for role, grid in sorted(cs.scene.bands.items()):
            name = f"{cs.date.isoformat()}_{role}.asc"
            (bands_dir / name).write_text(
                serialize_ascii_grid(grid), encoding="utf-8", newline="\n"
            )
            parts.append(f"{role}=bands/{name}")
        manifest_lines.append(" ".join(parts))
    paths = {
        "manifest": out / "manifest.txt",
        "aoi": out / "aoi.txt",
        "soundings": out / "soundings.txt",
        "levels": out / "levels.csv",
        "truth": out / "truth.csv",
    }
    paths["manifest"].write_text(
        "\n".join(manifest_lines) + "\n", encoding="utf-8", newline="\n"
    )
    paths["aoi"].write_text(
        "\n".join(f"{x!r} {y!r}" for x, y in campaign.aoi.vertices) + "\n",
        encoding="utf-8",
        newline="\n",
    )
    xs, ys = cell_centers(spec.grid_spec)
    snd_lines = []
    for r in range(0, spec.nrows, 2):
        for c in range(spec.ncols):
            snd_lines.append(
                f"{float(xs[c])!r} {float(ys[r])!r} {float(campaign.dem.values[r, c])!r}"
            )
    paths["soundings"].write_text(
        "\n".join(snd_lines) + "\n", encoding="utf-8", newline="\n"
    )
    paths["levels"].write_text(
        "date,level\n"
        + "\n".join(f"{cs.date.isoformat()},{cs.level!r}" for cs in campaign.scenes)
        + "\n",
        encoding="utf-8",
        newline="\n",
    )
    paths["truth"].write_text(
        "date,volume_m3\n"
        + "\n".join(
            f"{cs.date.isoformat()},{cs.truth_volume_m3!r}" for cs in campaign.scenes
        )
        + "\n",
        encoding="utf-8",
        newline="\n",
    )
    return paths
