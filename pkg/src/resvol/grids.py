"""Band grids, scene assembly, and AOI rasterization.

Canonical ingest is a plain ASCII grid per band (4-line header: ncols,
nrows, cellsize, nodata_value) plus a one-record-per-scene manifest.
Grid coordinates put the origin at the lower-left corner of the raster:
x grows with columns, y grows upward, so row 0 (first in the file) is the
top row. Cell (row, col) has its center at
x = (col + 0.5) * cell_size, y = (nrows - row - 0.5) * cell_size.

Everything here is immutable after construction; value arrays are marked
read-only so scenes can be processed concurrently without copies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date as Date
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .errors import (
    DegeneratePolygonError,
    GridParseError,
    InputError,
    ManifestError,
    UnknownSensorError,
)

BAND_ROLES = ("Green", "NIR", "SWIR1", "SWIR2")
REQUIRED_ROLES = ("Green", "NIR")

# Surface reflectance is expected in [0, 1]; anything outside this window is
# treated as a bad retrieval and coerced to nodata at scene assembly.
REFLECTANCE_MIN = -0.2
REFLECTANCE_MAX = 1.2


class GridSpec(NamedTuple):
    ncols: int
    nrows: int
    cell_size: float


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BandGrid:
    """One raster band: float values with NaN marking nodata cells."""

    ncols: int
    nrows: int
    cell_size: float
    nodata_value: float
    values: np.ndarray  # (nrows, ncols) float64, NaN where nodata

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.nrows, self.ncols):
            raise ValueError(
                f"values shape {v.shape} does not match "
                f"(nrows, ncols)=({self.nrows}, {self.ncols})"
            )
        if self.cell_size <= 0:
            raise ValueError("cell_size must be > 0")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def spec(self) -> GridSpec:
        return GridSpec(self.ncols, self.nrows, float(self.cell_size))

    @property
    def valid_mask(self) -> np.ndarray:
        return ~np.isnan(self.values)


def parse_ascii_grid(text: str) -> BandGrid:
    """Parse the 4-line-header ASCII grid format into a BandGrid.

    Header keys (case-insensitive, one per line, in order): ncols, nrows,
    cellsize, nodata_value. Rows follow top-to-bottom, whitespace separated.
    Cells equal to the nodata sentinel become NaN. Errors name the
    1-based line where parsing failed.
    """
    lines = text.splitlines()
    header_keys = ("ncols", "nrows", "cellsize", "nodata_value")
    header: dict[str, float] = {}
    for i, key in enumerate(header_keys):
        if i >= len(lines):
            raise GridParseError(f"line {i + 1}: missing header line '{key}'")
        parts = lines[i].split()
        if len(parts) != 2 or parts[0].lower() != key:
            raise GridParseError(f"line {i + 1}: expected '{key} <value>'")
        try:
            header[key] = float(parts[1])
        except ValueError:
            raise GridParseError(
                f"line {i + 1}: non-numeric value {parts[1]!r} for '{key}'"
            ) from None

    ncols, nrows = int(header["ncols"]), int(header["nrows"])
    if ncols < 1 or nrows < 1 or header["ncols"] != ncols or header["nrows"] != nrows:
        raise GridParseError("line 1: ncols and nrows must be positive integers")
    cell_size = header["cellsize"]
    if cell_size <= 0:
        raise GridParseError("line 3: cellsize must be > 0")
    nodata = header["nodata_value"]

    data_lines = [ln for ln in lines[4:] if ln.strip()]
    if len(data_lines) != nrows:
        raise GridParseError(
            f"line {len(lines)}: expected {nrows} data rows, found {len(data_lines)}"
        )
    values = np.empty((nrows, ncols), dtype=np.float64)
    for r, line in enumerate(data_lines):
        lineno = 5 + r
        tokens = line.split()
        if len(tokens) != ncols:
            raise GridParseError(
                f"line {lineno}: expected {ncols} values, found {len(tokens)}"
            )
        try:
            row = np.array(tokens, dtype=np.float64)
        except ValueError:
            bad = next(t for t in tokens if not _is_number(t))
            raise GridParseError(f"line {lineno}: non-numeric token {bad!r}") from None
        is_nodata = row == nodata
        nonfinite = ~np.isfinite(row) & ~is_nodata
        if nonfinite.any():
            tok = tokens[int(np.argmax(nonfinite))]
            raise GridParseError(f"line {lineno}: non-finite value {tok!r}")
        row[is_nodata] = np.nan
        values[r] = row
    return BandGrid(ncols, nrows, cell_size, nodata, values)


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def serialize_ascii_grid(grid: BandGrid) -> str:
    """Inverse of parse_ascii_grid; floats use repr for exact round-trips."""
    out = [
        f"ncols {grid.ncols}",
        f"nrows {grid.nrows}",
        f"cellsize {_fmt(grid.cell_size)}",
        f"nodata_value {_fmt(grid.nodata_value)}",
    ]
    sentinel = _fmt(grid.nodata_value)
    for r in range(grid.nrows):
        row = grid.values[r]
        out.append(
            " ".join(sentinel if np.isnan(v) else _fmt(v) for v in row)
        )
    return "\n".join(out) + "\n"


def _fmt(x: float) -> str:
    return repr(float(x))


def read_ascii_grid(path: str | Path) -> BandGrid:
    return parse_ascii_grid(Path(path).read_text(encoding="utf-8"))


def write_ascii_grid(grid: BandGrid, path: str | Path) -> None:
    Path(path).write_text(serialize_ascii_grid(grid), encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# Sensors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SensorProfile:
    """Maps band roles to a sensor's native band labels."""

    sensor_id: str
    band_roles: dict  # role -> source band label

    def __post_init__(self):
        missing = [r for r in REQUIRED_ROLES if r not in self.band_roles]
        if missing:
            raise ValueError(f"sensor {self.sensor_id}: missing roles {missing}")

    @property
    def has_swir(self) -> bool:
        return "SWIR1" in self.band_roles and "SWIR2" in self.band_roles


_SENSOR_REGISTRY: dict[str, SensorProfile] = {}


def register_sensor(profile: SensorProfile) -> None:
    _SENSOR_REGISTRY[profile.sensor_id] = profile


def get_sensor(sensor_id: str) -> SensorProfile:
    try:
        return _SENSOR_REGISTRY[sensor_id]
    except KeyError:
        raise UnknownSensorError(
            f"unknown sensor_id {sensor_id!r}; registered: "
            f"{sorted(_SENSOR_REGISTRY)}"
        ) from None


for _p in (
    SensorProfile("sentinel2", {"Green": "B03", "NIR": "B08", "SWIR1": "B11", "SWIR2": "B12"}),
    SensorProfile("landsat8", {"Green": "B3", "NIR": "B5", "SWIR1": "B6", "SWIR2": "B7"}),
    SensorProfile("landsat9", {"Green": "B3", "NIR": "B5", "SWIR1": "B6", "SWIR2": "B7"}),
    SensorProfile("landsat5_tm", {"Green": "B2", "NIR": "B4", "SWIR1": "B5", "SWIR2": "B7"}),
    SensorProfile("landsat7_etm", {"Green": "B2", "NIR": "B4", "SWIR1": "B5", "SWIR2": "B7"}),
    SensorProfile("landsat_mss", {"Green": "B4", "NIR": "B6"}),
):
    register_sensor(_p)


# ---------------------------------------------------------------------------
# Scenes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scene:
    """Co-registered reflectance bands for one acquisition date."""

    date: Date
    sensor: SensorProfile
    bands: dict  # role -> BandGrid
    valid_mask: np.ndarray = field(init=False)

    def __post_init__(self):
        if not self.bands:
            raise ManifestError("scene has no bands")
        specs = {g.spec for g in self.bands.values()}
        if len(specs) != 1:
            raise ManifestError(f"scene bands disagree on grid geometry: {specs}")
        mask = np.ones(self.shape, dtype=bool)
        for g in self.bands.values():
            mask &= g.valid_mask
        object.__setattr__(self, "valid_mask", _freeze(mask))

    @property
    def spec(self) -> GridSpec:
        return next(iter(self.bands.values())).spec

    @property
    def shape(self) -> tuple[int, int]:
        s = self.spec
        return (s.nrows, s.ncols)

    @property
    def cell_size(self) -> float:
        return self.spec.cell_size

    def band(self, role: str) -> np.ndarray:
        return self.bands[role].values


@dataclass(frozen=True)
class ManifestEntry:
    date: Date
    sensor_id: str
    band_paths: dict  # role -> Path


def parse_manifest(path: str | Path) -> list[ManifestEntry]:
    """Read the scene manifest: one `key=value ...` record per line.

    Required keys per record: date (ISO-8601), sensor, and at least the
    Green and NIR roles. Band paths are resolved relative to the manifest.
    Blank lines and lines starting with '#' are skipped.
    """
    path = Path(path)
    base = path.parent
    entries = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields: dict[str, str] = {}
        for tok in line.split():
            if "=" not in tok:
                raise ManifestError(f"{path.name} line {lineno}: bad token {tok!r}")
            k, v = tok.split("=", 1)
            fields[k] = v
        for req in ("date", "sensor"):
            if req not in fields:
                raise ManifestError(f"{path.name} line {lineno}: missing '{req}'")
        try:
            when = Date.fromisoformat(fields.pop("date"))
        except ValueError as e:
            raise ManifestError(f"{path.name} line {lineno}: {e}") from None
        sensor_id = fields.pop("sensor")
        band_paths = {}
        for role, rel in fields.items():
            if role not in BAND_ROLES:
                raise ManifestError(
                    f"{path.name} line {lineno}: unknown band role {role!r}"
                )
            band_paths[role] = base / rel
        entries.append(ManifestEntry(when, sensor_id, band_paths))
    return entries


def load_scene(entry: ManifestEntry) -> Scene:
    """Assemble a Scene from one manifest entry.

    Reflectance outside [-0.2, 1.2] is coerced to nodata here (not at grid
    parse time, which stays format-faithful). valid_mask is the AND of the
    per-band non-nodata masks after coercion.
    """
    sensor = get_sensor(entry.sensor_id)
    for role in REQUIRED_ROLES:
        if role not in entry.band_paths:
            raise ManifestError(f"scene {entry.date}: required role {role} absent")
    bands = {}
    for role, p in sorted(entry.band_paths.items()):
        if role not in sensor.band_roles:
            raise ManifestError(
                f"scene {entry.date}: role {role} not defined for sensor "
                f"{sensor.sensor_id}"
            )
        grid = read_ascii_grid(p)
        vals = grid.values.copy()
        bad = ~np.isnan(vals) & (
            (vals < REFLECTANCE_MIN) | (vals > REFLECTANCE_MAX)
        )
        if bad.any():
            vals[bad] = np.nan
            grid = BandGrid(grid.ncols, grid.nrows, grid.cell_size,
                            grid.nodata_value, vals)
        bands[role] = grid
    return Scene(entry.date, sensor, bands)


# ---------------------------------------------------------------------------
# AOI polygon
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AoiPolygon:
    """Closed ring in grid coordinates (meters); last vertex need not repeat."""

    vertices: tuple  # ((x, y), ...)

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(set(verts)) < 3:
            raise DegeneratePolygonError(
                f"polygon needs >= 3 distinct vertices, got {len(set(verts))}"
            )
        object.__setattr__(self, "vertices", verts)
        if self.area() == 0.0:
            raise DegeneratePolygonError("polygon encloses zero area")

    def area(self) -> float:
        """Enclosed area by the shoelace formula (always >= 0)."""
        v = self.vertices
        s = 0.0
        for i in range(len(v)):
            x1, y1 = v[i]
            x2, y2 = v[(i + 1) % len(v)]
            s += x1 * y2 - x2 * y1
        return abs(s) / 2.0


def load_aoi(path: str | Path) -> AoiPolygon:
    """AOI file: one `x y` vertex per line, '#' comments allowed."""
    verts = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f"{Path(path).name} line {lineno}: expected 'x y'")
        try:
            verts.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise InputError(
                f"{Path(path).name} line {lineno}: non-numeric vertex {line!r}"
            ) from None
    return AoiPolygon(tuple(verts))


def cell_centers(spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Center coordinates: xs (ncols,) left-to-right, ys (nrows,) top row first."""
    cs = spec.cell_size
    xs = (np.arange(spec.ncols) + 0.5) * cs
    ys = (spec.nrows - np.arange(spec.nrows) - 0.5) * cs
    return xs, ys


def rasterize_polygon(poly: AoiPolygon, spec: GridSpec) -> np.ndarray:
    """Even-odd rasterization at cell centers.

    A center on the boundary resolves by the half-open convention: points on
    left/bottom edges are inside, right/top outside (the strict y1>y != y2>y
    ray cast gives exactly this).
    """
    xs, ys = cell_centers(spec)
    inside = np.zeros((spec.nrows, spec.ncols), dtype=bool)
    verts = poly.vertices
    for i in range(len(verts)):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % len(verts)]
        crosses = (y1 > ys) != (y2 > ys)  # (nrows,)
        if not crosses.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1 + (ys - y1) * (x2 - x1) / (y2 - y1)
        toggle = crosses[:, None] & (xs[None, :] < xint[:, None])
        inside ^= toggle
    return inside
