"""Bathymetry to hypsometry: DEM interpolation, level sweeps, training samples.

Scattered bed soundings are turned into a gap-free DEM by nearest-neighbor
interpolation; simulating a sweep of water levels over the DEM yields the
level -> (area, volume) curve, and normalizing by the top row gives the
(surface fraction, relative volume) pairs the regression trains on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date as Date
from pathlib import Path

import numpy as np

from .errors import AmbiguousLookupError, CurveRangeError, InputError, PipelineError
from .grids import GridSpec, _freeze, cell_centers

_SUM_BLOCK = 4096


def compensated_sum(values: np.ndarray) -> float:
    """Sum with error-free combination of blockwise partial sums.

    Large grids (10^7 cells) accumulate visible drift under naive left-to-
    right addition; block partials are combined exactly with math.fsum.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        return 0.0
    if v.size <= _SUM_BLOCK:
        return math.fsum(v.tolist())
    nblocks = (v.size + _SUM_BLOCK - 1) // _SUM_BLOCK
    partials = [
        float(np.sum(v[b * _SUM_BLOCK:(b + 1) * _SUM_BLOCK]))
        for b in range(nblocks)
    ]
    return math.fsum(partials)


@dataclass(frozen=True)
class SoundingSet:
    """Scattered (x, y, bed_elevation) bathymetric measurements in meters."""

    points: tuple  # ((x, y, z), ...)

    def __post_init__(self):
        pts = tuple((float(x), float(y), float(z)) for x, y, z in self.points)
        if not pts:
            raise InputError("sounding set is empty")
        for p in pts:
            if not all(math.isfinite(c) for c in p):
                raise InputError(f"non-finite sounding {p}")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class Dem:
    """Gridded bed elevation; every cell finite."""

    values: np.ndarray  # (nrows, ncols) float64
    cell_size: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if not np.isfinite(v).all():
            raise ValueError("DEM must be gap-free (all cells finite)")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be > 0")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def cell_area(self) -> float:
        return self.cell_size * self.cell_size

    @property
    def min_bed(self) -> float:
        return float(self.values.min())

    @property
    def max_bed(self) -> float:
        return float(self.values.max())

    @property
    def spec(self) -> GridSpec:
        nrows, ncols = self.values.shape
        return GridSpec(ncols, nrows, float(self.cell_size))


def load_soundings(path: str | Path) -> SoundingSet:
    """Soundings file: one `x y elevation` triple per line, '#' comments."""
    pts = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InputError(f"{Path(path).name} line {lineno}: expected 'x y elevation'")
        try:
            pts.append(tuple(float(p) for p in parts))
        except ValueError:
            raise InputError(
                f"{Path(path).name} line {lineno}: non-numeric sounding"
            ) from None
    return SoundingSet(tuple(pts))


def nn_interpolate(soundings: SoundingSet, spec: GridSpec) -> Dem:
    """Assign each cell the elevation of the Euclidean-nearest sounding.

    Equidistant cells take the lowest-index sounding, so the result is
    deterministic regardless of point ordering tricks upstream.
    """
    pts = np.asarray(soundings.points, dtype=np.float64)
    px, py, pz = pts[:, 0], pts[:, 1], pts[:, 2]
    xs, ys = cell_centers(spec)
    out = np.empty((spec.nrows, spec.ncols), dtype=np.float64)
    # Chunk rows to bound the (rows x ncols x npoints) distance block.
    rows_per_chunk = max(1, int(4_000_000 / max(1, spec.ncols * len(pts))))
    for r0 in range(0, spec.nrows, rows_per_chunk):
        r1 = min(spec.nrows, r0 + rows_per_chunk)
        dy = ys[r0:r1, None] - py[None, :]          # (rows, npts)
        dx = xs[:, None] - px[None, :]              # (ncols, npts)
        d2 = dx[None, :, :] ** 2 + dy[:, None, :] ** 2
        nearest = np.argmin(d2, axis=2)             # first min = lowest index
        out[r0:r1] = pz[nearest]
    return Dem(out, spec.cell_size)


def level_area_volume(dem: Dem, h: float) -> tuple[float, float]:
    """Inundated area (m^2) and stored volume (m^3) at water level h.

    A cell counts as wet when its bed is strictly below h; its volume
    contribution is (h - bed) * cell_area.
    """
    if not math.isfinite(h):
        raise ValueError("level must be finite")
    wet = dem.values < h
    n_wet = int(np.count_nonzero(wet))
    area = n_wet * dem.cell_area
    if n_wet == 0:
        return 0.0, 0.0
    depths = h - dem.values[wet]
    volume = compensated_sum(depths) * dem.cell_area
    return area, volume


@dataclass(frozen=True)
class HypsometricCurve:
    """Monotone level -> (area, volume) table from a simulated level sweep."""

    levels: np.ndarray
    areas: np.ndarray
    volumes: np.ndarray

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=np.float64)
        ar = np.asarray(self.areas, dtype=np.float64)
        vo = np.asarray(self.volumes, dtype=np.float64)
        if not (lv.shape == ar.shape == vo.shape) or lv.ndim != 1 or lv.size < 2:
            raise ValueError("curve needs >= 2 aligned rows")
        if not (np.diff(lv) > 0).all():
            raise ValueError("levels must be strictly increasing")
        if (np.diff(ar) < 0).any() or (np.diff(vo) < 0).any():
            raise ValueError("area and volume must be nondecreasing in level")
        # Slope sandwich: A(h_i) dh <= dV <= A(h_i+1) dh, with roundoff slack.
        dh = np.diff(lv)
        dv = np.diff(vo)
        slack = 1e-9 * np.maximum(1.0, ar[1:] * dh)
        if (dv < ar[:-1] * dh - slack).any() or (dv > ar[1:] * dh + slack).any():
            raise ValueError("volume increments violate the area sandwich bound")
        for name, a in (("levels", lv), ("areas", ar), ("volumes", vo)):
            object.__setattr__(self, name, _freeze(a))

    @property
    def capacity_volume(self) -> float:
        return float(self.volumes[-1])

    @property
    def nominal_area(self) -> float:
        return float(self.areas[-1])


@dataclass(frozen=True)
class VolumeSample:
    """One (surface fraction, relative volume) training pair."""

    surface_fraction: float
    relative_volume: float
    level: float | None = None
    date: Date | None = None

    def __post_init__(self):
        if self.surface_fraction < 0:
            raise ValueError("surface_fraction must be >= 0")
        if not 0.0 <= self.relative_volume <= 1.0:
            raise ValueError("relative_volume must lie in [0, 1]")


def default_levels(dem: Dem, spillway: float | None = None, count: int = 200) -> np.ndarray:
    """Uniform level sweep from the lowest bed cell up to the spillway."""
    if count < 2:
        raise ValueError("level count must be >= 2")
    top = dem.max_bed if spillway is None else float(spillway)
    lo = dem.min_bed
    if not top > lo:
        raise ValueError(f"spillway {top} must exceed min bed {lo}")
    return np.linspace(lo, top, count)


def build_curve(dem: Dem, levels) -> HypsometricCurve:
    """One (area, volume) row per level via level_area_volume."""
    lv = np.asarray(levels, dtype=np.float64)
    if lv.ndim != 1 or lv.size < 2:
        raise ValueError("need >= 2 levels")
    if not (np.diff(lv) > 0).all():
        raise ValueError("levels must be strictly increasing (no duplicates)")
    areas = np.empty_like(lv)
    volumes = np.empty_like(lv)
    for i, h in enumerate(lv):
        areas[i], volumes[i] = level_area_volume(dem, float(h))
    return HypsometricCurve(lv, areas, volumes)


def _interp_checked(x: float, xp: np.ndarray, fp: np.ndarray, what: str) -> float:
    if x < xp[0] or x > xp[-1]:
        raise CurveRangeError(
            f"{what} {x} outside curve range [{xp[0]}, {xp[-1]}] (extrapolation refused)"
        )
    return float(np.interp(x, xp, fp))


def curve_volume_at(curve: HypsometricCurve, level: float) -> float:
    """Piecewise-linear volume lookup by level; extrapolation refused."""
    return _interp_checked(float(level), curve.levels, curve.volumes, "level")


def curve_area_at(curve: HypsometricCurve, level: float) -> float:
    """Piecewise-linear area lookup by level; extrapolation refused."""
    return _interp_checked(float(level), curve.levels, curve.areas, "level")


def curve_volume_from_area(curve: HypsometricCurve, area: float) -> float:
    """Invert area -> volume; flat-area plateaus raise instead of guessing."""
    a = float(area)
    areas = curve.areas
    if a < areas[0] or a > areas[-1]:
        raise CurveRangeError(
            f"area {a} outside curve range [{areas[0]}, {areas[-1]}] "
            "(extrapolation refused)"
        )
    i = int(np.searchsorted(areas, a, side="left"))
    j = int(np.searchsorted(areas, a, side="right"))
    if j - i == 1:
        return float(curve.volumes[i])
    if j > i:
        raise AmbiguousLookupError(
            f"area {a} matches the plateau of rows {i}..{j - 1} "
            f"(levels {curve.levels[i]}..{curve.levels[j - 1]}); "
            "volume is not determined by area there"
        )
    a0, a1 = areas[i - 1], areas[i]
    v0, v1 = curve.volumes[i - 1], curve.volumes[i]
    return float(v0 + (a - a0) * (v1 - v0) / (a1 - a0))


def make_samples(curve: HypsometricCurve, levels) -> list[VolumeSample]:
    """Normalize curve lookups into (fraction, relative volume) samples."""
    if curve.capacity_volume <= 0 or curve.nominal_area <= 0:
        raise PipelineError("curve has zero capacity or nominal area")
    out = []
    for h in np.asarray(levels, dtype=np.float64):
        area = curve_area_at(curve, float(h))
        vol = curve_volume_at(curve, float(h))
        out.append(
            VolumeSample(
                surface_fraction=area / curve.nominal_area,
                relative_volume=vol / curve.capacity_volume,
                level=float(h),
            )
        )
    return out


def save_curve_csv(curve: HypsometricCurve, path: str | Path) -> None:
    lines = ["level,area_m2,volume_m3"]
    for h, a, v in zip(curve.levels, curve.areas, curve.volumes):
        lines.append(f"{float(h)!r},{float(a)!r},{float(v)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def load_curve_csv(path: str | Path) -> HypsometricCurve:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or text[0].strip() != "level,area_m2,volume_m3":
        raise InputError(f"{Path(path).name}: expected header 'level,area_m2,volume_m3'")
    rows = []
    for lineno, line in enumerate(text[1:], 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise InputError(f"{Path(path).name} line {lineno}: expected 3 fields")
        try:
            rows.append(tuple(float(p) for p in parts))
        except ValueError:
            raise InputError(
                f"{Path(path).name} line {lineno}: non-numeric field"
            ) from None
    if len(rows) < 2:
        raise InputError(f"{Path(path).name}: curve needs >= 2 rows")
    arr = np.asarray(rows)
    return HypsometricCurve(arr[:, 0], arr[:, 1], arr[:, 2])
