"""Dated per-scene results: long-run series assembly and persistence maps.

The volume series keeps raw observations only (no gap filling or
smoothing), so exported trends reflect exactly what the scenes showed.
Persistence attributes each observation the span from the midpoint to its
previous neighbor to the midpoint to its next one, clipped to the calendar
year, which is unbiased for irregular revisit schedules.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date as Date
from pathlib import Path

import numpy as np

from .errors import DuplicateRecordError, InputError, PipelineError
from .grids import BandGrid, _freeze

SERIES_HEADER = "date,sensor,index,threshold,area_m2,surface_fraction,volume_m3,extrapolated"

PERMANENT_DAYS = 300.0  # water-covered for more than this many days a year
EPHEMERAL_DAYS = 150.0  # ever-wet pixels below this count

CLASS_DRY = 0
CLASS_EPHEMERAL = 1
CLASS_SEASONAL = 2
CLASS_PERMANENT = 3
CLASS_NAMES = {
    CLASS_DRY: "dry",
    CLASS_EPHEMERAL: "ephemeral",
    CLASS_SEASONAL: "seasonal",
    CLASS_PERMANENT: "permanent",
}


@dataclass(frozen=True)
class SeriesRecord:
    date: Date
    sensor_id: str
    index_used: str
    threshold: float
    area_m2: float
    surface_fraction: float
    volume_m3: float
    extrapolated: bool = False

    def __post_init__(self):
        if self.volume_m3 < 0:
            raise ValueError("volume_m3 must be >= 0")
        if self.area_m2 < 0:
            raise ValueError("area_m2 must be >= 0")


def build_series(records) -> list[SeriesRecord]:
    """Sort records by (date, sensor); duplicate keys are rejected."""
    seen = set()
    for r in records:
        key = (r.date, r.sensor_id)
        if key in seen:
            raise DuplicateRecordError(f"duplicate record for {key}")
        seen.add(key)
    return sorted(records, key=lambda r: (r.date, r.sensor_id))


def series_extremes(series) -> tuple[SeriesRecord, SeriesRecord]:
    """(minimum, maximum) volume records; earliest date wins ties."""
    records = list(series)
    if not records:
        raise PipelineError("empty series has no extremes")
    lo = min(records, key=lambda r: (r.volume_m3, r.date))
    hi = max(records, key=lambda r: (r.volume_m3, -r.date.toordinal()))
    return lo, hi


def export_csv(series, path: str | Path) -> None:
    """Write the fixed-header series CSV; floats use repr for round-trips."""
    lines = [SERIES_HEADER]
    for r in series:
        lines.append(
            ",".join(
                [
                    r.date.isoformat(),
                    r.sensor_id,
                    r.index_used,
                    repr(float(r.threshold)),
                    repr(float(r.area_m2)),
                    repr(float(r.surface_fraction)),
                    repr(float(r.volume_m3)),
                    str(int(r.extrapolated)),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def load_series_csv(path: str | Path) -> list[SeriesRecord]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != SERIES_HEADER:
        raise InputError(f"{Path(path).name}: expected header {SERIES_HEADER!r}")
    out = []
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        p = line.split(",")
        if len(p) != 8:
            raise InputError(f"{Path(path).name} line {lineno}: expected 8 fields")
        try:
            out.append(
                SeriesRecord(
                    date=Date.fromisoformat(p[0]),
                    sensor_id=p[1],
                    index_used=p[2],
                    threshold=float(p[3]),
                    area_m2=float(p[4]),
                    surface_fraction=float(p[5]),
                    volume_m3=float(p[6]),
                    extrapolated=bool(int(p[7])),
                )
            )
        except ValueError as e:
            raise InputError(f"{Path(path).name} line {lineno}: {e}") from None
    return out


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PersistenceMap:
    year: int
    days_water: np.ndarray  # per-pixel day counts (float)
    classes: np.ndarray     # per-pixel CLASS_* codes (uint8)

    def __post_init__(self):
        d = np.asarray(self.days_water, dtype=np.float64)
        if (d < 0).any() or (d > 366).any():
            raise ValueError("day counts must lie in [0, 366]")
        object.__setattr__(self, "days_water", _freeze(d))
        object.__setattr__(
            self, "classes", _freeze(np.asarray(self.classes, dtype=np.uint8))
        )

    def class_counts(self) -> dict:
        return {
            name: int(np.count_nonzero(self.classes == code))
            for code, name in CLASS_NAMES.items()
        }


def days_in_year(year: int) -> int:
    return (Date(year + 1, 1, 1) - Date(year, 1, 1)).days


def persistence(
    dated_masks,
    year: int,
    permanent_gt: float = PERMANENT_DAYS,
    ephemeral_lt: float = EPHEMERAL_DAYS,
) -> PersistenceMap:
    """Per-pixel water-day counts for one calendar year.

    dated_masks is an iterable of (date, boolean grid) on a common grid.
    Each observation covers [midpoint to previous, midpoint to next],
    clipped to the year; the first and last extend to the year edges. A
    pixel then accrues the interval lengths of the observations where it
    was wet. Classes: permanent (> permanent_gt days), ephemeral
    (< ephemeral_lt among ever-wet pixels), seasonal otherwise, dry if
    never wet.
    """
    obs = sorted(
        ((d, m) for d, m in dated_masks if d.year == year), key=lambda dm: dm[0]
    )
    if not obs:
        raise PipelineError(f"no observations in year {year}")
    shape = obs[0][1].shape
    for d, m in obs:
        if m.shape != shape:
            raise PipelineError(
                f"mask for {d} has shape {m.shape}, expected {shape}"
            )
    total = float(days_in_year(year))
    jan1 = Date(year, 1, 1)
    times = [float((d - jan1).days) for d, _ in obs]
    bounds = [0.0]
    for a, b in zip(times, times[1:]):
        bounds.append((a + b) / 2.0)
    bounds.append(total)

    days = np.zeros(shape, dtype=np.float64)
    ever_wet = np.zeros(shape, dtype=bool)
    for k, (_, mask) in enumerate(obs):
        length = bounds[k + 1] - bounds[k]
        wet = np.asarray(mask, dtype=bool)
        days[wet] += length
        ever_wet |= wet

    classes = np.full(shape, CLASS_DRY, dtype=np.uint8)
    classes[ever_wet] = CLASS_SEASONAL
    classes[ever_wet & (days < ephemeral_lt)] = CLASS_EPHEMERAL
    classes[days > permanent_gt] = CLASS_PERMANENT
    return PersistenceMap(year=year, days_water=days, classes=classes)


def persistence_to_grid(pmap: PersistenceMap, cell_size: float) -> BandGrid:
    """Day counts as an exportable ASCII grid."""
    nrows, ncols = pmap.days_water.shape
    return BandGrid(ncols, nrows, cell_size, -9999.0, pmap.days_water.copy())
