"""Per-pixel spectral water indices: NDWI, AWEInsh, and the WCWI blend.

NDWI = (Green - NIR) / (Green + NIR)
AWEInsh = 4*(Green - SWIR1) - (0.25*NIR + 2.75*SWIR2)
WCWI = 0.8*AWEInsh + 0.2*NDWI

Water pixels push all three indices high; land and vegetation push them
low, which is what makes Otsu thresholding work downstream. All
operations are pure and per-pixel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MissingBandError, UnsupportedIndexError
from .grids import BandGrid, Scene, _freeze

NDWI = "NDWI"
AWEINSH = "AWEINSH"
WCWI = "WCWI"

# Composite weights applied to raw index values (no per-index normalization).
WCWI_AWEINSH_WEIGHT = 0.8
WCWI_NDWI_WEIGHT = 0.2


@dataclass(frozen=True)
class IndexRaster:
    index_kind: str
    values: np.ndarray  # (nrows, ncols) float64, NaN where undefined
    valid_mask: np.ndarray
    cell_size: float

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(np.asarray(self.values, float)))
        object.__setattr__(self, "valid_mask", _freeze(np.asarray(self.valid_mask, bool)))


def _require(scene: Scene, roles) -> None:
    missing = [r for r in roles if r not in scene.bands]
    if missing:
        raise MissingBandError(
            f"scene {scene.date}: band role(s) {missing} absent"
        )


def ndwi(scene: Scene) -> IndexRaster:
    """Normalized difference of Green and NIR, in [-1, 1] on valid pixels.

    Pixels where Green + NIR == 0 are undefined and become nodata rather
    than pretending to be land. Slightly negative reflectance (allowed down
    to -0.2) can push the raw ratio outside [-1, 1]; values are clipped to
    keep the index on its nominal scale.
    """
    _require(scene, ("Green", "NIR"))
    g = scene.band("Green")
    n = scene.band("NIR")
    den = g + n
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = (g - n) / den
    vals = np.where(den == 0, np.nan, vals)
    vals = np.clip(vals, -1.0, 1.0)
    valid = scene.valid_mask & ~np.isnan(vals)
    vals = np.where(valid, vals, np.nan)
    return IndexRaster(NDWI, vals, valid, scene.cell_size)


def aweinsh(scene: Scene) -> IndexRaster:
    """Automated water extraction index, non-shadow variant (needs SWIR)."""
    if not scene.sensor.has_swir:
        raise UnsupportedIndexError(
            f"AWEInsh needs SWIR1/SWIR2; sensor {scene.sensor.sensor_id} has none"
        )
    _require(scene, ("Green", "NIR", "SWIR1", "SWIR2"))
    g = scene.band("Green")
    n = scene.band("NIR")
    s1 = scene.band("SWIR1")
    s2 = scene.band("SWIR2")
    vals = 4.0 * (g - s1) - (0.25 * n + 2.75 * s2)
    valid = scene.valid_mask & ~np.isnan(vals)
    vals = np.where(valid, vals, np.nan)
    return IndexRaster(AWEINSH, vals, valid, scene.cell_size)


def wcwi(scene: Scene) -> IndexRaster:
    """Weighted composite 0.8*AWEInsh + 0.2*NDWI on the same reflectances.

    A pixel is nodata if either constituent is nodata, so an undefined NDWI
    ratio never silently reads as "no water".
    """
    a = aweinsh(scene)
    d = ndwi(scene)
    valid = a.valid_mask & d.valid_mask
    vals = WCWI_AWEINSH_WEIGHT * a.values + WCWI_NDWI_WEIGHT * d.values
    vals = np.where(valid, vals, np.nan)
    return IndexRaster(WCWI, vals, valid, scene.cell_size)


def compute_index(scene: Scene, kind: str) -> IndexRaster:
    if kind == NDWI:
        return ndwi(scene)
    if kind == AWEINSH:
        return aweinsh(scene)
    if kind == WCWI:
        return wcwi(scene)
    raise UnsupportedIndexError(f"unknown index kind {kind!r}")


def to_band_grid(index: IndexRaster, nodata_value: float = -9999.0) -> BandGrid:
    """Repackage an index raster for ASCII-grid export."""
    nrows, ncols = index.values.shape
    return BandGrid(ncols, nrows, index.cell_size, nodata_value, index.values.copy())
