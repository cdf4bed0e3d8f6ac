"""Otsu thresholding of an index raster inside the AOI, mask cleanup, stats.

Pipeline for one scene: pick the index (WCWI when the sensor has SWIR,
NDWI otherwise), histogram the in-AOI valid pixels, maximize between-class
variance over interior bin edges, classify water as value > threshold,
drop small components, and reduce to area / surface fraction.

Histogram bins are closed on their upper edge (first bin also includes
lo). This makes a threshold at a bin edge partition pixels exactly the
way the strictly-greater classification rule does.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DegenerateHistogramError
from .grids import AoiPolygon, GridSpec, Scene, _freeze, rasterize_polygon
from .indices import IndexRaster, ndwi, wcwi


@dataclass(frozen=True)
class Histogram:
    bin_count: int
    lo: float
    hi: float
    counts: np.ndarray  # (bin_count,) int64

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if self.bin_count < 2:
            raise ValueError("bin_count must be >= 2")
        if not self.hi > self.lo:
            raise ValueError("hi must exceed lo")
        if c.shape != (self.bin_count,) or (c < 0).any():
            raise ValueError("counts must be nonnegative, one per bin")
        object.__setattr__(self, "counts", _freeze(c))

    @property
    def bin_width(self) -> float:
        return (self.hi - self.lo) / self.bin_count


@dataclass(frozen=True)
class WaterMask:
    water: np.ndarray  # boolean grid
    threshold_used: float
    index_used: str
    area_m2: float
    surface_fraction: float

    def __post_init__(self):
        object.__setattr__(self, "water", _freeze(np.asarray(self.water, bool)))


@dataclass(frozen=True)
class SegmentationConfig:
    bin_count: int = 256
    min_component_size: int = 1  # 1 = cleaning off
    aoi_dilation_cells: float = 10.0


def build_histogram(index: IndexRaster, aoi: np.ndarray, bin_count: int = 256) -> Histogram:
    """Histogram of valid in-AOI index values; lo/hi are their min/max.

    Raises DegenerateHistogramError when fewer than 2 pixels contribute or
    all contributing values are identical.
    """
    if bin_count < 2:
        raise ValueError("bin_count must be >= 2")
    contrib = index.values[index.valid_mask & aoi]
    if contrib.size < 2:
        raise DegenerateHistogramError(
            f"only {contrib.size} contributing pixel(s) in AOI"
        )
    lo = float(contrib.min())
    hi = float(contrib.max())
    if hi == lo:
        raise DegenerateHistogramError(
            f"all {contrib.size} contributing values equal {lo}"
        )
    bw = (hi - lo) / bin_count
    # Upper-edge-inclusive bins: value v lands in the smallest bin whose
    # upper edge is >= v; lo itself lands in bin 0.
    idx = np.ceil((contrib - lo) / bw).astype(np.int64) - 1
    np.clip(idx, 0, bin_count - 1, out=idx)
    counts = np.bincount(idx, minlength=bin_count)
    return Histogram(bin_count, lo, hi, counts)


def between_class_variance(h: Histogram) -> np.ndarray:
    """Between-class variance at each interior bin edge (length bin_count-1).

    Candidate edge k splits bins [0, k) from [k, bin_count); entries where
    either class is empty are 0.
    """
    total = int(h.counts.sum())
    w = h.counts / total
    bw = h.bin_width
    c = h.lo + (np.arange(h.bin_count) + 0.5) * bw
    w_cum = np.cumsum(w)
    s_cum = np.cumsum(w * c)
    wt = w_cum[-1]
    st = s_cum[-1]
    w0 = w_cum[:-1]
    s0 = s_cum[:-1]
    w1 = wt - w0
    ok = (w0 > 0) & (w1 > 0)
    mu0 = np.divide(s0, w0, out=np.zeros_like(w0), where=ok)
    mu1 = np.divide(st - s0, w1, out=np.zeros_like(w0), where=ok)
    return np.where(ok, w0 * w1 * (mu0 - mu1) ** 2, 0.0)


def otsu_threshold(h: Histogram) -> float:
    """Interior bin edge maximizing between-class variance.

    Ties break toward the smallest edge; classification downstream is
    water iff value > threshold.
    """
    sigma_b = between_class_variance(h)
    k = int(np.argmax(sigma_b)) + 1  # argmax returns the first maximum
    return float(h.lo + k * h.bin_width)


def apply_threshold(index: IndexRaster, t: float, aoi: np.ndarray) -> np.ndarray:
    """Water mask: valid AND in-AOI AND value > t (nodata never water)."""
    if not np.isfinite(t):
        raise ValueError("threshold must be finite")
    with np.errstate(invalid="ignore"):
        above = index.values > t
    return index.valid_mask & aoi & above


def clean_mask(mask: np.ndarray, min_component_size: int = 1) -> np.ndarray:
    """Drop 8-connected components smaller than min_component_size pixels."""
    if min_component_size < 1:
        raise ValueError("min_component_size must be >= 1")
    if min_component_size == 1 or not mask.any():
        return mask.copy()
    labels, n = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    sizes = np.bincount(labels.ravel(), minlength=n + 1)
    keep = sizes >= min_component_size
    keep[0] = False
    return keep[labels]


def surface_stats(
    mask: np.ndarray,
    cell_size: float,
    nominal_area_m2: float,
    threshold_used: float = float("nan"),
    index_used: str = "",
) -> WaterMask:
    """Reduce a boolean mask to area (m^2) and fraction of the nominal area.

    The fraction may exceed 1 during flood conditions.
    """
    if nominal_area_m2 <= 0:
        raise ValueError("nominal_area_m2 must be > 0")
    area = float(np.count_nonzero(mask)) * cell_size * cell_size
    return WaterMask(
        water=mask,
        threshold_used=threshold_used,
        index_used=index_used,
        area_m2=area,
        surface_fraction=area / nominal_area_m2,
    )


def dilate_aoi(aoi: np.ndarray, radius_cells: float) -> np.ndarray:
    """Euclidean dilation of the AOI mask by radius_cells cells."""
    if radius_cells <= 0:
        return aoi.copy()
    dist = ndimage.distance_transform_edt(~aoi)
    return dist <= radius_cells


def segment_scene(
    scene: Scene,
    aoi: AoiPolygon,
    config: SegmentationConfig = SegmentationConfig(),
) -> WaterMask:
    """Full single-scene segmentation; see module docstring for the stages.

    The histogram support and the classification domain are both the
    dilated nominal contour, so the bimodal water/land mixture drives Otsu.
    Raises DegenerateHistogramError when the scene cannot be thresholded
    (callers should flag the scene unusable and move on).
    """
    spec: GridSpec = scene.spec
    index = wcwi(scene) if scene.sensor.has_swir else ndwi(scene)
    aoi_cells = rasterize_polygon(aoi, spec)
    region = dilate_aoi(aoi_cells, config.aoi_dilation_cells)
    hist = build_histogram(index, region, config.bin_count)
    t = otsu_threshold(hist)
    mask = apply_threshold(index, t, region)
    mask = clean_mask(mask, config.min_component_size)
    return surface_stats(
        mask,
        spec.cell_size,
        nominal_area_m2=aoi.area(),
        threshold_used=t,
        index_used=index.index_kind,
    )
