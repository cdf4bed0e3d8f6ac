"""resvol: reservoir water volume estimation from multispectral imagery.

The pipeline segments surface water with spectral indices (NDWI, AWEInsh,
and their weighted composite) plus Otsu thresholding, turns bathymetric
soundings into a level-area-volume curve, and trains an epsilon-SVR to map
segmented surface fraction to stored volume. See the CLI (`resvol run`)
for the end-to-end workflow.
"""

from .errors import (
    AmbiguousLookupError,
    ConfigError,
    CurveRangeError,
    DegenerateHistogramError,
    DegenerateScalerError,
    InputError,
    PipelineError,
    ResvolError,
)
from .grids import (
    AoiPolygon,
    BandGrid,
    GridSpec,
    Scene,
    SensorProfile,
    get_sensor,
    load_aoi,
    load_scene,
    parse_ascii_grid,
    parse_manifest,
    rasterize_polygon,
    read_ascii_grid,
    register_sensor,
    serialize_ascii_grid,
    write_ascii_grid,
)
from .hypsometry import (
    Dem,
    HypsometricCurve,
    SoundingSet,
    VolumeSample,
    build_curve,
    curve_area_at,
    curve_volume_at,
    curve_volume_from_area,
    default_levels,
    level_area_volume,
    load_soundings,
    make_samples,
    nn_interpolate,
)
from .indices import IndexRaster, aweinsh, compute_index, ndwi, wcwi
from .metrics import MetricsReport, compute_metrics, judge
from .regression import (
    GridSearchSpec,
    ScalerParams,
    SvrHyperparams,
    SvrModel,
    dual_objective,
    extrapolates,
    grid_search_cv,
    load_model,
    minmax_apply,
    minmax_fit,
    minmax_invert,
    rbf_kernel,
    save_model,
    svr_fit,
    svr_predict,
    train_test_split,
)
from .segmentation import (
    Histogram,
    SegmentationConfig,
    WaterMask,
    apply_threshold,
    between_class_variance,
    build_histogram,
    clean_mask,
    otsu_threshold,
    segment_scene,
    surface_stats,
)
from .synth import (
    Campaign,
    SynthSpec,
    analytic_area_volume,
    aoi_polygon,
    seasonal_levels,
    synth_campaign,
    synth_dem,
    synth_scene,
    write_campaign,
)
from .timeseries import (
    PersistenceMap,
    SeriesRecord,
    build_series,
    export_csv,
    load_series_csv,
    persistence,
    series_extremes,
)

__version__ = "0.1.0"
