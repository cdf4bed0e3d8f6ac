"""Exception hierarchy shared across the package.

The three roots map onto CLI exit codes: ConfigError -> 2, InputError -> 3,
PipelineError -> 4. Library code raises the most specific class available.
"""


class ResvolError(Exception):
    """Base class for all package errors."""


class ConfigError(ResvolError):
    """Invalid or out-of-range run configuration; names the offending key."""


class InputError(ResvolError):
    """Malformed or missing input data (files, manifests, grids)."""


class PipelineError(ResvolError):
    """A processing step failed on otherwise well-formed inputs."""


class GridParseError(InputError):
    """ASCII grid text could not be parsed; message carries the line number."""


class ManifestError(InputError):
    """Scene manifest record is incomplete or inconsistent."""


class UnknownSensorError(InputError):
    """Manifest names a sensor_id with no registered profile."""


class DegeneratePolygonError(InputError):
    """AOI ring has fewer than 3 distinct vertices or zero area."""


class MissingBandError(PipelineError):
    """Scene lacks a band role required by the requested index."""


class UnsupportedIndexError(PipelineError):
    """Requested spectral index cannot be computed for this sensor."""


class DegenerateHistogramError(PipelineError):
    """All contributing values identical (or too few); thresholding impossible."""


class DegenerateScalerError(PipelineError):
    """Min-max scaler fit on constant values."""


class CurveRangeError(PipelineError):
    """Hypsometric lookup outside the curve's simulated range."""


class AmbiguousLookupError(PipelineError):
    """Area-to-volume lookup hit a flat-area plateau and cannot invert."""


class DuplicateRecordError(PipelineError):
    """Two series records share the same (date, sensor) key."""
