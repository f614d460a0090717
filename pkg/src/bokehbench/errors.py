"""Exception and warning types shared across the package."""


class BokehBenchError(Exception):
    """Base class for all bokehbench-specific errors."""


# --- raster I/O ---

class DecodeError(BokehBenchError):
    """File could not be decoded (corrupt or truncated payload)."""


class UnsupportedFormat(BokehBenchError):
    """File format or bit depth is not supported."""


class NonFiniteDepth(BokehBenchError):
    """Depth file contains NaN or Inf values."""


# --- numeric contracts ---

class NonPositiveInput(BokehBenchError, ValueError):
    """A strictly-positive argument was zero or negative."""


class DimensionMismatch(BokehBenchError, ValueError):
    """Operands do not share the required dimensions."""


class InvalidBladeCount(BokehBenchError, ValueError):
    """Aperture blade count outside {0, 5..11}."""


class InvalidKnee(BokehBenchError, ValueError):
    """Highlight knee outside [0, 1)."""


class InvalidThreshold(BokehBenchError, ValueError):
    """Sharpness threshold outside (0, 1)."""


class InvalidRatio(BokehBenchError, ValueError):
    """Masking ratio outside [0, 1]."""


class StepOutOfRange(BokehBenchError, ValueError):
    """Schedule step outside [0, total_steps]."""


# --- metrics / MOS ---

class ImageTooSmall(BokehBenchError, ValueError):
    """Image smaller than the metric's minimum window size."""


class InvalidScore(BokehBenchError, ValueError):
    """MOS score off the {1, 2} + {3..10 step 0.5} grid."""


class EmptyPanel(BokehBenchError, ValueError):
    """No opinion records available for aggregation."""


class AdapterFailure(BokehBenchError, RuntimeError):
    """External perceptual-metric adapter failed or produced garbage."""


class MissingScene(BokehBenchError):
    """Adapter output lacks a value for an expected scene."""


# --- inference wrappers ---

class OperatorDimensionError(BokehBenchError, ValueError):
    """Wrapped operator violated the dimension-covariance contract."""


class ZeroWeightSum(BokehBenchError, ValueError):
    """Ensemble weights sum to zero."""


class TileLargerThanImage(UserWarning):
    """Tile exceeds the image and was clipped (non-fatal)."""


# --- challenge harness ---

class MissingMeta(BokehBenchError):
    """Scene directory lacks its meta.json sidecar."""


class InvariantViolation(BokehBenchError):
    """A dataset record violates the capture-protocol invariants."""


class MissingMetric(BokehBenchError, ValueError):
    """Leaderboard row lacks one of the fidelity metrics."""


class MissingMos(BokehBenchError, ValueError):
    """Leaderboard row lacks a MOS value."""
