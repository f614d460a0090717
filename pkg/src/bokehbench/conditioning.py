"""Aperture-conditioning primitives shared by the submitted methods.

Pure math only: sinusoidal f-number encodings, log aperture ratios,
feature-wise affine (FiLM) modulation, auxiliary coordinate / strength
maps, and the progressive masking schedules used for depth dropout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, InvalidRatio, NonPositiveInput, StepOutOfRange

#: f-number span used to normalize encodings to [0, 1].
ENCODING_F_RANGE = (1.0, 32.0)

#: Output width of the optional fixed projection applied after encoding.
PROJECTED_DIM = 64

#: Strength normalizer: the dataset's maximal transition f/22 -> f/2.
_MAX_LOG_RATIO = math.log(11.0)


@dataclass(frozen=True)
class ApertureEmbedding:
    """Fixed-length encoding of an f-number; raw entries lie in [-1, 1]."""

    values: np.ndarray

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class FeatureMap:
    """Channels-first (C, H, W) float feature stack, unbounded values."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 3:
            raise DimensionMismatch(f"expected CxHxW data, got shape {arr.shape}")
        object.__setattr__(self, "data", arr)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class MaskSchedule:
    """Linear masking-ratio decay from start_ratio to end_ratio over total_steps."""

    start_ratio: float
    end_ratio: float
    total_steps: int

    def __post_init__(self):
        if not (0 <= self.end_ratio <= self.start_ratio <= 1):
            raise InvalidRatio("need 0 <= end_ratio <= start_ratio <= 1")
        if self.total_steps < 1:
            raise ValueError("total_steps must be >= 1")


def fourier_encode(f_number: float, band_count: int = 8) -> ApertureEmbedding:
    """Sinusoidal multi-band encoding of an f-number.

    The f-number is normalized to x = (f - 1) / 31 (the [1, 32] working
    range maps onto [0, 1]) and expanded to
    [sin(2^k pi x), cos(2^k pi x)] for k = 0 .. band_count-1.
    """
    if f_number <= 0:
        raise NonPositiveInput("f_number must be positive")
    if band_count < 1:
        raise NonPositiveInput("band_count must be >= 1")
    lo, hi = ENCODING_F_RANGE
    x = (f_number - lo) / (hi - lo)
    freqs = (2.0 ** np.arange(band_count)) * math.pi * x
    # one (sin, cos) pair per band
    values = np.stack([np.sin(freqs), np.cos(freqs)], axis=1).ravel()
    return ApertureEmbedding(values)


def load_projection_matrix(path, band_count: int = 8) -> np.ndarray:
    """Read the optional fixed projection: 64 x (2*band_count) little-endian float32, row-major."""
    expected = PROJECTED_DIM * 2 * band_count
    raw = np.fromfile(Path(path), dtype="<f4")
    if raw.size != expected:
        raise DimensionMismatch(
            f"projection file holds {raw.size} floats, expected {expected}"
        )
    return raw.reshape(PROJECTED_DIM, 2 * band_count)


def project_embedding(emb: ApertureEmbedding, matrix: np.ndarray) -> ApertureEmbedding:
    """Apply a fixed projection matrix to a raw encoding."""
    if matrix.shape[1] != len(emb):
        raise DimensionMismatch(
            f"matrix expects length {matrix.shape[1]}, embedding has {len(emb)}"
        )
    return ApertureEmbedding(matrix.astype(np.float64) @ emb.values)


def log_aperture_ratio(source_f: float, target_f: float) -> float:
    """ln(source_f / target_f); positive when the target aperture is wider."""
    if source_f <= 0 or target_f <= 0:
        raise NonPositiveInput("f-numbers must be positive")
    return math.log(source_f / target_f)


def film_modulate(x: FeatureMap, scale: np.ndarray, shift: np.ndarray) -> FeatureMap:
    """Channel-wise affine modulation: out[c] = x[c] * scale[c] + shift[c]."""
    scale = np.asarray(scale, dtype=np.float64)
    shift = np.asarray(shift, dtype=np.float64)
    if scale.shape != (x.channels,) or shift.shape != (x.channels,):
        raise DimensionMismatch(
            f"scale/shift must have length {x.channels}, got {scale.shape} and {shift.shape}"
        )
    out = x.data.astype(np.float64) * scale[:, None, None] + shift[:, None, None]
    return FeatureMap(out)


def coordinate_map(width: int, height: int) -> FeatureMap:
    """2-channel positional map: channel 0 is x/(W-1), channel 1 is y/(H-1).

    Degenerate 1-pixel axes normalize to 0.
    """
    if width < 1 or height < 1:
        raise NonPositiveInput("dimensions must be positive")
    xs = np.linspace(0.0, 1.0, width) if width > 1 else np.zeros(1)
    ys = np.linspace(0.0, 1.0, height) if height > 1 else np.zeros(1)
    cx = np.broadcast_to(xs[None, :], (height, width))
    cy = np.broadcast_to(ys[:, None], (height, width))
    return FeatureMap(np.stack([cx, cy]))


def bokeh_strength_map(width: int, height: int, source_f: float, target_f: float) -> FeatureMap:
    """Constant single-channel map of normalized blur strength.

    Unit strength corresponds to the dataset's maximal f/22 -> f/2
    transition; the value is clip(ln(source/target) / ln(11), 0, 1).
    """
    if width < 1 or height < 1:
        raise NonPositiveInput("dimensions must be positive")
    strength = log_aperture_ratio(source_f, target_f) / _MAX_LOG_RATIO
    strength = min(max(strength, 0.0), 1.0)
    return FeatureMap(np.full((1, height, width), strength))


def mask_ratio_at(s: MaskSchedule, step: int) -> float:
    """Masking ratio at a training step: linear start -> end interpolation."""
    if not 0 <= step <= s.total_steps:
        raise StepOutOfRange(f"step {step} outside [0, {s.total_steps}]")
    t = step / s.total_steps
    # symmetric form keeps both endpoints exact
    return (1.0 - t) * s.start_ratio + t * s.end_ratio


def block_mask(width: int, height: int, block_px: int, ratio: float, seed: int) -> np.ndarray:
    """Seeded random block mask: exactly round(ratio * n_blocks) blocks set.

    The grid is ceil(h/block) x ceil(w/block); edge blocks are cropped to
    the image. Returns an H x W boolean raster, True where masked.
    """
    if block_px < 1:
        raise NonPositiveInput("block_px must be >= 1")
    if not 0 <= ratio <= 1:
        raise InvalidRatio(f"ratio {ratio} outside [0, 1]")
    if width < 1 or height < 1:
        raise NonPositiveInput("dimensions must be positive")
    by = -(-height // block_px)
    bx = -(-width // block_px)
    n_blocks = by * bx
    n_masked = int(round(ratio * n_blocks))
    rng = np.random.default_rng(seed)
    chosen = rng.choice(n_blocks, size=n_masked, replace=False)
    grid = np.zeros(n_blocks, dtype=bool)
    grid[chosen] = True
    grid = grid.reshape(by, bx)
    full = np.repeat(np.repeat(grid, block_px, axis=0), block_px, axis=1)
    return full[:height, :width]
