"""Depth-layered, occlusion-aware classical bokeh rendering.

The pipeline: boost highlights, bucket pixels into equal-population layers
of |D - Dm|, scatter each layer's pixels through aperture-shaped kernels,
composite the layers back to front so near-focus content eclipses far
content, renormalize by accumulated coverage, undo the highlight boost,
clamp. Layer splatting runs through the compiled scatter kernel when
available and an FFT-convolution fallback otherwise; both accumulate in a
fixed order, so output is bit-identical across thread settings.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels as _kernels
from .errors import (
    DimensionMismatch,
    InvalidKnee,
    InvalidThreshold,
    NonPositiveInput,
)
from .optics import (
    MEDIAN,
    CoCMap,
    coc_map,
    coc_to_radius_px,
    make_psf,
    resolve_focus_ref,
)
from .raster import ApertureSetting, DepthMap, RasterImage

#: Blur radii are quantized to this step so each layer draws from a small
#: bank of shared kernels (a 0.125 px worst-case radius error, far below
#: the antialiasing footprint).
RADIUS_QUANTUM_PX = 0.25

#: Kernel radius at the dataset's native 2000x1500 resolution; scaled with
#: the image diagonal for other sizes.
_MAX_RADIUS_AT_REFERENCE = 32.0
_REFERENCE_DIAGONAL = math.hypot(2000.0, 1500.0)

_CONFIG_KEYS = (
    "blade_count",
    "blade_rotation_rad",
    "max_radius_px",
    "highlight_gain",
    "highlight_knee",
    "layer_count",
    "focus_ref",
)


def default_max_radius_px(width: int, height: int) -> float:
    return _MAX_RADIUS_AT_REFERENCE * math.hypot(width, height) / _REFERENCE_DIAGONAL


@dataclass(frozen=True)
class RenderConfig:
    """Render parameters; ``max_radius_px`` None means diagonal-scaled auto."""

    blade_count: int = 0
    blade_rotation_rad: float = 0.0
    max_radius_px: float | None = None
    highlight_gain: float = 4.0
    highlight_knee: float = 0.9
    layer_count: int = 8
    focus_ref: float | None = MEDIAN

    def __post_init__(self):
        if not 1 <= self.layer_count <= 64:
            raise ValueError(f"layer_count must be in [1, 64], got {self.layer_count}")
        if not 0.0 <= self.highlight_knee < 1.0:
            raise InvalidKnee(f"highlight_knee must be in [0, 1), got {self.highlight_knee}")
        if self.highlight_gain < 1.0:
            raise InvalidKnee(f"highlight_gain must be >= 1, got {self.highlight_gain}")
        if self.max_radius_px is not None and self.max_radius_px < 0:
            raise NonPositiveInput("max_radius_px must be >= 0")

    @classmethod
    def from_dict(cls, block: dict) -> "RenderConfig":
        unknown = set(block) - set(_CONFIG_KEYS)
        if unknown:
            raise ValueError(f"unknown render config keys: {sorted(unknown)}")
        kwargs = dict(block)
        if str(kwargs.get("focus_ref", "")).lower() == "median":
            kwargs["focus_ref"] = MEDIAN
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str) -> "RenderConfig":
        return cls.from_dict(json.loads(text))

    def resolved_max_radius(self, width: int, height: int) -> float:
        if self.max_radius_px is not None:
            return float(self.max_radius_px)
        return default_max_radius_px(width, height)


@dataclass(frozen=True)
class FocusWeights:
    """Per-pixel in-focus weight: 1 = keep sharp, 0 = fully defocused."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 2:
            raise DimensionMismatch(f"expected HxW weights, got shape {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() > 1):
            raise ValueError("focus weights must lie in [0, 1]")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def highlight_boost(img: RasterImage, gain: float, knee: float) -> RasterImage:
    """Expand values above the knee so bright spots survive averaging.

    v <= knee passes through; v > knee maps to knee + (v - knee) * gain.
    Output may exceed 1; highlight_unboost inverts the map after blurring.
    """
    if not 0.0 <= knee < 1.0:
        raise InvalidKnee(f"knee must be in [0, 1), got {knee}")
    if gain < 1.0:
        raise InvalidKnee(f"gain must be >= 1, got {gain}")
    if gain == 1.0:
        return img
    v = img.data
    return RasterImage(np.where(v <= knee, v, knee + (v - knee) * gain))


def highlight_unboost(img: RasterImage, gain: float, knee: float) -> RasterImage:
    """Inverse of highlight_boost over its range."""
    if not 0.0 <= knee < 1.0:
        raise InvalidKnee(f"knee must be in [0, 1), got {knee}")
    if gain < 1.0:
        raise InvalidKnee(f"gain must be >= 1, got {gain}")
    if gain == 1.0:
        return img
    v = img.data
    return RasterImage(np.where(v <= knee, v, knee + (v - knee) / gain))


def focus_weights_from_coc(coc: CoCMap, sharp_threshold: float = 0.05) -> FocusWeights:
    """Linear ramp from fully sharp (CoC 0) to fully blurred (CoC >= threshold)."""
    if not 0.0 < sharp_threshold < 1.0:
        raise InvalidThreshold(f"sharp_threshold must be in (0, 1), got {sharp_threshold}")
    w = 1.0 - coc.data.astype(np.float64) / sharp_threshold
    return FocusWeights(np.clip(w, 0.0, 1.0))


def compose_refinement(coarse: RasterImage, residual: RasterImage,
                       w: FocusWeights) -> RasterImage:
    """out = clamp(coarse + residual * (1 - w)): refinement fades out where sharp."""
    if coarse.data.shape != residual.data.shape:
        raise DimensionMismatch(
            f"coarse {coarse.data.shape} vs residual {residual.data.shape}"
        )
    if (w.height, w.width) != (coarse.height, coarse.width):
        raise DimensionMismatch(
            f"weights {(w.height, w.width)} vs image {(coarse.height, coarse.width)}"
        )
    out = coarse.data.astype(np.float64) \
        + residual.data.astype(np.float64) * (1.0 - w.data.astype(np.float64))[:, :, None]
    return RasterImage(np.clip(out, 0.0, 1.0))


def _layer_indices(defocus: np.ndarray, layer_count: int) -> np.ndarray:
    """Equal-population bucket index of |D - Dm|, 0 = nearest to focus."""
    if layer_count == 1:
        return np.zeros(defocus.shape, dtype=np.int32)
    qs = np.arange(1, layer_count) / layer_count
    edges = np.quantile(defocus, qs)
    return np.searchsorted(edges, defocus, side="right").astype(np.int32)


def _kernel_bank(bins: np.ndarray, blade_count: int, rotation_rad: float):
    """Padded kernel stack for the radius bins present in ``bins``.

    Returns (compact per-pixel indices, stack (n,K,K), halfwidths (n,)).
    """
    present = np.unique(bins)
    lut = np.zeros(int(present.max()) + 1, dtype=np.int32)
    lut[present] = np.arange(len(present), dtype=np.int32)
    compact = lut[bins]
    psfs = [make_psf(float(b) * RADIUS_QUANTUM_PX, blade_count, rotation_rad)
            for b in present]
    halfwidths = np.array([p.half_width for p in psfs], dtype=np.int32)
    k = 2 * int(halfwidths.max()) + 1
    stack = np.zeros((len(psfs), k, k), dtype=np.float64)
    pad = k // 2
    for i, p in enumerate(psfs):
        h = p.half_width
        stack[i, pad - h:pad + h + 1, pad - h:pad + h + 1] = p.weights
    return compact, stack, halfwidths


def render_bokeh(img: RasterImage, d: DepthMap, target: ApertureSetting,
                 cfg: RenderConfig = RenderConfig()) -> RasterImage:
    """Render shallow depth of field for the target aperture.

    Focus precedence: target.focus_distance_m when set, else cfg.focus_ref
    (median scene depth by default). At the capture aperture f/22 the blur
    radii quantize to the identity kernel for ordinary depth spreads, so
    the input is reproduced.
    """
    if (d.height, d.width) != (img.height, img.width):
        raise DimensionMismatch(
            f"depth {(d.height, d.width)} vs image {(img.height, img.width)}"
        )
    if target.f_number <= 0:
        raise NonPositiveInput("target f_number must be positive")

    focus = target.focus_distance_m if target.focus_distance_m is not None else cfg.focus_ref
    ref = resolve_focus_ref(d, focus)
    coc = coc_map(d, target.f_number, ref)
    max_radius = cfg.resolved_max_radius(img.width, img.height)
    radii = coc_to_radius_px(coc, target.f_number, max_radius)
    bins = np.rint(radii / RADIUS_QUANTUM_PX).astype(np.int32)
    compact, stack, halfwidths = _kernel_bank(
        bins, cfg.blade_count, cfg.blade_rotation_rad)

    defocus = np.abs(d.data.astype(np.float64) - ref)
    layers = _layer_indices(defocus, cfg.layer_count)

    boosted = highlight_boost(img, cfg.highlight_gain, cfg.highlight_knee)
    src = np.ascontiguousarray(boosted.data, dtype=np.float64)
    h, w, c = src.shape
    out = np.zeros((h, w, c), dtype=np.float64)
    alpha_acc = np.zeros((h, w), dtype=np.float64)

    # farthest-from-focus first; near-focus layers painted over it
    for layer in range(cfg.layer_count - 1, -1, -1):
        member = np.ascontiguousarray(layers == layer, dtype=np.uint8)
        if not member.any():
            continue
        acc = np.zeros((h, w, c), dtype=np.float64)
        cov = np.zeros((h, w), dtype=np.float64)
        _kernels.splat_layer(src, member, compact, stack, halfwidths, acc, cov)
        alpha = np.minimum(cov, 1.0)
        color = np.divide(acc, cov[:, :, None],
                          out=np.zeros_like(acc), where=cov[:, :, None] > 0)
        out = color * alpha[:, :, None] + out * (1.0 - alpha[:, :, None])
        alpha_acc = alpha + alpha_acc * (1.0 - alpha)

    out /= np.maximum(alpha_acc, 1e-12)[:, :, None]
    restored = highlight_unboost(RasterImage(out), cfg.highlight_gain, cfg.highlight_knee)
    return RasterImage(np.clip(restored.data, 0.0, 1.0))