"""Thin-lens aperture arithmetic, circle-of-confusion maps, and PSF kernels.

The defocus prior is the normalized magnitude clip(|D(p) - Dm| / f, 0, 1)
where Dm is the focus reference depth (median scene depth by default) and
f the target f-number. A separate bridge converts that normalized value to
a pixel blur radius, anchored so that the full-strength radius is reached
at the reference aperture f/22 and grows as 22/f for wider apertures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidBladeCount, NonPositiveInput
from .raster import DepthMap, median_depth

#: Narrowest aperture in the capture protocol; blur-strength anchor.
REFERENCE_F_NUMBER = 22.0

#: Sentinel for "use the median scene depth as focus reference".
MEDIAN = None

_SUPERSAMPLE = 4  # 4x4 boundary antialiasing
_VALID_BLADES = frozenset({0, 5, 6, 7, 8, 9, 10, 11})


@dataclass(frozen=True)
class CoCMap:
    """Per-pixel normalized defocus magnitude in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 2:
            raise DimensionMismatch(f"expected HxW CoC data, got shape {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() > 1):
            raise ValueError("CoC values must lie in [0, 1]")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class PsfKernel:
    """Aperture-shaped splat kernel: unit-mass grid of (2*ceil(r)+1)^2 weights."""

    radius_px: float
    blade_count: int
    rotation_rad: float
    weights: np.ndarray

    @property
    def half_width(self) -> int:
        return self.weights.shape[0] // 2


def aperture_diameter_mm(focal_length_mm: float, f_number: float) -> float:
    """Physical aperture opening: focal length divided by f-number."""
    if focal_length_mm <= 0 or f_number <= 0:
        raise NonPositiveInput("focal length and f-number must be positive")
    return focal_length_mm / f_number


def resolve_focus_ref(d: DepthMap, focus_ref: float | None = MEDIAN) -> float:
    """Focus depth in meters: the given value, or the median scene depth."""
    return median_depth(d) if focus_ref is MEDIAN else float(focus_ref)


def coc_map(d: DepthMap, f_number: float, focus_ref: float | None = MEDIAN) -> CoCMap:
    """Normalized circle-of-confusion map clip(|D - Dm| / f, 0, 1).

    ``focus_ref`` is the focus depth Dm; pass ``MEDIAN`` (None) to use the
    median scene depth.
    """
    if f_number <= 0:
        raise NonPositiveInput("f_number must be positive")
    ref = resolve_focus_ref(d, focus_ref)
    coc = np.abs(d.data.astype(np.float64) - ref) / f_number
    return CoCMap(np.clip(coc, 0.0, 1.0))


def coc_to_radius_px(coc: CoCMap, f_number: float, max_radius_px: float) -> np.ndarray:
    """Bridge normalized CoC to per-pixel blur radii in pixels.

    radius = max_radius * CoC * (22 / f), clamped to [0, max_radius]: at the
    reference f/22 a fully defocused pixel reaches max_radius, and halving
    the aperture area ratio halves the radius. Monotone non-increasing in
    f_number for fixed CoC.
    """
    if f_number <= 0:
        raise NonPositiveInput("f_number must be positive")
    if max_radius_px < 0:
        raise NonPositiveInput("max_radius_px must be >= 0")
    radii = coc.data.astype(np.float64) * (max_radius_px * REFERENCE_F_NUMBER / f_number)
    return np.clip(radii, 0.0, max_radius_px)


def _polygon_apothem_mask(px: np.ndarray, py: np.ndarray, radius: float,
                          blades: int, rotation: float) -> np.ndarray:
    """Inside test for a regular polygon of circumradius ``radius``.

    A point is inside iff its projection on every edge normal stays below
    the apothem radius*cos(pi/n).
    """
    apothem = radius * math.cos(math.pi / blades)
    inside = np.ones(px.shape, dtype=bool)
    for k in range(blades):
        ang = rotation + (2 * k + 1) * math.pi / blades
        inside &= (px * math.cos(ang) + py * math.sin(ang)) <= apothem
    return inside


def make_psf(radius_px: float, blade_count: int = 0, rotation_rad: float = 0.0) -> PsfKernel:
    """Build a unit-mass aperture kernel: disk (blade_count 0) or regular polygon.

    The shape indicator is supersampled 4x4 per cell for a deterministic
    antialiased boundary. Radius 0 (or a radius too small to catch any
    subsample) degenerates to the identity kernel.
    """
    if radius_px < 0:
        raise NonPositiveInput("radius_px must be >= 0")
    if blade_count not in _VALID_BLADES:
        raise InvalidBladeCount(f"blade_count must be 0 or 5..11, got {blade_count}")
    identity = np.array([[1.0]])
    if radius_px == 0:
        return PsfKernel(radius_px, blade_count, rotation_rad, identity)

    half = math.ceil(radius_px)
    size = 2 * half + 1
    cells = np.arange(size, dtype=np.float64) - half
    sub = (np.arange(_SUPERSAMPLE) + 0.5) / _SUPERSAMPLE - 0.5
    # sample coordinates: cell center + subcell offset, both axes
    xs = (cells[:, None] + sub[None, :]).ravel()
    px, py = np.meshgrid(xs, xs, indexing="xy")
    if blade_count == 0:
        inside = px * px + py * py <= radius_px * radius_px
    else:
        inside = _polygon_apothem_mask(px, py, radius_px, blade_count, rotation_rad)
    hits = inside.reshape(size, _SUPERSAMPLE, size, _SUPERSAMPLE).sum(axis=(1, 3))
    total = hits.sum()
    if total == 0:
        return PsfKernel(radius_px, blade_count, rotation_rad, identity)
    return PsfKernel(radius_px, blade_count, rotation_rad, hits / total)
