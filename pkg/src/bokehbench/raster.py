"""Image and depth raster types with bit-exact file I/O.

Pixel currency is a float32 array in [0, 1], linear light or file-native
values depending on the ``transfer`` used at load time. Depth maps travel
as single-channel float32 PFM files ("Pf" header).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from .errors import DecodeError, DimensionMismatch, NonFiniteDepth, UnsupportedFormat

#: The f-number range considered valid for RealBokeh-protocol records.
F_NUMBER_RANGE = (1.0, 32.0)
FOCAL_LENGTH_RANGE_MM = (28.0, 70.0)


@dataclass(frozen=True)
class RasterImage:
    """H x W x C raster of float values, nominal range [0, 1].

    Values may exceed 1.0 only between the renderer's highlight boost and
    its inverse; everything entering or leaving disk is in [0, 1].
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise DimensionMismatch(f"expected HxWx{{1,3}} data, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch("image must be at least 1x1")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class DepthMap:
    """H x W scene depth per pixel; meters, relative scale allowed."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch(f"expected HxW depth data, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise NonFiniteDepth("depth map contains NaN or Inf")
        if (arr < 0).any():
            raise NonFiniteDepth("depth map contains negative values")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class ApertureSetting:
    """Photographic control signal: f-number, focal length, optional focus distance."""

    f_number: float
    focal_length_mm: float
    focus_distance_m: float | None = None

    def __post_init__(self):
        if self.f_number <= 0 or self.focal_length_mm <= 0:
            raise ValueError("f_number and focal_length_mm must be positive")

    @property
    def in_realbokeh_range(self) -> bool:
        """True when f-number and focal length fall inside the capture-protocol bounds."""
        return (
            F_NUMBER_RANGE[0] <= self.f_number <= F_NUMBER_RANGE[1]
            and FOCAL_LENGTH_RANGE_MM[0] <= self.focal_length_mm <= FOCAL_LENGTH_RANGE_MM[1]
        )


# ---------------------------------------------------------------------------
# sRGB transfer (IEC 61966-2-1 piecewise curve)
# ---------------------------------------------------------------------------

def srgb_to_linear(v: np.ndarray) -> np.ndarray:
    """Decode sRGB-encoded values in [0, 1] to linear light."""
    v = np.asarray(v, dtype=np.float64)
    return np.where(v <= 0.04045, v / 12.92, ((v + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(v: np.ndarray) -> np.ndarray:
    """Encode linear-light values in [0, 1] with the sRGB curve."""
    v = np.asarray(v, dtype=np.float64)
    return np.where(v <= 0.0031308, v * 12.92, 1.055 * np.clip(v, 0, None) ** (1 / 2.4) - 0.055)


def _check_transfer(transfer: str):
    if transfer not in ("srgb", "linear"):
        raise ValueError(f"transfer must be 'srgb' or 'linear', got {transfer!r}")


# ---------------------------------------------------------------------------
# PNG / JPEG image I/O
# ---------------------------------------------------------------------------

def load_image(path, transfer: str = "linear") -> RasterImage:
    """Load an 8- or 16-bit PNG/JPEG into a [0, 1] float raster.

    Parameters
    ----------
    path : path-like
        Image file. Grayscale files yield one channel, color files three
        (alpha is rejected).
    transfer : {'linear', 'srgb'}
        'linear' keeps the decoded values as-is (just scaled to [0, 1]);
        'srgb' additionally applies the sRGB electro-optical transfer
        function, yielding linear light.
    """
    _check_transfer(transfer)
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)
    if path.suffix.lower() not in (".png", ".jpg", ".jpeg"):
        raise UnsupportedFormat(f"unsupported image extension: {path.suffix!r}")
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise DecodeError(f"could not decode {path}")
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise UnsupportedFormat(f"unsupported pixel type {raw.dtype} in {path}")
    if raw.ndim == 3:
        if raw.shape[2] == 4:
            raise UnsupportedFormat("alpha channels are not supported")
        raw = cv2.cvtColor(raw, cv2.COLOR_BGR2RGB)
    data = raw.astype(np.float64) / scale
    if transfer == "srgb":
        data = srgb_to_linear(data)
    return RasterImage(data.astype(np.float32))


def save_image(img: RasterImage, path, transfer: str = "linear", bit_depth: int = 8) -> None:
    """Quantize a raster to PNG, clamping to [0, 1] first.

    Round-tripping through :func:`load_image` with the same transfer
    reproduces the raster within half a quantization step per channel.
    """
    _check_transfer(transfer)
    if bit_depth not in (8, 16):
        raise UnsupportedFormat(f"bit_depth must be 8 or 16, got {bit_depth}")
    path = Path(path)
    data = np.clip(img.data.astype(np.float64), 0.0, 1.0)
    if transfer == "srgb":
        data = np.clip(linear_to_srgb(data), 0.0, 1.0)
    if bit_depth == 8:
        quant = np.rint(data * 255.0).astype(np.uint8)
    else:
        quant = np.rint(data * 65535.0).astype(np.uint16)
    if quant.shape[2] == 1:
        quant = quant[:, :, 0]
    else:
        quant = cv2.cvtColor(quant, cv2.COLOR_RGB2BGR)
    if not cv2.imwrite(str(path), quant):
        raise OSError(f"could not write {path}")


# ---------------------------------------------------------------------------
# PFM depth I/O
# ---------------------------------------------------------------------------

def load_depth(path) -> DepthMap:
    """Read a single-channel 32-bit float PFM depth map.

    Both endiannesses are accepted (scale-line sign convention); rows are
    stored bottom-up per the PFM standard. NaN/Inf payloads are rejected.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic == b"PF":
            raise UnsupportedFormat("color PFM not supported; expected single-channel 'Pf'")
        if magic != b"Pf":
            raise DecodeError(f"not a PFM file: bad magic {magic!r}")
        dims = fh.readline().split()
        if len(dims) != 2:
            raise DecodeError("malformed PFM dimensions line")
        try:
            width, height = int(dims[0]), int(dims[1])
            scale = float(fh.readline().strip())
        except ValueError as exc:
            raise DecodeError(f"malformed PFM header: {exc}") from exc
        if width < 1 or height < 1 or scale == 0:
            raise DecodeError("invalid PFM dimensions or scale")
        dtype = "<f4" if scale < 0 else ">f4"
        payload = fh.read(width * height * 4)
    if len(payload) != width * height * 4:
        raise DecodeError("truncated PFM payload")
    data = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    data = data[::-1].astype(np.float32)  # PFM rows run bottom-to-top
    if not np.isfinite(data).all():
        raise NonFiniteDepth(f"{path} contains non-finite depth values")
    return DepthMap(data)


def save_depth(d: DepthMap, path) -> None:
    """Write a depth map as little-endian single-channel PFM (bit-exact round trip)."""
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(b"Pf\n")
        fh.write(f"{d.width} {d.height}\n".encode("ascii"))
        fh.write(b"-1.0\n")
        fh.write(d.data[::-1].astype("<f4").tobytes())


def median_depth(d: DepthMap) -> float:
    """Exact median depth; for even pixel counts, the mean of the two central order statistics."""
    return float(np.median(d.data))
