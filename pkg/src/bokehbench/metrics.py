"""Full-reference fidelity metrics and opinion-score handling.

PSNR and SSIM are computed on [0, 1] rasters exactly as the challenge
server scores uploaded files: per-channel, averaged over channels, with
SSIM using the 11x11 Gaussian window (sigma 1.5, K1=0.01, K2=0.03) and
windows fully inside the image. The learned perceptual distance is out of
scope and consumed through an external adapter (executable or CSV).
"""

from __future__ import annotations

import csv
import math
import subprocess
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d

from .errors import (
    AdapterFailure,
    DimensionMismatch,
    EmptyPanel,
    ImageTooSmall,
    InvalidScore,
    MissingScene,
)
from .raster import RasterImage

#: PSNR value reported when the mean squared error is exactly zero.
SENTINEL_INF = math.inf

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03


@dataclass(frozen=True)
class MetricReport:
    """Per-submission aggregate scores; lpips is None when no adapter ran."""

    psnr_db: float
    ssim: float
    lpips: float | None = None


@dataclass(frozen=True)
class MosRecord:
    """One expert rating of one rendered scene."""

    rater_id: str
    scene_id: str
    score: float


def _check_pair(a: RasterImage, b: RasterImage):
    if a.data.shape != b.data.shape:
        raise DimensionMismatch(f"shape mismatch: {a.data.shape} vs {b.data.shape}")


def psnr(a: RasterImage, b: RasterImage) -> float:
    """Peak signal-to-noise ratio in dB for unit dynamic range.

    Returns ``SENTINEL_INF`` when the images are identical (zero MSE).
    """
    _check_pair(a, b)
    diff = a.data.astype(np.float64) - b.data.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return SENTINEL_INF
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_taps(n: int, sigma: float) -> np.ndarray:
    half = n // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    w = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return w / w.sum()


def _windowed_mean(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Separable weighted mean over fully-interior windows ('valid' extent)."""
    half = len(taps) // 2
    out = correlate1d(x, taps, axis=0, mode="constant")
    out = correlate1d(out, taps, axis=1, mode="constant")
    return out[half:-half, half:-half]


def ssim(a: RasterImage, b: RasterImage) -> float:
    """Mean structural similarity, per channel then averaged.

    Gaussian 11x11 window with sigma 1.5, K1=0.01, K2=0.03, dynamic range
    1.0; only windows fully inside the image contribute (no padding).
    """
    _check_pair(a, b)
    if min(a.height, a.width) < _SSIM_WINDOW:
        raise ImageTooSmall(f"ssim needs at least {_SSIM_WINDOW} pixels per side")
    taps = _gaussian_taps(_SSIM_WINDOW, _SSIM_SIGMA)
    c1 = _SSIM_K1 * _SSIM_K1
    c2 = _SSIM_K2 * _SSIM_K2
    per_channel = []
    for ch in range(a.channels):
        x = a.data[:, :, ch].astype(np.float64)
        y = b.data[:, :, ch].astype(np.float64)
        mx = _windowed_mean(x, taps)
        my = _windowed_mean(y, taps)
        vx = _windowed_mean(x * x, taps) - mx * mx
        vy = _windowed_mean(y * y, taps) - my * my
        vxy = _windowed_mean(x * y, taps) - mx * my
        num = (2.0 * mx * my + c1) * (2.0 * vxy + c2)
        den = (mx * mx + my * my + c1) * (vx + vy + c2)
        per_channel.append(np.mean(num / den))
    return float(np.mean(per_channel))


# ---------------------------------------------------------------------------
# LPIPS adapter contract
# ---------------------------------------------------------------------------

def load_lpips_csv(path) -> dict[str, float]:
    """Parse a precomputed adapter CSV with header ``scene_id,lpips``."""
    path = Path(path)
    values: dict[str, float] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["scene_id", "lpips"]:
            raise AdapterFailure(f"{path}: expected header 'scene_id,lpips', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise AdapterFailure(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                value = float(row[1])
            except ValueError:
                raise AdapterFailure(f"{path}:{lineno}: bad lpips value {row[1]!r}") from None
            if value < 0 or not math.isfinite(value):
                raise AdapterFailure(f"{path}:{lineno}: lpips must be finite and >= 0")
            values[row[0]] = value
    return values


def run_lpips_command(adapter: str, pairs: dict[str, tuple[Path, Path]]) -> dict[str, float]:
    """Invoke ``<adapter> --pred <file> --gt <file>`` once per scene.

    The adapter must print a single non-negative decimal on stdout and
    exit 0.
    """
    values: dict[str, float] = {}
    for scene_id, (pred, gt) in sorted(pairs.items()):
        cmd = [*adapter.split(), "--pred", str(pred), "--gt", str(gt)]
        try:
            proc = subprocess.run(cmd, capture_output=True, text=True, check=False)
        except OSError as exc:
            raise AdapterFailure(f"could not launch adapter {adapter!r}: {exc}") from exc
        if proc.returncode != 0:
            raise AdapterFailure(
                f"adapter exited {proc.returncode} for scene {scene_id}: {proc.stderr.strip()}"
            )
        try:
            value = float(proc.stdout.strip())
        except ValueError:
            raise AdapterFailure(
                f"adapter printed {proc.stdout.strip()!r} for scene {scene_id}; expected a number"
            ) from None
        if value < 0 or not math.isfinite(value):
            raise AdapterFailure(f"adapter value for {scene_id} must be finite and >= 0")
        values[scene_id] = value
    return values


def lpips_scores(pred_dir, gt_dir, adapter: str) -> dict[str, float]:
    """Per-scene perceptual distances for every prediction file.

    ``adapter`` is either a path to a precomputed ``scene_id,lpips`` CSV or
    an executable command invoked per pair. Scene ids are prediction file
    stems; ground truths are matched by stem inside ``gt_dir``.
    """
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    pairs: dict[str, tuple[Path, Path]] = {}
    for pred in sorted(pred_dir.glob("*.png")):
        gt_matches = [p for p in gt_dir.iterdir() if p.stem == pred.stem]
        if not gt_matches:
            raise MissingScene(f"no ground truth for {pred.stem}")
        pairs[pred.stem] = (pred, gt_matches[0])
    adapter_path = Path(adapter)
    if adapter_path.suffix.lower() == ".csv" and adapter_path.is_file():
        values = load_lpips_csv(adapter_path)
    else:
        values = run_lpips_command(adapter, pairs)
    missing = sorted(set(pairs) - set(values))
    if missing:
        raise MissingScene(f"adapter returned no value for: {', '.join(missing)}")
    return {scene: values[scene] for scene in pairs}


# ---------------------------------------------------------------------------
# Mean opinion scores
# ---------------------------------------------------------------------------

def validate_mos(r: MosRecord) -> None:
    """Accept exactly the rating grid {1, 2} plus {3, 3.5, ..., 10}.

    Integer scores 1 and 2 flag perceptible degradation; rendered bokeh
    quality spans 3 to 10 in half-point steps. Anything else (2.5, 4.25,
    10.5, ...) raises InvalidScore.
    """
    s = r.score
    if s in (1.0, 2.0):
        return
    if 3.0 <= s <= 10.0 and float(s * 2).is_integer():
        return
    raise InvalidScore(f"score {s} is off the MOS grid")


def mos_aggregate(records: list[MosRecord],
                  method_scenes: dict[str, set[str]]) -> dict[str, float]:
    """Mean opinion score per method, rounded to 2 decimals.

    ``method_scenes`` maps each method to the scene ids of its rendered
    outputs; every (rater, scene) record for those scenes contributes with
    equal weight. Raises EmptyPanel when a method has no records.
    """
    for r in records:
        validate_mos(r)
    out: dict[str, float] = {}
    for method, scenes in method_scenes.items():
        scores = [r.score for r in records if r.scene_id in scenes]
        if not scores:
            raise EmptyPanel(f"no opinion records for method {method!r}")
        out[method] = round(sum(scores) / len(scores), 2)
    return out
