"""Submission validation and two-metric (plus LPIPS adapter) scoring.

A submission is a flat directory of `{scene_id}_f{f_number}.png` files,
one per (scene, target f-number) pair. Scoring matches prediction files
to ground-truth files of the same name and averages metrics arithmetically
over all pairs; PSNR entries at the infinity sentinel are excluded from
the PSNR mean and counted instead of capped.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .dataset import SplitManifest
from .errors import DimensionMismatch, MissingScene
from .metrics import SENTINEL_INF, lpips_scores, psnr, ssim
from .raster import load_image


def worker_count() -> int:
    """Worker cap: BOKEH_THREADS when set, else up to 8 cores."""
    env = os.environ.get("BOKEH_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"BOKEH_THREADS must be >= 1, got {env}")
        return n
    return min(8, os.cpu_count() or 1)


@dataclass
class ValidationReport:
    """Outcome of checking a submission against the manifest."""

    missing: list = field(default_factory=list)
    extra: list = field(default_factory=list)
    dimension_mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.missing or self.extra or self.dimension_mismatches)

    def format(self) -> str:
        if self.ok:
            return "submission OK"
        lines = []
        for name, items in (("missing", self.missing), ("extra", self.extra),
                            ("dimension mismatch", self.dimension_mismatches)):
            for item in items:
                lines.append(f"{name}: {item}")
        return "\n".join(lines)


@dataclass(frozen=True)
class PairScore:
    """Metrics for one (scene, f-number) prediction/ground-truth pair."""

    name: str
    psnr_db: float
    ssim: float
    lpips: float | None = None


@dataclass
class ScoreResult:
    """Aggregate metrics plus the per-pair breakdown behind them."""

    psnr_db: float
    ssim: float
    lpips: float | None
    psnr_excluded: int
    pairs: list

    def summary(self) -> str:
        lpips = "n/a" if self.lpips is None else f"{self.lpips:.4f}"
        excluded = f" ({self.psnr_excluded} infinite PSNR pair(s) excluded)" \
            if self.psnr_excluded else ""
        return (f"pairs: {len(self.pairs)}  PSNR: {self.psnr_db:.3f} dB{excluded}  "
                f"SSIM: {self.ssim:.4f}  LPIPS: {lpips}")


def _png_stems(root: Path) -> dict:
    return {p.stem: p for p in sorted(root.glob("*.png"))}


def validate_submission(pred_root, manifest: SplitManifest) -> ValidationReport:
    """Compare a flat prediction directory against the manifest's pairs.

    Dimensions are checked against ground truth where it exists on disk;
    private targets only get presence checks.
    """
    pred_root = Path(pred_root)
    report = ValidationReport()
    preds = _png_stems(pred_root) if pred_root.is_dir() else {}
    expected = manifest.expected_pairs()
    for stem in sorted(expected):
        if stem not in preds:
            report.missing.append(f"{stem}.png")
    for stem in sorted(set(preds) - set(expected)):
        report.extra.append(f"{stem}.png")
    for stem, pred_path in sorted(preds.items()):
        if stem not in expected:
            continue
        _, _, gt_path = expected[stem]
        if gt_path is None:
            continue
        pred = load_image(pred_path)
        gt = load_image(gt_path)
        if pred.data.shape[:2] != gt.data.shape[:2]:
            report.dimension_mismatches.append(
                f"{stem}.png: {pred.width}x{pred.height}, "
                f"expected {gt.width}x{gt.height}"
            )
    return report


def _score_pair(stem: str, pred_path: Path, gt_path: Path) -> PairScore:
    pred = load_image(pred_path)
    gt = load_image(gt_path)
    if pred.data.shape != gt.data.shape:
        raise DimensionMismatch(
            f"{stem}: prediction {pred.data.shape} vs ground truth {gt.data.shape}"
        )
    return PairScore(stem, psnr(pred, gt), ssim(pred, gt))


def score_submission(pred_root, gt_root, lpips_adapter=None) -> ScoreResult:
    """Score a submission directory against a flat ground-truth directory.

    Pairs are defined by the ground-truth *.png files; a prediction must
    exist for each. Per-pair work fans out over a thread pool capped by
    BOKEH_THREADS; results are assembled in name order, so the output is
    independent of scheduling.
    """
    pred_root, gt_root = Path(pred_root), Path(gt_root)
    gts = _png_stems(gt_root)
    if not gts:
        raise MissingScene(f"no ground-truth *.png files under {gt_root}")
    preds = _png_stems(pred_root)
    missing = sorted(set(gts) - set(preds))
    if missing:
        raise MissingScene(f"missing prediction(s): {', '.join(missing)}")

    stems = sorted(gts)
    workers = worker_count()
    if workers == 1:
        scored = [_score_pair(s, preds[s], gts[s]) for s in stems]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scored = list(pool.map(
                lambda s: _score_pair(s, preds[s], gts[s]), stems))

    lpips_by_stem = {}
    if lpips_adapter is not None:
        lpips_by_stem = lpips_scores(pred_root, gt_root, lpips_adapter)
        scored = [PairScore(p.name, p.psnr_db, p.ssim, lpips_by_stem.get(p.name))
                  for p in scored]

    finite = [p.psnr_db for p in scored if not math.isinf(p.psnr_db)]
    agg_psnr = sum(finite) / len(finite) if finite else SENTINEL_INF
    agg_ssim = sum(p.ssim for p in scored) / len(scored)
    agg_lpips = None
    if lpips_by_stem:
        vals = [p.lpips for p in scored if p.lpips is not None]
        agg_lpips = sum(vals) / len(vals) if vals else None
    return ScoreResult(
        psnr_db=agg_psnr,
        ssim=agg_ssim,
        lpips=agg_lpips,
        psnr_excluded=len(scored) - len(finite),
        pairs=scored,
    )


def write_score_csv(result: ScoreResult, path) -> None:
    """Per-pair CSV: scene_id,psnr,ssim,lpips (lpips empty without adapter)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scene_id", "psnr", "ssim", "lpips"])
        for p in result.pairs:
            psnr_s = "inf" if math.isinf(p.psnr_db) else f"{p.psnr_db:.9f}"
            lpips_s = "" if p.lpips is None else f"{p.lpips:.9f}"
            writer.writerow([p.name, psnr_s, f"{p.ssim:.9f}", lpips_s])