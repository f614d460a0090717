"""Command-line interface.

Subcommands: render, score, rank, validate, dataset-check.
Exit codes: 0 success, 1 validation failure, 2 I/O or adapter failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .dataset import load_manifest
from .errors import AdapterFailure, BokehBenchError, DecodeError, UnsupportedFormat
from .inference import TileSpec, tile_process, tta_ensemble
from .ranking import build_leaderboard, emit_leaderboard, read_metrics_csv, read_mos_csv
from .raster import ApertureSetting, load_depth, load_image, save_image
from .renderer import RenderConfig, default_max_radius_px, render_bokeh
from .scoring import score_submission, validate_submission, write_score_csv

_IO_ERRORS = (DecodeError, UnsupportedFormat, AdapterFailure, OSError)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bokehbench",
        description="Controllable bokeh rendering and challenge evaluation tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render shallow depth of field from image + depth")
    p.add_argument("--input", required=True, help="input image (PNG/JPEG), the f/22 capture")
    p.add_argument("--depth", required=True, help="depth map (single-channel PFM)")
    p.add_argument("--f-number", type=float, required=True, help="target aperture")
    p.add_argument("--focal-length", type=float, required=True, help="focal length in mm")
    p.add_argument("--config", help="JSON file with render parameters")
    p.add_argument("--out", required=True, help="output image path (PNG)")
    p.add_argument("--tta", action="store_true",
                   help="average over the 8 dihedral transforms")
    p.add_argument("--tile", type=int, help="process in square tiles of this size")
    p.add_argument("--stride", type=int, default=384,
                   help="tile stride in px (with --tile; default 384)")

    p = sub.add_parser("score", help="score a submission directory against ground truth")
    p.add_argument("--pred", required=True, help="directory of prediction PNGs")
    p.add_argument("--gt", required=True, help="directory of ground-truth PNGs")
    p.add_argument("--lpips-adapter",
                   help="external LPIPS source: a CSV file or a command template")
    p.add_argument("--out", required=True, help="per-scene CSV output path")

    p = sub.add_parser("rank", help="build the two-track leaderboard CSV")
    p.add_argument("--metrics", required=True, help="CSV with header team,psnr,ssim,lpips")
    p.add_argument("--mos", help="CSV with header team,mos")
    p.add_argument("--out", required=True, help="leaderboard CSV output path")

    p = sub.add_parser("validate", help="check a submission for completeness")
    p.add_argument("--pred", required=True, help="directory of prediction PNGs")
    p.add_argument("--manifest", required=True, help="dataset root directory")

    p = sub.add_parser("dataset-check", help="validate dataset layout and split counts")
    p.add_argument("--root", required=True, help="dataset root directory")
    return parser


def _cmd_render(args) -> int:
    img = load_image(args.input)
    depth = load_depth(args.depth)
    cfg = RenderConfig()
    if args.config:
        cfg = RenderConfig.from_dict(json.loads(Path(args.config).read_text()))
    target = ApertureSetting(args.f_number, args.focal_length)
    # Pin shot-level defaults from the full frame; with --tile each tile
    # would otherwise refocus on its own median and rescale the kernel
    # budget to its own diagonal.
    if cfg.focus_ref is None and target.focus_distance_m is None:
        cfg = dataclasses.replace(cfg, focus_ref=float(np.median(depth.data)))
    if cfg.max_radius_px is None:
        h, w = img.data.shape[:2]
        cfg = dataclasses.replace(cfg, max_radius_px=default_max_radius_px(w, h))

    def op(im, dm):
        return render_bokeh(im, dm, target, cfg)

    run = op
    if args.tile:
        spec = TileSpec(args.tile, args.stride)
        run = lambda im, dm: tile_process(op, im, spec, aux=dm)
    if args.tta:
        inner = run
        run = lambda im, dm: tta_ensemble(inner, im, aux=dm)
    out = run(img, depth)
    save_image(out, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_score(args) -> int:
    result = score_submission(args.pred, args.gt, args.lpips_adapter)
    write_score_csv(result, args.out)
    print(result.summary())
    print(f"wrote {args.out}")
    return 0


def _cmd_rank(args) -> int:
    metric_entries = read_metrics_csv(args.metrics)
    mos_entries = read_mos_csv(args.mos) if args.mos else None
    rows = build_leaderboard(metric_entries, mos_entries)
    emit_leaderboard(rows, args.out)
    print(f"ranked {len(rows)} team(s); wrote {args.out}")
    return 0


def _cmd_validate(args) -> int:
    manifest = load_manifest(args.manifest)
    report = validate_submission(args.pred, manifest)
    print(report.format())
    return 0 if report.ok else 1


def _cmd_dataset_check(args) -> int:
    manifest = load_manifest(args.root)
    counts = manifest.split_counts()
    print(f"{len(manifest.scenes)} scene(s); splits: "
          + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    return 0


_COMMANDS = {
    "render": _cmd_render,
    "score": _cmd_score,
    "rank": _cmd_rank,
    "validate": _cmd_validate,
    "dataset-check": _cmd_dataset_check,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _IO_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (BokehBenchError, ValueError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())