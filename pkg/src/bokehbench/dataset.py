"""Dataset layout, manifest loading, and a synthetic mini-dataset generator.

Expected layout::

    root/
      splits.json                 {"train": [...], "val": [...], "test": [...]}
      scenes/<scene_id>/
        meta.json                 scene_id, focal_length_mm, focus_distance_m,
                                  captures: [{f_number, filename}, ...]
        <scene_id>_f22.0.png      the all-in-focus input capture
        <scene_id>_f8.0.png ...   wider-aperture targets (may be absent when
                                  a split's ground truth is held back)

Captures follow the shooting protocol: the first is the f/22 input, the
rest are targets at strictly decreasing f-numbers ending at f/2.0.
"""

from __future__ import annotations

import json
import shutil
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .errors import InvariantViolation, MissingMeta
from .raster import ApertureSetting, DepthMap, RasterImage, save_depth, save_image

INPUT_F_NUMBER = 22.0
FINAL_TARGET_F_NUMBER = 2.0

#: Published split sizes; deviations warn instead of failing so the same
#: loader serves subset checkouts and synthetic fixtures.
EXPECTED_SPLIT_SIZES = {"train": 20500, "val": 78, "test": 68}


def format_f_number(f_number: float) -> str:
    """f-number with at least one decimal: 2 -> "2.0", 7.1 -> "7.1"."""
    s = f"{float(f_number):.10g}"
    return s if "." in s else s + ".0"


def submission_filename(scene_id: str, f_number: float) -> str:
    return f"{scene_id}_f{format_f_number(f_number)}.png"


@dataclass(frozen=True)
class SceneRecord:
    """One scene: the f/22 input plus its wider-aperture targets.

    ``targets`` holds (f_number, path-or-None); None marks ground truth
    that exists in the protocol but is not present on disk (private split).
    """

    scene_id: str
    input_path: Path
    targets: tuple
    focal_length_mm: float
    focus_distance_m: float | None = None

    def __post_init__(self):
        fs = [f for f, _ in self.targets]
        if not fs:
            raise InvariantViolation(f"{self.scene_id}: no targets")
        if any(b >= a for a, b in zip(fs, fs[1:])):
            raise InvariantViolation(
                f"{self.scene_id}: target f-numbers must strictly decrease, got {fs}"
            )
        if fs[0] >= INPUT_F_NUMBER:
            raise InvariantViolation(
                f"{self.scene_id}: targets must be wider than the f/22 input"
            )
        if fs[-1] != FINAL_TARGET_F_NUMBER:
            raise InvariantViolation(
                f"{self.scene_id}: capture sequence must end at f/2.0, got f/{fs[-1]}"
            )

    @property
    def aperture(self) -> ApertureSetting:
        return ApertureSetting(INPUT_F_NUMBER, self.focal_length_mm, self.focus_distance_m)


@dataclass
class SplitManifest:
    """All scene records plus their train/val/test assignment."""

    root: Path
    scenes: dict = field(default_factory=dict)
    splits: dict = field(default_factory=dict)

    def records_for(self, split: str) -> list:
        return [self.scenes[sid] for sid in self.splits.get(split, [])]

    def split_counts(self) -> dict:
        return {name: len(ids) for name, ids in self.splits.items()}

    def expected_pairs(self) -> dict:
        """Mapping submission-file stem -> (SceneRecord, f_number, gt_path-or-None)."""
        pairs = {}
        for rec in self.scenes.values():
            for f_number, path in rec.targets:
                stem = f"{rec.scene_id}_f{format_f_number(f_number)}"
                pairs[stem] = (rec, f_number, path)
        return pairs


def _load_scene(scene_dir: Path) -> SceneRecord:
    meta_path = scene_dir / "meta.json"
    if not meta_path.is_file():
        raise MissingMeta(f"{scene_dir}: meta.json not found")
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as e:
        raise MissingMeta(f"{meta_path}: invalid JSON: {e}") from e
    for key in ("scene_id", "focal_length_mm", "captures"):
        if key not in meta:
            raise MissingMeta(f"{meta_path}: missing key {key!r}")
    if meta["scene_id"] != scene_dir.name:
        raise InvariantViolation(
            f"{meta_path}: scene_id {meta['scene_id']!r} != directory {scene_dir.name!r}"
        )
    captures = meta["captures"]
    if not captures or captures[0]["f_number"] != INPUT_F_NUMBER:
        raise InvariantViolation(f"{scene_dir.name}: first capture must be f/22")
    input_path = scene_dir / captures[0]["filename"]
    if not input_path.is_file():
        raise InvariantViolation(f"{scene_dir.name}: input capture {input_path.name} missing")
    targets = []
    for cap in captures[1:]:
        path = scene_dir / cap["filename"]
        targets.append((float(cap["f_number"]), path if path.is_file() else None))
    return SceneRecord(
        scene_id=meta["scene_id"],
        input_path=input_path,
        targets=tuple(targets),
        focal_length_mm=float(meta["focal_length_mm"]),
        focus_distance_m=(
            None if meta.get("focus_distance_m") is None
            else float(meta["focus_distance_m"])
        ),
    )


def load_manifest(root) -> SplitManifest:
    """Load and validate every scene under ``root``.

    Split sizes are compared against the published protocol with warnings
    on mismatch. A missing splits.json assigns every scene to "test".
    """
    root = Path(root)
    scenes_dir = root / "scenes"
    if not scenes_dir.is_dir():
        raise MissingMeta(f"{root}: no scenes/ directory")
    scenes = {}
    for scene_dir in sorted(p for p in scenes_dir.iterdir() if p.is_dir()):
        rec = _load_scene(scene_dir)
        scenes[rec.scene_id] = rec

    splits_path = root / "splits.json"
    if splits_path.is_file():
        splits = json.loads(splits_path.read_text())
    else:
        warnings.warn(f"{root}: no splits.json; assigning all scenes to 'test'")
        splits = {"train": [], "val": [], "test": sorted(scenes)}

    seen = set()
    for name, ids in splits.items():
        for sid in ids:
            if sid in seen:
                raise InvariantViolation(f"scene {sid!r} appears in multiple splits")
            if sid not in scenes:
                raise InvariantViolation(f"split {name!r} references unknown scene {sid!r}")
            seen.add(sid)
    for name, expected in EXPECTED_SPLIT_SIZES.items():
        actual = len(splits.get(name, []))
        if actual != expected:
            warnings.warn(
                f"split {name!r} has {actual} scenes, protocol specifies {expected}"
            )
    return SplitManifest(root=root, scenes=scenes, splits=splits)


def export_ground_truth(manifest: SplitManifest, out_dir) -> list:
    """Copy every on-disk target into a flat directory for scoring."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    copied = []
    for rec in manifest.scenes.values():
        for f_number, path in rec.targets:
            if path is None:
                continue
            dest = out_dir / submission_filename(rec.scene_id, f_number)
            shutil.copyfile(path, dest)
            copied.append(dest)
    return copied


def _smooth_random_image(rng, width: int, height: int, highlights: int) -> RasterImage:
    coarse = rng.random((height // 16 + 2, width // 16 + 2, 3))
    img = cv2.resize(coarse.astype(np.float32), (width, height),
                     interpolation=cv2.INTER_CUBIC)
    img = np.clip(img, 0.0, 1.0)
    ys = rng.integers(0, height, size=highlights)
    xs = rng.integers(0, width, size=highlights)
    img[ys, xs] = 1.0
    return RasterImage(img)


def _two_plane_depth(rng, width: int, height: int,
                     near_m: float, far_m: float) -> DepthMap:
    depth = np.full((height, width), far_m, dtype=np.float32)
    x0 = int(rng.integers(0, width // 2))
    y0 = int(rng.integers(0, height // 2))
    x1 = int(rng.integers(width // 2 + 1, width))
    y1 = int(rng.integers(height // 2 + 1, height))
    depth[y0:y1, x0:x1] = near_m
    return DepthMap(depth)


def make_synthetic_dataset(root, n_scenes: int = 5, width: int = 256,
                           height: int = 192, seed: int = 0,
                           f_numbers=(22.0, 8.0, 4.0, 2.0),
                           render_config=None) -> SplitManifest:
    """Generate a self-consistent miniature dataset with rendered targets.

    Scenes are smooth random textures with bright highlight dots over a
    two-plane depth map focused on the near plane. The plane separation is
    tied to the kernel radius budget so the f/22 render is the input
    verbatim while every wider f-stop blurs by a distinct radius. All
    scenes land in the "test" split. A `<scene_id>_depth.pfm` is written
    per scene so renders can be reproduced from disk.
    """
    from .renderer import RenderConfig, render_bokeh

    cfg = render_config if render_config is not None else RenderConfig()
    max_radius = cfg.resolved_max_radius(width, height)
    spread_lo = 2.3 / max_radius
    spread_hi = 2.9 / max_radius
    rng = np.random.default_rng(seed)
    root = Path(root)
    scenes_dir = root / "scenes"
    scenes_dir.mkdir(parents=True, exist_ok=True)
    scene_ids = []
    for i in range(n_scenes):
        sid = f"scene{i:04d}"
        scene_ids.append(sid)
        scene_dir = scenes_dir / sid
        scene_dir.mkdir(exist_ok=True)
        img = _smooth_random_image(rng, width, height, highlights=24)
        near = 4.0
        far = near + float(rng.uniform(spread_lo, spread_hi))
        depth = _two_plane_depth(rng, width, height, near, far)
        focal = float(rng.uniform(28.0, 70.0))
        captures = []
        for f_number in f_numbers:
            target = ApertureSetting(f_number, focal, near)
            out = render_bokeh(img, depth, target, cfg)
            filename = submission_filename(sid, f_number)
            save_image(out, scene_dir / filename, transfer="linear", bit_depth=8)
            captures.append({"f_number": f_number, "filename": filename})
        save_depth(depth, scene_dir / f"{sid}_depth.pfm")
        meta = {
            "scene_id": sid,
            "focal_length_mm": focal,
            "focus_distance_m": near,
            "captures": captures,
        }
        (scene_dir / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    splits = {"train": [], "val": [], "test": scene_ids}
    (root / "splits.json").write_text(json.dumps(splits, indent=2) + "\n")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return load_manifest(root)