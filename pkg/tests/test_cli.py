import json
import stat

import numpy as np
import pytest

from bokehbench import (
    DepthMap,
    RasterImage,
    export_ground_truth,
    load_image,
    make_synthetic_dataset,
    save_depth,
    save_image,
)
from bokehbench.cli import main


@pytest.fixture(scope="module")
def cli_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_data")
    manifest = make_synthetic_dataset(root, n_scenes=2, width=96, height=64,
                                      seed=21, f_numbers=(22.0, 8.0, 2.0))
    gt_dir = root / "gt"
    export_ground_truth(manifest, gt_dir)
    pred_dir = root / "pred"
    pred_dir.mkdir()
    for p in gt_dir.glob("*.png"):
        (pred_dir / p.name).write_bytes(p.read_bytes())
    return root, gt_dir, pred_dir


@pytest.fixture
def render_inputs(tmp_path, rng):
    img = RasterImage(rng.random((48, 64, 3)).astype(np.float32))
    depth = np.full((48, 64), 5.0, dtype=np.float32)
    depth[10:40, 20:50] = 4.0
    img_path = tmp_path / "input.png"
    depth_path = tmp_path / "depth.pfm"
    save_image(img, img_path)
    save_depth(DepthMap(depth), depth_path)
    return img_path, depth_path


class TestRenderCommand:
    def test_basic_render(self, render_inputs, tmp_path):
        img_path, depth_path = render_inputs
        out = tmp_path / "out.png"
        code = main(["render", "--input", str(img_path), "--depth", str(depth_path),
                     "--f-number", "2.0", "--focal-length", "50", "--out", str(out)])
        assert code == 0
        assert out.is_file()
        rendered = load_image(out)
        original = load_image(img_path)
        assert rendered.data.shape == original.data.shape
        assert np.abs(rendered.data - original.data).max() > 5.0 / 255.0

    def test_narrow_aperture_round_trips_input(self, render_inputs, tmp_path):
        img_path, depth_path = render_inputs
        out = tmp_path / "out.png"
        code = main(["render", "--input", str(img_path), "--depth", str(depth_path),
                     "--f-number", "22.0", "--focal-length", "50", "--out", str(out)])
        assert code == 0
        rendered = load_image(out)
        original = load_image(img_path)
        assert np.abs(rendered.data - original.data).max() <= 1.0 / 255.0

    def test_config_file(self, render_inputs, tmp_path):
        img_path, depth_path = render_inputs
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"blade_count": 6, "max_radius_px": 4.0}))
        out = tmp_path / "out.png"
        code = main(["render", "--input", str(img_path), "--depth", str(depth_path),
                     "--f-number", "2.0", "--focal-length", "50",
                     "--config", str(cfg_path), "--out", str(out)])
        assert code == 0
        assert out.is_file()

    def test_tta_flag(self, render_inputs, tmp_path):
        img_path, depth_path = render_inputs
        out = tmp_path / "out.png"
        code = main(["render", "--input", str(img_path), "--depth", str(depth_path),
                     "--f-number", "4.0", "--focal-length", "50",
                     "--tta", "--out", str(out)])
        assert code == 0
        assert out.is_file()

    def test_tile_flag(self, render_inputs, tmp_path):
        img_path, depth_path = render_inputs
        out = tmp_path / "out.png"
        code = main(["render", "--input", str(img_path), "--depth", str(depth_path),
                     "--f-number", "4.0", "--focal-length", "50",
                     "--tile", "32", "--stride", "16", "--out", str(out)])
        assert code == 0
        assert out.is_file()

    def test_tiled_render_matches_whole_frame(self, render_inputs, tmp_path):
        # Focus median and the auto kernel budget must be pinned from the
        # full frame, not re-derived per tile.
        img_path, depth_path = render_inputs
        whole = tmp_path / "whole.png"
        tiled = tmp_path / "tiled.png"
        base = ["render", "--input", str(img_path), "--depth", str(depth_path),
                "--f-number", "2.0", "--focal-length", "50"]
        assert main(base + ["--out", str(whole)]) == 0
        assert main(base + ["--tile", "32", "--stride", "16",
                            "--out", str(tiled)]) == 0
        a = load_image(whole).data
        b = load_image(tiled).data
        assert np.abs(a - b).max() <= 2.0 / 255.0

    def test_missing_input_exits_2(self, render_inputs, tmp_path):
        _, depth_path = render_inputs
        code = main(["render", "--input", str(tmp_path / "nope.png"),
                     "--depth", str(depth_path),
                     "--f-number", "2.0", "--focal-length", "50",
                     "--out", str(tmp_path / "out.png")])
        assert code == 2

    def test_corrupt_config_exits_1(self, render_inputs, tmp_path):
        img_path, depth_path = render_inputs
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text("{broken")
        code = main(["render", "--input", str(img_path), "--depth", str(depth_path),
                     "--f-number", "2.0", "--focal-length", "50",
                     "--config", str(cfg_path), "--out", str(tmp_path / "out.png")])
        assert code == 1

    def test_unknown_config_key_exits_1(self, render_inputs, tmp_path):
        img_path, depth_path = render_inputs
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"bogus_knob": 1}))
        code = main(["render", "--input", str(img_path), "--depth", str(depth_path),
                     "--f-number", "2.0", "--focal-length", "50",
                     "--config", str(cfg_path), "--out", str(tmp_path / "out.png")])
        assert code == 1


class TestScoreCommand:
    def test_score_ground_truth(self, cli_dataset, tmp_path, capsys):
        _, gt_dir, pred_dir = cli_dataset
        out = tmp_path / "scores.csv"
        code = main(["score", "--pred", str(pred_dir), "--gt", str(gt_dir),
                     "--out", str(out)])
        assert code == 0
        assert out.is_file()
        captured = capsys.readouterr().out
        assert "SSIM: 1.0000" in captured

    def test_missing_prediction_exits_1(self, cli_dataset, tmp_path):
        _, gt_dir, _ = cli_dataset
        empty = tmp_path / "empty"
        empty.mkdir()
        code = main(["score", "--pred", str(empty), "--gt", str(gt_dir),
                     "--out", str(tmp_path / "scores.csv")])
        assert code == 1

    def test_failing_adapter_exits_2(self, cli_dataset, tmp_path):
        _, gt_dir, pred_dir = cli_dataset
        script = tmp_path / "broken_adapter.py"
        script.write_text("import sys\nsys.exit(3)\n")
        code = main(["score", "--pred", str(pred_dir), "--gt", str(gt_dir),
                     "--lpips-adapter", f"python3 {script}",
                     "--out", str(tmp_path / "scores.csv")])
        assert code == 2


class TestRankCommand:
    def test_rank_with_mos(self, tmp_path):
        metrics = tmp_path / "metrics.csv"
        metrics.write_text(
            "team,psnr,ssim,lpips\n"
            "alpha,31.0,0.94,0.09\n"
            "beta,30.0,0.93,0.10\n"
        )
        mos = tmp_path / "mos.csv"
        mos.write_text("team,mos\nalpha,7.5\nbeta,6.0\n")
        out = tmp_path / "leaderboard.csv"
        code = main(["rank", "--metrics", str(metrics), "--mos", str(mos),
                     "--out", str(out)])
        assert code == 0
        text = out.read_text()
        assert text.splitlines()[1].startswith("alpha,")

    def test_rank_without_mos(self, tmp_path):
        metrics = tmp_path / "metrics.csv"
        metrics.write_text("team,psnr,ssim,lpips\nalpha,31.0,0.94,0.09\n")
        out = tmp_path / "leaderboard.csv"
        code = main(["rank", "--metrics", str(metrics), "--out", str(out)])
        assert code == 0

    def test_bad_header_exits_1(self, tmp_path):
        metrics = tmp_path / "metrics.csv"
        metrics.write_text("team,psnr\nalpha,31.0\n")
        code = main(["rank", "--metrics", str(metrics),
                     "--out", str(tmp_path / "leaderboard.csv")])
        assert code == 1

    def test_missing_file_exits_2(self, tmp_path):
        code = main(["rank", "--metrics", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path / "leaderboard.csv")])
        assert code == 2


class TestValidateCommand:
    def test_complete_submission(self, cli_dataset, capsys):
        root, _, pred_dir = cli_dataset
        code = main(["validate", "--pred", str(pred_dir), "--manifest", str(root)])
        assert code == 0
        assert "submission OK" in capsys.readouterr().out

    def test_incomplete_submission_exits_1(self, cli_dataset, tmp_path, capsys):
        root, _, _ = cli_dataset
        empty = tmp_path / "empty"
        empty.mkdir()
        code = main(["validate", "--pred", str(empty), "--manifest", str(root)])
        assert code == 1
        assert "missing" in capsys.readouterr().out


class TestDatasetCheckCommand:
    def test_valid_root(self, cli_dataset, capsys):
        root, _, _ = cli_dataset
        code = main(["dataset-check", "--root", str(root)])
        assert code == 0
        out = capsys.readouterr().out
        assert "2 scene(s)" in out
        assert "test=2" in out

    def test_bad_root_exits_1(self, tmp_path):
        code = main(["dataset-check", "--root", str(tmp_path)])
        assert code == 1