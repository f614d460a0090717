import math

import numpy as np
import pytest

from bokehbench import (
    MEDIAN,
    CoCMap,
    DepthMap,
    aperture_diameter_mm,
    coc_map,
    coc_to_radius_px,
    make_psf,
)
from bokehbench.errors import InvalidBladeCount, NonPositiveInput
from bokehbench.optics import resolve_focus_ref


class TestApertureDiameter:
    def test_wide_open(self):
        assert aperture_diameter_mm(70, 2.0) == 35.0

    def test_stopped_down(self):
        assert aperture_diameter_mm(28, 22.0) == pytest.approx(1.2727272727272727)

    def test_unit_ratio(self):
        assert aperture_diameter_mm(8.0, 8.0) == 1.0

    def test_rejects_nonpositive(self):
        with pytest.raises(NonPositiveInput):
            aperture_diameter_mm(0, 2)
        with pytest.raises(NonPositiveInput):
            aperture_diameter_mm(50, -1)


class TestCocMap:
    def test_constant_depth_is_zero(self):
        d = DepthMap(np.full((5, 7), 3.3, dtype=np.float32))
        assert np.all(coc_map(d, 2.0).data == 0.0)

    def test_clip_at_one(self):
        d = DepthMap(np.array([[10.0]], dtype=np.float32))
        assert coc_map(d, 2.0, focus_ref=4.0).data[0, 0] == 1.0

    def test_direct_evaluation(self):
        d = DepthMap(np.array([[4.5]], dtype=np.float32))
        assert coc_map(d, 2.0, focus_ref=4.0).data[0, 0] == pytest.approx(0.25)

    def test_zero_at_median_pixels(self):
        d = DepthMap(np.array([[1.0, 2.0, 9.0]], dtype=np.float32))
        out = coc_map(d, 4.0, focus_ref=MEDIAN)
        assert out.data[0, 1] == 0.0
        assert out.data[0, 0] > 0

    def test_exhaustive_small_grid_oracle(self):
        # brute-force clip(|D - median| / f, 0, 1) over integer depth grids
        rng = np.random.default_rng(99)
        for f in (1.0, 2.0, 4.0, 22.0):
            grid = rng.integers(0, 9, size=(4, 4)).astype(np.float32)
            d = DepthMap(grid)
            med = float(np.median(grid))
            expected = np.clip(np.abs(grid.astype(np.float64) - med) / f, 0, 1)
            np.testing.assert_array_equal(coc_map(d, f).data,
                                          expected.astype(np.float32))

    def test_homogeneity_under_rescaling(self):
        # |alpha D - alpha ref| / (alpha f) == |D - ref| / f; alpha a power of
        # two so the float arithmetic is exact (values kept below the clip)
        d = DepthMap(np.array([[4.0, 4.25, 4.5]], dtype=np.float32))
        base = coc_map(d, 8.0, focus_ref=4.0)
        scaled = coc_map(DepthMap(d.data * 4.0), 32.0, focus_ref=16.0)
        np.testing.assert_array_equal(base.data, scaled.data)

    def test_mean_coc_non_increasing_in_f(self, rng):
        d = DepthMap(rng.random((16, 16)).astype(np.float32) * 3)
        means = [coc_map(d, f).data.mean() for f in (1.0, 2.0, 4.0, 8.0, 22.0)]
        assert all(a >= b for a, b in zip(means, means[1:]))

    def test_rejects_nonpositive_f(self):
        with pytest.raises(NonPositiveInput):
            coc_map(DepthMap(np.ones((2, 2))), 0.0)

    def test_resolve_focus_ref(self):
        d = DepthMap(np.array([[1.0, 2.0, 3.0]], dtype=np.float32))
        assert resolve_focus_ref(d, MEDIAN) == 2.0
        assert resolve_focus_ref(d, 7.5) == 7.5


class TestCocMapType:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            CoCMap(np.array([[1.5]]))
        with pytest.raises(ValueError):
            CoCMap(np.array([[-0.1]]))


class TestCocToRadius:
    def test_zero_coc_zero_radius(self):
        coc = CoCMap(np.zeros((3, 3)))
        assert np.all(coc_to_radius_px(coc, 2.0, 30.0) == 0.0)

    def test_full_strength_at_reference(self):
        coc = CoCMap(np.ones((1, 1)))
        assert coc_to_radius_px(coc, 22.0, 30.0)[0, 0] == 30.0

    def test_half_scale_at_double_f(self):
        coc = CoCMap(np.ones((1, 1)))
        assert coc_to_radius_px(coc, 44.0, 30.0)[0, 0] == 15.0

    def test_clamped_to_max(self):
        coc = CoCMap(np.ones((1, 1)))
        assert coc_to_radius_px(coc, 2.0, 30.0)[0, 0] == 30.0

    def test_monotone_non_increasing_in_f(self):
        coc = CoCMap(np.full((2, 2), 0.03))
        radii = [coc_to_radius_px(coc, f, 32.0)[0, 0]
                 for f in (2.0, 4.0, 8.0, 14.0, 22.0)]
        assert all(a >= b for a, b in zip(radii, radii[1:]))

    def test_rejects_bad_args(self):
        coc = CoCMap(np.zeros((1, 1)))
        with pytest.raises(NonPositiveInput):
            coc_to_radius_px(coc, 0.0, 30.0)
        with pytest.raises(NonPositiveInput):
            coc_to_radius_px(coc, 2.0, -1.0)


class TestMakePsf:
    def test_radius_zero_identity(self):
        k = make_psf(0.0)
        assert k.weights.shape == (1, 1)
        assert k.weights[0, 0] == 1.0

    def test_tiny_radius_degenerates_to_identity(self):
        # no subsample beyond the center cell falls inside r=0.3
        k = make_psf(0.3)
        assert k.weights.shape == (1, 1) or k.weights.sum() == pytest.approx(1.0)
        center = k.weights[k.half_width, k.half_width]
        assert center == 1.0

    def test_unit_mass(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            radius = float(rng.uniform(0.5, 12.0))
            blades = int(rng.choice([0, 5, 6, 7, 8, 9, 10, 11]))
            rot = float(rng.uniform(0, 2 * math.pi))
            k = make_psf(radius, blades, rot)
            assert abs(k.weights.sum() - 1.0) <= 1e-6

    def test_grid_size(self):
        assert make_psf(5.0).weights.shape == (11, 11)
        assert make_psf(4.2).weights.shape == (11, 11)

    def test_disk_symmetries(self):
        w = make_psf(5.0).weights
        assert np.abs(w - np.flipud(w)).max() <= 1e-6
        assert np.abs(w - np.fliplr(w)).max() <= 1e-6
        assert np.abs(w - w.T).max() <= 1e-6
        assert np.abs(w - np.rot90(w)).max() <= 1e-6

    def test_hexagon_rotational_symmetry(self):
        a = make_psf(5.0, blade_count=6, rotation_rad=0.0).weights
        b = make_psf(5.0, blade_count=6, rotation_rad=math.pi / 3).weights
        assert np.abs(a - b).max() <= 1e-6

    def test_pentagon_symmetry_period(self):
        a = make_psf(5.0, blade_count=5, rotation_rad=0.0).weights
        b = make_psf(5.0, blade_count=5, rotation_rad=2 * math.pi / 5).weights
        c = make_psf(5.0, blade_count=5, rotation_rad=math.pi / 5).weights
        assert np.abs(a - b).max() <= 1e-6
        assert np.abs(a - c).max() > 1e-4  # half-period is a genuinely different kernel

    def test_polygon_mass_inside_disk(self):
        # a polygon's support is a subset of its circumscribed disk
        disk = make_psf(6.0).weights
        hexa = make_psf(6.0, blade_count=6).weights
        assert np.all(hexa[disk == 0] == 0)

    def test_polygon_area_ratio(self):
        # regular hexagon area / disk area = (3 sqrt(3) / 2) / pi
        r = 40.0
        disk = make_psf(r)
        hexa = make_psf(r, blade_count=6)
        ratio = (3 * math.sqrt(3) / 2) / math.pi
        interior = (hexa.weights > 0).sum() / (disk.weights > 0).sum()
        assert interior == pytest.approx(ratio, rel=0.05)

    def test_invalid_blade_counts(self):
        for blades in (1, 2, 3, 4, 12, -1):
            with pytest.raises(InvalidBladeCount):
                make_psf(3.0, blade_count=blades)

    def test_negative_radius(self):
        with pytest.raises(NonPositiveInput):
            make_psf(-1.0)