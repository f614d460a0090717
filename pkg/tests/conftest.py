import numpy as np
import pytest

from bokehbench import DepthMap, RasterImage


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_image(rng):
    def make(height=32, width=32, channels=3, seed=None):
        r = rng if seed is None else np.random.default_rng(seed)
        return RasterImage(r.random((height, width, channels)).astype(np.float32))
    return make


@pytest.fixture
def two_plane_scene(rng):
    """Small image + two-plane depth with the left half in focus."""
    img = RasterImage(rng.random((40, 56, 3)).astype(np.float32))
    depth = np.full((40, 56), 5.0, dtype=np.float32)
    depth[:, :28] = 4.0
    return img, DepthMap(depth)