#!/usr/bin/env python3
"""Compare the compiled scatter-splat kernel against the FFT fallback.

Builds the real per-layer workload (boosted source image, layer
membership, quantized radius bins, shared kernel bank) for a two-plane
scene at the requested size, then times `splat_layer` over every layer
for both backends and checks they agree.

Usage: python3 benchmarks/bench_splat.py [--width 1024] [--height 768]
       [--repeats 5] [--f-number 2.0]
"""

import argparse
import time

import numpy as np

from bokehbench import ApertureSetting, DepthMap, RasterImage, RenderConfig
from bokehbench import _splat_py
from bokehbench.optics import coc_map, coc_to_radius_px
from bokehbench.renderer import (
    RADIUS_QUANTUM_PX,
    _kernel_bank,
    _layer_indices,
    highlight_boost,
)

try:
    from bokehbench import _splat
except ImportError:
    _splat = None


def build_workload(width, height, f_number, cfg, seed=0):
    rng = np.random.default_rng(seed)
    img = RasterImage(rng.random((height, width, 3)).astype(np.float32))
    depth = np.full((height, width), 6.0, dtype=np.float32)
    depth[height // 4:3 * height // 4, width // 4:3 * width // 4] = 4.0
    d = DepthMap(depth)

    coc = coc_map(d, f_number, 4.0)
    radii = coc_to_radius_px(coc, f_number, cfg.resolved_max_radius(width, height))
    bins = np.rint(radii / RADIUS_QUANTUM_PX).astype(np.int32)
    compact, stack, halfwidths = _kernel_bank(bins, cfg.blade_count,
                                              cfg.blade_rotation_rad)
    defocus = np.abs(depth.astype(np.float64) - 4.0)
    layers = _layer_indices(defocus, cfg.layer_count)
    src = np.ascontiguousarray(
        highlight_boost(img, cfg.highlight_gain, cfg.highlight_knee).data,
        dtype=np.float64)
    members = [np.ascontiguousarray(layers == i, dtype=np.uint8)
               for i in range(cfg.layer_count)]
    return src, members, np.ascontiguousarray(compact), stack, halfwidths


def run_backend(impl, src, members, bins, stack, halfwidths):
    h, w, c = src.shape
    acc_total = np.zeros((h, w, c))
    cov_total = np.zeros((h, w))
    for member in members:
        if not member.any():
            continue
        acc = np.zeros((h, w, c))
        cov = np.zeros((h, w))
        impl.splat_layer(src, member, bins, stack, halfwidths, acc, cov)
        acc_total += acc
        cov_total += cov
    return acc_total, cov_total


def time_backend(impl, workload, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = run_backend(impl, *workload)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--width", type=int, default=1024)
    parser.add_argument("--height", type=int, default=768)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--f-number", type=float, default=2.0)
    args = parser.parse_args()

    cfg = RenderConfig()
    workload = build_workload(args.width, args.height, args.f_number, cfg)
    n_kernels = workload[3].shape[0]
    k = workload[3].shape[1]
    print(f"{args.width}x{args.height} @ f/{args.f_number:g}: "
          f"{cfg.layer_count} layers, {n_kernels} kernels up to {k}x{k}")

    t_py, (acc_py, cov_py) = time_backend(_splat_py, workload, args.repeats)
    print(f"fallback (FFT):  {t_py * 1000:9.1f} ms")

    if _splat is None:
        print("compiled backend not built; skipping comparison")
        return

    t_c, (acc_c, cov_c) = time_backend(_splat, workload, args.repeats)
    dev = max(np.abs(acc_c - acc_py).max(), np.abs(cov_c - cov_py).max())
    print(f"compiled:        {t_c * 1000:9.1f} ms")
    print(f"speedup: {t_py / t_c:.2f}x   max |diff|: {dev:.2e}")


if __name__ == "__main__":
    main()