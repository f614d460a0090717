"""Pure-NumPy splat fallback.

Scattering a fixed kernel from every member pixel of a bin is the same
linear operator as convolving the masked image with that kernel, so the
fallback runs one FFT convolution per occupied radius bin. Work is
restricted to the bounding box of each bin's members (padded by the
kernel half-width) to keep the transforms small.
"""

import numpy as np
from scipy.signal import fftconvolve


def splat_layer(img, member, bins, kernels, halfwidths, acc, cov):
    """Same contract as the compiled version; accumulates in place."""
    h, w, _ = img.shape
    pad = kernels.shape[1] // 2
    for b in range(kernels.shape[0]):
        sel = member.astype(bool) & (bins == b)
        if not sel.any():
            continue
        r = int(halfwidths[b])
        k = kernels[b, pad - r:pad + r + 1, pad - r:pad + r + 1]
        ys, xs = np.nonzero(sel)
        y0 = max(int(ys.min()) - r, 0)
        y1 = min(int(ys.max()) + r + 1, h)
        x0 = max(int(xs.min()) - r, 0)
        x1 = min(int(xs.max()) + r + 1, w)
        box = (slice(y0, y1), slice(x0, x1))
        m = sel[box].astype(np.float64)
        if r == 0:
            cov[box] += k[0, 0] * m
            acc[box] += k[0, 0] * img[box] * m[:, :, None]
            continue
        cov[box] += fftconvolve(m, k, mode="same")
        src = img[box] * m[:, :, None]
        for ch in range(img.shape[2]):
            acc[box][:, :, ch] += fftconvolve(src[:, :, ch], k, mode="same")