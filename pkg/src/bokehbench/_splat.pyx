# cython: boundscheck=False, wraparound=False, cdivision=True
"""Direct-sum scatter splat over one depth layer.

Every member pixel throws its color onto a disk/polygon footprint taken
from a per-bin kernel bank. Accumulation order is row-major and single
threaded, so results are bit-stable across runs and thread settings.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def splat_layer(double[:, :, ::1] img,
                unsigned char[:, ::1] member,
                int[:, ::1] bins,
                double[:, :, ::1] kernels,
                int[::1] halfwidths,
                double[:, :, ::1] acc,
                double[:, ::1] cov):
    """Scatter member pixels of ``img`` into ``acc``/``cov`` in place.

    ``kernels`` is a padded stack (n_bins, K, K) with each kernel centred;
    ``halfwidths[b]`` gives the true footprint radius of bin ``b`` in
    pixels. Contributions falling outside the image are dropped.
    """
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    cdef Py_ssize_t c = img.shape[2]
    cdef Py_ssize_t pad = kernels.shape[1] // 2
    cdef Py_ssize_t y, x, dy, dx, yy, xx, ch, b, r
    cdef Py_ssize_t dx0, dx1
    cdef double wgt, v0, v1, v2
    with nogil:
        for y in range(h):
            for x in range(w):
                if member[y, x] == 0:
                    continue
                b = bins[y, x]
                r = halfwidths[b]
                v0 = img[y, x, 0]
                v1 = img[y, x, 1] if c > 1 else 0.0
                v2 = img[y, x, 2] if c > 2 else 0.0
                dx0 = -r if x >= r else -x
                dx1 = r if x + r < w else w - 1 - x
                for dy in range(-r, r + 1):
                    yy = y + dy
                    if yy < 0 or yy >= h:
                        continue
                    for dx in range(dx0, dx1 + 1):
                        wgt = kernels[b, pad + dy, pad + dx]
                        if wgt == 0.0:
                            continue
                        xx = x + dx
                        cov[yy, xx] += wgt
                        acc[yy, xx, 0] += wgt * v0
                        if c > 1:
                            acc[yy, xx, 1] += wgt * v1
                            acc[yy, xx, 2] += wgt * v2