"""Splat backend selection.

The compiled extension is preferred; the NumPy/FFT fallback is used when
the extension is unavailable or when BOKEH_FORCE_FALLBACK is set to a
non-empty value. Both expose the same ``splat_layer`` contract and agree
to ~1e-9 absolute (FFT rounding), which is far below the 8-bit quantum.
"""

import os

if os.environ.get("BOKEH_FORCE_FALLBACK"):
    from . import _splat_py as _impl

    BACKEND = "fallback"
else:
    try:
        from . import _splat as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _splat_py as _impl

        BACKEND = "fallback"

splat_layer = _impl.splat_layer


def backend_name() -> str:
    return BACKEND