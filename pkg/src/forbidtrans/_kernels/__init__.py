"""Hot numerical kernels.

The compiled extension is used when it was built and importable; otherwise
the numpy fallback is selected. Setting ``FORBIDTRANS_PURE_PYTHON=1`` forces
the fallback.
"""
import os

import numpy as np

from . import _fallback

if os.environ.get("FORBIDTRANS_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _bath as _compiled
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"

if _compiled is not None:
    _bath_impl = _compiled.bath_spectrum
else:
    _bath_impl = _fallback.bath_spectrum


def bath_spectrum(energies, sigma, r2, offsets, gaussian, width, cutoff):
    return _bath_impl(
        np.ascontiguousarray(energies, dtype=float),
        np.ascontiguousarray(sigma, dtype=float),
        np.ascontiguousarray(r2, dtype=float),
        np.ascontiguousarray(np.atleast_1d(offsets), dtype=float),
        bool(gaussian), float(width), float(cutoff),
    )


__all__ = ["BACKEND", "bath_spectrum"]
