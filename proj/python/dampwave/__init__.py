"""Damped wave spectra, geodesic averages and propagators on model manifolds."""

import os as _os


def _blas_core():
    # OpenBLAS reads this once, when the extension pulls it in
    try:
        with open("/proc/cpuinfo") as f:
            flags = next((l for l in f if l.startswith("flags")), "").split()
    except OSError:
        return None
    if "avx512f" in flags:
        return "SkylakeX"
    if "avx2" in flags:
        return "Haswell"
    return None


if "OPENBLAS_CORETYPE" not in _os.environ and _blas_core():
    _os.environ["OPENBLAS_CORETYPE"] = _blas_core()

from ._dampwave import *  # noqa: E402,F401,F403
from ._dampwave import __doc__  # noqa: E402,F401

__version__ = "0.1.0"
