"""Backend selection for the sifting and windowing kernels.

The compiled extension is preferred.  Set ``OUSIOFLUCT_PURE_PYTHON=1`` to force
the numpy/scipy implementation, e.g. for benchmarking or debugging.
"""

import logging
import os

logger = logging.getLogger(__name__)

_FORCE_PURE = os.environ.get("OUSIOFLUCT_PURE_PYTHON", "").strip() not in ("", "0")

if _FORCE_PURE:
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _kernels_py as _impl
        BACKEND = "python"
        logger.debug("compiled kernels unavailable; using pure-Python fallback")

find_extrema = _impl.find_extrema
count_zero_crossings = _impl.count_zero_crossings
natural_spline = _impl.natural_spline
envelope_mean = _impl.envelope_mean
sift = _impl.sift
window_sums = _impl.window_sums

__all__ = ["BACKEND", "find_extrema", "count_zero_crossings", "natural_spline",
           "envelope_mean", "sift", "window_sums"]
