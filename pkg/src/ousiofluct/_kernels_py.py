"""Pure numpy/scipy versions of the compiled kernels.

Used when the extension module is unavailable or when
``OUSIOFLUCT_PURE_PYTHON`` is set.  Behaviour matches ``_kernels.pyx``.
"""

import numpy as np
from scipy.interpolate import CubicSpline


def find_extrema(x):
    """Indices of strict local maxima and minima (plateau -> floor midpoint)."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if n < 3:
        empty = np.empty(0, dtype=np.intp)
        return empty, empty.copy()
    change = np.flatnonzero(x[1:] != x[:-1])
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change, [n - 1]))
    vals = x[starts]
    if vals.size < 3:
        empty = np.empty(0, dtype=np.intp)
        return empty, empty.copy()
    mid = vals[1:-1]
    up = mid > vals[:-2]
    down = mid > vals[2:]
    is_max = up & down
    is_min = (mid < vals[:-2]) & (mid < vals[2:])
    centre = (starts[1:-1] + ends[1:-1]) // 2
    return centre[is_max].astype(np.intp), centre[is_min].astype(np.intp)


def count_zero_crossings(x):
    s = np.sign(np.asarray(x, dtype=np.float64))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def natural_spline(t, y, n):
    """Natural cubic spline through knots ``(t, y)`` sampled at ``0..n-1``."""
    t = np.asarray(t, dtype=np.float64)
    if t.shape[0] < 3:
        raise ValueError("need at least 3 knots")
    return CubicSpline(t, y, bc_type="natural")(np.arange(n, dtype=np.float64))


def _envelope(x, idx):
    n = x.shape[0]
    last = float(n - 1)
    t = np.concatenate((-idx[1::-1].astype(np.float64), idx.astype(np.float64),
                        2.0 * last - idx[:-3:-1].astype(np.float64)))
    y = np.concatenate((x[idx[1::-1]], x[idx], x[idx[:-3:-1]]))
    return natural_spline(t, y, n)


def _mean_from(x, maxi, mini):
    return 0.5 * (_envelope(x, maxi) + _envelope(x, mini))


def envelope_mean(x):
    """Mean of the mirrored natural-spline envelopes, or None if too few extrema."""
    x = np.asarray(x, dtype=np.float64)
    maxi, mini = find_extrema(x)
    if maxi.size < 2 or mini.size < 2:
        return None
    return _mean_from(x, maxi, mini)


def _counts_ok(nmax, nmin, zc):
    return abs(nmax + nmin - zc) <= 1


def sift(x, sd_threshold=0.2, max_sifts=100):
    """Sift one IMF out of ``x``.

    Returns ``(imf, n_sifts, converged)``.
    """
    h = np.array(x, dtype=np.float64, copy=True)
    maxi, mini = find_extrema(h)
    it = 0
    while it < max_sifts:
        if maxi.size < 2 or mini.size < 2:
            return h, it, _counts_ok(maxi.size, mini.size, count_zero_crossings(h))
        m = _mean_from(h, maxi, mini)
        den = float(np.dot(h, h))
        num = float(np.dot(m, m))
        h = h - m
        it += 1
        maxi, mini = find_extrema(h)
        if den == 0.0:
            return h, it, True
        if num / den < sd_threshold and _counts_ok(maxi.size, mini.size,
                                                   count_zero_crossings(h)):
            return h, it, True
    return h, it, False


def window_sums(scores, hits, window, skip):
    """Per-window sum of token scores and lexicon hit counts.

    Windows start at 0, skip, 2*skip, ... while a full window fits.
    """
    scores = np.asarray(scores, dtype=np.float64)
    hits = np.asarray(hits, dtype=np.float64)
    n = scores.shape[0]
    if n < window:
        return np.zeros(0), np.zeros(0)
    view_s = np.lib.stride_tricks.sliding_window_view(scores, window)[::skip]
    view_h = np.lib.stride_tricks.sliding_window_view(hits, window)[::skip]
    return view_s.sum(axis=1), view_h.sum(axis=1)
