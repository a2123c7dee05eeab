# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for sifting and window scoring.

Mirrors :mod:`ousiofluct._kernels_py` function for function; the two are
checked against each other in the test suite.
"""
import numpy as np

from libc.math cimport fabs
from libc.stdlib cimport malloc, free


cdef Py_ssize_t _extrema(const double[::1] x, Py_ssize_t* maxi, Py_ssize_t* mini,
                         Py_ssize_t* nmin_out) noexcept nogil:
    # Strict interior extrema over runs of equal values; a plateau reports the
    # floor of its midpoint.
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t nmax = 0, nmin = 0
    cdef Py_ssize_t s, e
    cdef double v, prev
    if n < 3:
        nmin_out[0] = 0
        return 0
    s = 0
    while s < n - 1 and x[s + 1] == x[s]:
        s += 1
    # s is now the end of the first run, which touches the boundary
    prev = x[s]
    s += 1
    while s < n:
        e = s
        v = x[s]
        while e + 1 < n and x[e + 1] == v:
            e += 1
        if e == n - 1:
            break
        if v > prev and v > x[e + 1]:
            maxi[nmax] = (s + e) // 2
            nmax += 1
        elif v < prev and v < x[e + 1]:
            mini[nmin] = (s + e) // 2
            nmin += 1
        prev = v
        s = e + 1
    nmin_out[0] = nmin
    return nmax


cdef Py_ssize_t _zero_crossings(const double[::1] x) noexcept nogil:
    cdef Py_ssize_t i, n = x.shape[0], count = 0
    cdef int sign, last = 0
    for i in range(n):
        if x[i] > 0:
            sign = 1
        elif x[i] < 0:
            sign = -1
        else:
            continue
        if last != 0 and sign != last:
            count += 1
        last = sign
    return count


cdef int _natural_spline_eval(const double* t, const double* y, Py_ssize_t k,
                              double* out, Py_ssize_t n, double* work) noexcept nogil:
    # Natural cubic spline through (t, y), k >= 3 knots, evaluated at 0..n-1.
    # work needs 3*k doubles.
    cdef double* m = work
    cdef double* c = work + k
    cdef double* d = work + 2 * k
    cdef Py_ssize_t i, seg
    cdef double h0, h1, denom, xi, a, b, hseg
    m[0] = 0.0
    m[k - 1] = 0.0
    # Thomas algorithm on interior second derivatives m[1..k-2]
    c[0] = 0.0
    d[0] = 0.0
    for i in range(1, k - 1):
        h0 = t[i] - t[i - 1]
        h1 = t[i + 1] - t[i]
        denom = 2.0 * (h0 + h1) - h0 * c[i - 1]
        c[i] = h1 / denom
        d[i] = (6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0)
                - h0 * d[i - 1]) / denom
    for i in range(k - 2, 0, -1):
        m[i] = d[i] - c[i] * m[i + 1]
    seg = 0
    for i in range(n):
        xi = <double>i
        while seg < k - 2 and xi > t[seg + 1]:
            seg += 1
        hseg = t[seg + 1] - t[seg]
        a = t[seg + 1] - xi
        b = xi - t[seg]
        out[i] = (m[seg] * a * a * a + m[seg + 1] * b * b * b) / (6.0 * hseg) \
            + (y[seg] / hseg - m[seg] * hseg / 6.0) * a \
            + (y[seg + 1] / hseg - m[seg + 1] * hseg / 6.0) * b
    return 0


cdef int _mirrored_envelope(const double[::1] x, const Py_ssize_t* idx, Py_ssize_t cnt,
                            double* out, double* t, double* y, double* work) noexcept nogil:
    # Two extrema reflected across each end of the series.
    cdef Py_ssize_t n = x.shape[0], j, k = 0
    cdef double last = <double>(n - 1)
    t[k] = -<double>idx[1]
    y[k] = x[idx[1]]
    k += 1
    t[k] = -<double>idx[0]
    y[k] = x[idx[0]]
    k += 1
    for j in range(cnt):
        t[k] = <double>idx[j]
        y[k] = x[idx[j]]
        k += 1
    t[k] = 2.0 * last - <double>idx[cnt - 1]
    y[k] = x[idx[cnt - 1]]
    k += 1
    t[k] = 2.0 * last - <double>idx[cnt - 2]
    y[k] = x[idx[cnt - 2]]
    k += 1
    return _natural_spline_eval(t, y, k, out, n, work)


def find_extrema(x):
    """Indices of strict local maxima and minima (plateau -> floor midpoint)."""
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    maxi = np.empty(max(n, 1), dtype=np.intp)
    mini = np.empty(max(n, 1), dtype=np.intp)
    cdef Py_ssize_t[::1] mxv = maxi
    cdef Py_ssize_t[::1] mnv = mini
    cdef Py_ssize_t nmax, nmin
    nmax = _extrema(xv, &mxv[0], &mnv[0], &nmin)
    return maxi[:nmax].copy(), mini[:nmin].copy()


def count_zero_crossings(x):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    return int(_zero_crossings(xv))


def natural_spline(t, y, Py_ssize_t n):
    """Natural cubic spline through knots ``(t, y)`` sampled at ``0..n-1``."""
    cdef const double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t k = tv.shape[0]
    if k < 3:
        raise ValueError("need at least 3 knots")
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    work = np.empty(3 * k, dtype=np.float64)
    cdef double[::1] wv = work
    _natural_spline_eval(&tv[0], &yv[0], k, &ov[0], n, &wv[0])
    return out


def envelope_mean(x):
    """Mean of the mirrored natural-spline envelopes, or None if too few extrema."""
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    if n < 3:
        return None
    cdef Py_ssize_t* maxi = <Py_ssize_t*>malloc(n * sizeof(Py_ssize_t))
    cdef Py_ssize_t* mini = <Py_ssize_t*>malloc(n * sizeof(Py_ssize_t))
    cdef double* t = <double*>malloc((n + 4) * sizeof(double))
    cdef double* y = <double*>malloc((n + 4) * sizeof(double))
    cdef double* work = <double*>malloc(3 * (n + 4) * sizeof(double))
    cdef double* lower = <double*>malloc(n * sizeof(double))
    cdef Py_ssize_t nmax, nmin, i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    try:
        nmax = _extrema(xv, maxi, mini, &nmin)
        if nmax < 2 or nmin < 2:
            return None
        with nogil:
            _mirrored_envelope(xv, maxi, nmax, &ov[0], t, y, work)
            _mirrored_envelope(xv, mini, nmin, lower, t, y, work)
            for i in range(n):
                ov[i] = 0.5 * (ov[i] + lower[i])
        return out
    finally:
        free(maxi)
        free(mini)
        free(t)
        free(y)
        free(work)
        free(lower)


def sift(x, double sd_threshold=0.2, int max_sifts=100):
    """Sift one IMF out of ``x``.

    Returns ``(imf, n_sifts, converged)``.
    """
    h_arr = np.array(x, dtype=np.float64, copy=True, order="C")
    cdef double[::1] h = h_arr
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t* maxi = <Py_ssize_t*>malloc(max(n, 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t* mini = <Py_ssize_t*>malloc(max(n, 1) * sizeof(Py_ssize_t))
    cdef double* t = <double*>malloc((n + 4) * sizeof(double))
    cdef double* y = <double*>malloc((n + 4) * sizeof(double))
    cdef double* work = <double*>malloc(3 * (n + 4) * sizeof(double))
    cdef double* upper = <double*>malloc(max(n, 1) * sizeof(double))
    cdef double* lower = <double*>malloc(max(n, 1) * sizeof(double))
    cdef Py_ssize_t nmax, nmin, zc, i
    cdef int it = 0
    cdef bint converged = False
    cdef double num, den, mval
    try:
        with nogil:
            nmax = _extrema(h, maxi, mini, &nmin)
            while it < max_sifts:
                if nmax < 2 or nmin < 2:
                    zc = _zero_crossings(h)
                    converged = (nmax + nmin - zc <= 1) and (zc - nmax - nmin <= 1)
                    break
                _mirrored_envelope(h, maxi, nmax, upper, t, y, work)
                _mirrored_envelope(h, mini, nmin, lower, t, y, work)
                num = 0.0
                den = 0.0
                for i in range(n):
                    mval = 0.5 * (upper[i] + lower[i])
                    den += h[i] * h[i]
                    num += mval * mval
                    h[i] = h[i] - mval
                it += 1
                nmax = _extrema(h, maxi, mini, &nmin)
                if den == 0.0:
                    converged = True
                    break
                zc = _zero_crossings(h)
                if num / den < sd_threshold and (nmax + nmin - zc <= 1) and (zc - nmax - nmin <= 1):
                    converged = True
                    break
        return h_arr, it, bool(converged)
    finally:
        free(maxi)
        free(mini)
        free(t)
        free(y)
        free(work)
        free(upper)
        free(lower)


def window_sums(const double[::1] scores, const double[::1] hits,
                Py_ssize_t window, Py_ssize_t skip):
    """Per-window sum of token scores and lexicon hit counts.

    Windows start at 0, skip, 2*skip, ... while a full window fits.
    """
    cdef Py_ssize_t n = scores.shape[0]
    cdef Py_ssize_t nwin = 0 if n < window else (n - window) // skip + 1
    sums = np.zeros(nwin, dtype=np.float64)
    counts = np.zeros(nwin, dtype=np.float64)
    cdef double[::1] sv = sums
    cdef double[::1] cv = counts
    cdef Py_ssize_t w, i, start
    cdef double s, c
    with nogil:
        for w in range(nwin):
            start = w * skip
            s = 0.0
            c = 0.0
            for i in range(start, start + window):
                s += scores[i]
                c += hits[i]
            sv[w] = s
            cv[w] = c
    return sums, counts
