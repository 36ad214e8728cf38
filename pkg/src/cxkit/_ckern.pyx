# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: edit distance, separable resampling, windowed variance.

Mirrors the pure-numpy implementations in ``_kernels_py``; ``kernels``
selects between the two at import time.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def levenshtein(const cnp.int32_t[::1] a, const cnp.int32_t[::1] b):
    """Plain Levenshtein distance between two code-point arrays."""
    cdef Py_ssize_t la = a.shape[0]
    cdef Py_ssize_t lb = b.shape[0]
    if la == 0:
        return lb
    if lb == 0:
        return la
    cdef cnp.ndarray[cnp.int64_t, ndim=1] prev_arr = np.arange(lb + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cur_arr = np.empty(lb + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] prev = prev_arr
    cdef cnp.int64_t[::1] cur = cur_arr
    cdef cnp.int64_t[::1] tmp
    cdef Py_ssize_t i, j
    cdef cnp.int64_t sub, ins, dele, best
    cdef cnp.int32_t ca
    for i in range(la):
        ca = a[i]
        cur[0] = i + 1
        for j in range(lb):
            sub = prev[j] + (ca != b[j])
            ins = prev[j + 1] + 1
            dele = cur[j] + 1
            best = sub
            if ins < best:
                best = ins
            if dele < best:
                best = dele
            cur[j + 1] = best
        tmp = prev
        prev = cur
        cur = tmp
    return prev[lb]


cdef inline double _cubic_weight(double x) nogil:
    # Catmull-Rom kernel (a = -0.5).
    if x < 0.0:
        x = -x
    if x <= 1.0:
        return 1.5 * x * x * x - 2.5 * x * x + 1.0
    if x < 2.0:
        return -0.5 * (x * x * x - 5.0 * x * x + 8.0 * x - 4.0)
    return 0.0


cdef inline double _floor(double x) nogil:
    cdef Py_ssize_t i = <Py_ssize_t> x
    if x < 0.0 and x != <double> i:
        i -= 1
    return <double> i


cdef void _cubic_taps(Py_ssize_t n_src, Py_ssize_t n_out,
                      cnp.int64_t[:, ::1] idx, double[:, ::1] wgt) nogil:
    cdef Py_ssize_t o, t, base, k
    cdef double scale = <double> n_src / <double> n_out
    cdef double src, f
    for o in range(n_out):
        src = (o + 0.5) * scale - 0.5
        base = <Py_ssize_t> _floor(src)
        f = src - base
        for t in range(4):
            k = base - 1 + t
            if k < 0:
                k = 0
            elif k > n_src - 1:
                k = n_src - 1
            idx[o, t] = k
            wgt[o, t] = _cubic_weight(f + 1.0 - t)


def bicubic_resize(double[:, ::1] src, Py_ssize_t out_h, Py_ssize_t out_w):
    """Separable Catmull-Rom resize with clamped sample coordinates."""
    cdef Py_ssize_t h = src.shape[0]
    cdef Py_ssize_t w = src.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=2] ry_arr = np.empty((out_h, 4), dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] wy_arr = np.empty((out_h, 4), dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] rx_arr = np.empty((out_w, 4), dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] wx_arr = np.empty((out_w, 4), dtype=np.float64)
    cdef cnp.int64_t[:, ::1] ry = ry_arr
    cdef double[:, ::1] wy = wy_arr
    cdef cnp.int64_t[:, ::1] rx = rx_arr
    cdef double[:, ::1] wx = wx_arr
    _cubic_taps(h, out_h, ry, wy)
    _cubic_taps(w, out_w, rx, wx)

    # Rows first, then columns; term order matches the numpy backend.
    cdef cnp.ndarray[cnp.float64_t, ndim=2] mid_arr = np.empty((out_h, w), dtype=np.float64)
    cdef double[:, ::1] mid = mid_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((out_h, out_w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double acc
    with nogil:
        for i in range(out_h):
            for j in range(w):
                acc = wy[i, 0] * src[ry[i, 0], j]
                acc = acc + wy[i, 1] * src[ry[i, 1], j]
                acc = acc + wy[i, 2] * src[ry[i, 2], j]
                acc = acc + wy[i, 3] * src[ry[i, 3], j]
                mid[i, j] = acc
        for i in range(out_h):
            for j in range(out_w):
                acc = wx[j, 0] * mid[i, rx[j, 0]]
                acc = acc + wx[j, 1] * mid[i, rx[j, 1]]
                acc = acc + wx[j, 2] * mid[i, rx[j, 2]]
                acc = acc + wx[j, 3] * mid[i, rx[j, 3]]
                out[i, j] = acc
    return out_arr


def bilinear_resize(double[:, ::1] src, Py_ssize_t out_h, Py_ssize_t out_w):
    """Two-tap separable resize, sample coordinates clamped at the edges."""
    cdef Py_ssize_t h = src.shape[0]
    cdef Py_ssize_t w = src.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] mid_arr = np.empty((out_h, w), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((out_h, out_w), dtype=np.float64)
    cdef double[:, ::1] mid = mid_arr
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, i0, i1, j0, j1
    cdef double sy = <double> h / <double> out_h
    cdef double sx = <double> w / <double> out_w
    cdef double src_c, f
    with nogil:
        for i in range(out_h):
            src_c = (i + 0.5) * sy - 0.5
            if src_c < 0.0:
                src_c = 0.0
            elif src_c > h - 1:
                src_c = h - 1
            i0 = <Py_ssize_t> src_c
            i1 = i0 + 1 if i0 + 1 < h else h - 1
            f = src_c - i0
            for j in range(w):
                mid[i, j] = (1.0 - f) * src[i0, j] + f * src[i1, j]
        for j in range(out_w):
            src_c = (j + 0.5) * sx - 0.5
            if src_c < 0.0:
                src_c = 0.0
            elif src_c > w - 1:
                src_c = w - 1
            j0 = <Py_ssize_t> src_c
            j1 = j0 + 1 if j0 + 1 < w else w - 1
            f = src_c - j0
            for i in range(out_h):
                out[i, j] = (1.0 - f) * mid[i, j0] + f * mid[i, j1]
    return out_arr


def area_resize(double[:, ::1] src, Py_ssize_t out_h, Py_ssize_t out_w):
    """Mean over each target cell with fractional coverage weights."""
    cdef Py_ssize_t h = src.shape[0]
    cdef Py_ssize_t w = src.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] mid_arr = np.zeros((out_h, w), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.zeros((out_h, out_w), dtype=np.float64)
    cdef double[:, ::1] mid = mid_arr
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k, k0, k1
    cdef double lo, hi, ov, cell
    with nogil:
        for i in range(out_h):
            lo = (<double> (i * h)) / <double> out_h
            hi = (<double> ((i + 1) * h)) / <double> out_h
            cell = hi - lo
            k0 = <Py_ssize_t> lo
            if k0 > h - 1:
                k0 = h - 1
            k1 = <Py_ssize_t> hi
            if hi == <double> k1:
                k1 -= 1
            if k1 > h - 1:
                k1 = h - 1
            for k in range(k0, k1 + 1):
                ov = (hi if hi < k + 1 else <double> (k + 1)) - (lo if lo > k else <double> k)
                if ov <= 0.0:
                    continue
                for j in range(w):
                    mid[i, j] += src[k, j] * (ov / cell)
        for j in range(out_w):
            lo = (<double> (j * w)) / <double> out_w
            hi = (<double> ((j + 1) * w)) / <double> out_w
            cell = hi - lo
            k0 = <Py_ssize_t> lo
            if k0 > w - 1:
                k0 = w - 1
            k1 = <Py_ssize_t> hi
            if hi == <double> k1:
                k1 -= 1
            if k1 > w - 1:
                k1 = w - 1
            for k in range(k0, k1 + 1):
                ov = (hi if hi < k + 1 else <double> (k + 1)) - (lo if lo > k else <double> k)
                if ov <= 0.0:
                    continue
                for i in range(out_h):
                    out[i, j] += mid[i, k] * (ov / cell)
    return out_arr


def local_variance(double[:, ::1] img, Py_ssize_t window):
    """Per-pixel variance over window x window neighborhoods, truncated at edges."""
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    cdef Py_ssize_t r = window // 2
    cdef cnp.ndarray[cnp.float64_t, ndim=2] s1_arr = np.zeros((h + 1, w + 1), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] s2_arr = np.zeros((h + 1, w + 1), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] s1 = s1_arr
    cdef double[:, ::1] s2 = s2_arr
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, a, b, c, d
    cdef double v, cnt, m1, m2, var
    with nogil:
        # Prefix sums: along rows first, then down columns (matches numpy order).
        for i in range(h):
            for j in range(w):
                v = img[i, j]
                s1[i + 1, j + 1] = s1[i + 1, j] + v
                s2[i + 1, j + 1] = s2[i + 1, j] + v * v
        for i in range(1, h + 1):
            for j in range(1, w + 1):
                s1[i, j] = s1[i, j] + s1[i - 1, j]
                s2[i, j] = s2[i, j] + s2[i - 1, j]
        for i in range(h):
            a = i - r
            if a < 0:
                a = 0
            b = i + r + 1
            if b > h:
                b = h
            for j in range(w):
                c = j - r
                if c < 0:
                    c = 0
                d = j + r + 1
                if d > w:
                    d = w
                cnt = <double> ((b - a) * (d - c))
                m1 = (s1[b, d] - s1[a, d] - s1[b, c] + s1[a, c]) / cnt
                m2 = (s2[b, d] - s2[a, d] - s2[b, c] + s2[a, c]) / cnt
                var = m2 - m1 * m1
                out[i, j] = var if var > 0.0 else 0.0
    return out_arr
