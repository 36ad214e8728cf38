"""Pure-numpy kernels, used when the compiled extension is unavailable.

Same contracts as ``_ckern``: float64 in, float64 out, clamped sample
coordinates, truncated variance windows. Kept vectorized so the fallback
stays usable on full-page rasters.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def levenshtein(a: np.ndarray, b: np.ndarray) -> int:
    """Plain Levenshtein distance between two code-point arrays.

    Row-wise DP; the left-to-right dependency of the deletion term is
    resolved with a running-minimum over (candidate - column index).
    """
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    cols = np.arange(lb, dtype=np.int64)
    prev = np.arange(lb + 1, dtype=np.int64)
    for i in range(la):
        sub = prev[:-1] + (b != a[i])
        cand = np.minimum(sub, prev[1:] + 1)
        cur = np.minimum.accumulate(cand - cols) + cols
        cur = np.minimum(cur, (i + 2) + cols)
        prev = np.concatenate(([i + 1], cur))
    return int(prev[-1])


def _cubic_weights(dist: np.ndarray) -> np.ndarray:
    # Catmull-Rom kernel (a = -0.5).
    x = np.abs(dist)
    w = np.where(
        x <= 1.0,
        1.5 * x**3 - 2.5 * x**2 + 1.0,
        np.where(x < 2.0, -0.5 * (x**3 - 5.0 * x**2 + 8.0 * x - 4.0), 0.0),
    )
    return w


def _cubic_taps(n_src: int, n_out: int) -> tuple[np.ndarray, np.ndarray]:
    src = (np.arange(n_out) + 0.5) * (n_src / n_out) - 0.5
    base = np.floor(src).astype(np.int64)
    f = src - base
    idx = np.stack([np.clip(base - 1 + t, 0, n_src - 1) for t in range(4)], axis=1)
    wgt = np.stack([_cubic_weights(f + 1.0 - t) for t in range(4)], axis=1)
    return idx, wgt


def bicubic_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Separable Catmull-Rom resize with clamped sample coordinates."""
    src = np.ascontiguousarray(src, dtype=np.float64)
    h, w = src.shape
    ry, wy = _cubic_taps(h, out_h)
    rx, wx = _cubic_taps(w, out_w)
    # Rows first, then columns; four-tap sums accumulate left to right so the
    # result matches the compiled backend bit for bit.
    mid = wy[:, 0:1] * src[ry[:, 0]]
    for t in range(1, 4):
        mid = mid + wy[:, t : t + 1] * src[ry[:, t]]
    out = wx[None, :, 0] * mid[:, rx[:, 0]]
    for t in range(1, 4):
        out = out + wx[None, :, t] * mid[:, rx[:, t]]
    return out


def bilinear_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Two-tap separable resize, sample coordinates clamped at the edges."""
    src = np.ascontiguousarray(src, dtype=np.float64)
    h, w = src.shape

    def taps(n_src: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        c = np.clip((np.arange(n_out) + 0.5) * (n_src / n_out) - 0.5, 0.0, n_src - 1)
        i0 = c.astype(np.int64)
        i1 = np.minimum(i0 + 1, n_src - 1)
        return i0, i1, c - i0

    i0, i1, fy = taps(h, out_h)
    j0, j1, fx = taps(w, out_w)
    mid = (1.0 - fy)[:, None] * src[i0] + fy[:, None] * src[i1]
    return (1.0 - fx)[None, :] * mid[:, j0] + fx[None, :] * mid[:, j1]


def _area_matrix(n_src: int, n_out: int) -> np.ndarray:
    # Row o holds the fractional coverage of each source cell by target cell o,
    # normalized to sum to 1.
    lo = np.arange(n_out, dtype=np.int64) * n_src / n_out
    hi = (np.arange(n_out, dtype=np.int64) + 1) * n_src / n_out
    edges = np.arange(n_src + 1, dtype=np.float64)
    ov = np.minimum(hi[:, None], edges[None, 1:]) - np.maximum(lo[:, None], edges[None, :-1])
    np.clip(ov, 0.0, None, out=ov)
    return ov / (hi - lo)[:, None]

def area_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Mean over each target cell with fractional coverage weights."""
    src = np.ascontiguousarray(src, dtype=np.float64)
    h, w = src.shape
    wy = _area_matrix(h, out_h)
    wx = _area_matrix(w, out_w)
    return wy @ src @ wx.T


def local_variance(img: np.ndarray, window: int) -> np.ndarray:
    """Per-pixel variance over window x window neighborhoods, truncated at edges."""
    img = np.ascontiguousarray(img, dtype=np.float64)
    h, w = img.shape
    r = window // 2

    def window_mean(x: np.ndarray) -> np.ndarray:
        p = np.zeros((h + 1, w + 1), dtype=np.float64)
        np.cumsum(x, axis=1, out=p[1:, 1:])
        np.cumsum(p[1:, 1:], axis=0, out=p[1:, 1:])
        a = np.clip(np.arange(h) - r, 0, None)
        b = np.clip(np.arange(h) + r + 1, None, h)
        c = np.clip(np.arange(w) - r, 0, None)
        d = np.clip(np.arange(w) + r + 1, None, w)
        s = p[b[:, None], d[None, :]] - p[a[:, None], d[None, :]] \
            - p[b[:, None], c[None, :]] + p[a[:, None], c[None, :]]
        cnt = (b - a)[:, None] * (d - c)[None, :]
        return s / cnt

    var = window_mean(img * img) - window_mean(img) ** 2
    np.clip(var, 0.0, None, out=var)
    return var
