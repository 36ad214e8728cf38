"""Independent reference implementations used as test oracles.

Everything here is deliberately naive (plain loops, textbook DP) and shares
no code with the package paths it checks.
"""

from __future__ import annotations

import numpy as np


def mc_box_areas(a, b, n_side: int = 1000, seed: int = 0):
    """Stratified Monte-Carlo estimate of (intersection, union, enclosure).

    One jittered sample per cell of an n_side x n_side grid (n_side^2 total
    points, uniform within each cell), which keeps the area error well under
    1e-4 for page-scale boxes.
    """
    rng = np.random.default_rng(seed)
    base = (np.arange(n_side) + 0.0) / n_side
    xs = (base[:, None] + rng.random((n_side, n_side)) / n_side).reshape(-1)
    ys = (base[None, :] + rng.random((n_side, n_side)) / n_side).reshape(-1)

    def inside(box):
        return (box[0] <= xs) & (xs <= box[2]) & (box[1] <= ys) & (ys <= box[3])

    in_a = inside(a)
    in_b = inside(b)
    enclose = (
        min(a[0], b[0]),
        min(a[1], b[1]),
        max(a[2], b[2]),
        max(a[3], b[3]),
    )
    n = xs.size
    return (
        float((in_a & in_b).sum()) / n,
        float((in_a | in_b).sum()) / n,
        float(inside(enclose).sum()) / n,
    )


def edit_distance(s1: str, s2: str) -> int:
    """Classic full-matrix Levenshtein DP."""
    m, n = len(s1), len(s2)
    dp = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        dp[i][0] = i
    for j in range(n + 1):
        dp[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            dp[i][j] = min(
                dp[i - 1][j] + 1,
                dp[i][j - 1] + 1,
                dp[i - 1][j - 1] + (s1[i - 1] != s2[j - 1]),
            )
    return dp[m][n]


def bicubic_reference(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Direct (non-separated) Catmull-Rom interpolation with clamped taps."""

    def kernel(x: float) -> float:
        x = abs(x)
        if x <= 1.0:
            return 1.5 * x**3 - 2.5 * x**2 + 1.0
        if x < 2.0:
            return -0.5 * (x**3 - 5.0 * x**2 + 8.0 * x - 4.0)
        return 0.0

    h, w = src.shape
    out = np.zeros((out_h, out_w))
    for oy in range(out_h):
        sy = (oy + 0.5) * h / out_h - 0.5
        iy = int(np.floor(sy))
        fy = sy - iy
        for ox in range(out_w):
            sx = (ox + 0.5) * w / out_w - 0.5
            ix = int(np.floor(sx))
            fx = sx - ix
            acc = 0.0
            for ty in range(4):
                ry = min(max(iy - 1 + ty, 0), h - 1)
                wy = kernel(fy + 1.0 - ty)
                for tx in range(4):
                    rx = min(max(ix - 1 + tx, 0), w - 1)
                    acc += wy * kernel(fx + 1.0 - tx) * src[ry, rx]
            out[oy, ox] = acc
    return out


def area_reference(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Direct per-cell coverage-weighted mean."""
    h, w = src.shape
    out = np.zeros((out_h, out_w))
    for oy in range(out_h):
        y0, y1 = oy * h / out_h, (oy + 1) * h / out_h
        for ox in range(out_w):
            x0, x1 = ox * w / out_w, (ox + 1) * w / out_w
            total = 0.0
            for ry in range(h):
                oy_len = min(y1, ry + 1) - max(y0, ry)
                if oy_len <= 0:
                    continue
                for rx in range(w):
                    ox_len = min(x1, rx + 1) - max(x0, rx)
                    if ox_len > 0:
                        total += src[ry, rx] * oy_len * ox_len
            out[oy, ox] = total / ((y1 - y0) * (x1 - x0))
    return out


def variance_reference(img: np.ndarray, window: int) -> np.ndarray:
    """Direct windowed variance with edge truncation."""
    h, w = img.shape
    r = window // 2
    out = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            patch = img[max(0, i - r) : i + r + 1, max(0, j - r) : j + r + 1]
            out[i, j] = patch.var()
    return out
