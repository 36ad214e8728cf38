"""Patch-grid heatmaps: retriever-score aggregation, resampling, post-processing.

The question-prior pipeline aggregates a token-by-patch similarity matrix to
one relevance score per patch (max over tokens), resamples it onto the
backbone's aspect-ratio-dependent patch grid via pixel space (bicubic up,
area-weighted down), and then cleans it up: appearance-variance weighting,
min-max normalization, and suppression of a thin page border.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels

PATCH_BUDGET = 512
VARIANCE_WINDOW = 15
BORDER_FRAC = 0.07

# Variance below this is floating-point dust from the windowed-sum
# computation, far under the quantization floor of 8-bit pages (~6e-8);
# treat it as an all-flat page.
_VARIANCE_DUST = 1e-12


@dataclass(frozen=True)
class Heatmap:
    """Non-negative relevance values on a rows x cols patch grid."""

    rows: int
    cols: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid dims must be positive")
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.rows, self.cols):
            raise ValueError(f"values shape {v.shape} != ({self.rows}, {self.cols})")
        if not np.all(np.isfinite(v)) or np.any(v < 0.0):
            raise ValueError("heatmap values must be finite and non-negative")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_flat(cls, rows: int, cols: int, flat: np.ndarray) -> "Heatmap":
        return cls(rows, cols, np.asarray(flat, dtype=np.float64).reshape(rows, cols))

    @property
    def n_patches(self) -> int:
        return self.rows * self.cols

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


@dataclass(frozen=True)
class SimilarityMatrix:
    """Token-level scores against a rows x cols patch grid, token-major."""

    n_tokens: int
    rows: int
    cols: int
    scores: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.n_tokens < 1 or self.rows < 1 or self.cols < 1:
            raise ValueError("similarity matrix dims must be positive")
        s = np.asarray(self.scores, dtype=np.float64).reshape(self.n_tokens, self.rows * self.cols)
        if not np.all(np.isfinite(s)):
            raise ValueError("similarity scores must be finite")
        object.__setattr__(self, "scores", s)


@dataclass(frozen=True)
class GrayImage:
    """Single-channel page raster with luminance in [0, 1]."""

    height: int
    width: int
    pixels: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        p = np.asarray(self.pixels, dtype=np.float64)
        if p.shape != (self.height, self.width):
            raise ValueError(f"pixel shape {p.shape} != ({self.height}, {self.width})")
        if not np.all(np.isfinite(p)):
            raise ValueError("pixel values must be finite")
        object.__setattr__(self, "pixels", p)


def aggregate_max(sim: SimilarityMatrix) -> Heatmap:
    """Per-patch relevance: maximum over question tokens, clamped at 0."""
    agg = np.max(sim.scores, axis=0)
    np.clip(agg, 0.0, None, out=agg)
    return Heatmap.from_flat(sim.rows, sim.cols, agg)


def patch_grid_for(width_px: int, height_px: int, budget: int = PATCH_BUDGET) -> tuple[int, int]:
    """Grid dimensions for a page: aspect-ratio split of the patch budget."""
    if width_px < 1 or height_px < 1 or budget < 1:
        raise ValueError("page dims and budget must be positive")
    cols = max(1, int(math.floor(math.sqrt(budget * width_px / height_px) + 0.5)))
    rows = max(1, budget // cols)
    while rows * cols > budget and cols > 1:
        cols -= 1
        rows = max(1, budget // cols)
    return rows, cols


def resample(h: Heatmap, page: tuple[int, int], target: tuple[int, int]) -> Heatmap:
    """Move a heatmap onto another grid through pixel space.

    Bicubic (Catmull-Rom) upsampling to the page's pixel resolution, then
    area-weighted downsampling to the target grid. Bicubic undershoot is
    clamped at 0; constants pass through unchanged.
    """
    page_h, page_w = page
    rows, cols = target
    if min(page_h, page_w, rows, cols) < 1:
        raise ValueError("page and target dims must be positive")
    px = kernels.bicubic_resize(h.values, page_h, page_w)
    out = kernels.area_resize(px, rows, cols)
    np.clip(out, 0.0, None, out=out)
    return Heatmap(rows, cols, out)


def postprocess(
    h: Heatmap,
    page: GrayImage,
    window: int = VARIANCE_WINDOW,
    border_frac: float = BORDER_FRAC,
) -> Heatmap:
    """Clean a patch heatmap using the page raster it is aligned with.

    Three steps: (1) down-weight patches over flat page regions using local
    appearance variance in window x window pixel neighborhoods, mean-pooled
    to the patch grid and scaled by its max; (2) min-max normalize to [0, 1]
    (a constant map collapses to all zeros); (3) zero every patch whose
    centre lies within ``border_frac`` of a page edge.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError("variance window must be odd and >= 1")
    values = h.values.copy()

    var = kernels.local_variance(page.pixels, window)
    weights = kernels.area_resize(var, h.rows, h.cols)
    peak = float(weights.max())
    if peak > _VARIANCE_DUST:
        values *= weights / peak

    lo, hi = float(values.min()), float(values.max())
    if hi > lo:
        values = (values - lo) / (hi - lo)
    else:
        values = np.zeros_like(values)

    cy = (np.arange(h.rows) + 0.5) / h.rows
    cx = (np.arange(h.cols) + 0.5) / h.cols
    edge_y = np.minimum(cy, 1.0 - cy) < border_frac
    edge_x = np.minimum(cx, 1.0 - cx) < border_frac
    values[edge_y, :] = 0.0
    values[:, edge_x] = 0.0
    return Heatmap(h.rows, h.cols, values)


def topk_count(n_patches: int, k: float) -> int:
    """Number of patches selected by a top-k fraction: ceil(k * P)."""
    if not 0.0 < k <= 1.0:
        raise ValueError("k must be in (0, 1]")
    # round() guards against float fuzz making k * P fractionally exceed an
    # exact integer product (e.g. 0.7 * 10).
    return min(n_patches, max(1, math.ceil(round(k * n_patches, 9))))


def topk_binarize(h: Heatmap, k: float) -> np.ndarray:
    """Boolean grid marking the ceil(k * P) largest values.

    Ties are broken toward the smaller row-major index, so the selection is
    deterministic and monotone: raising a marked value never unmarks it.
    """
    n = topk_count(h.n_patches, k)
    order = np.argsort(-h.flat(), kind="stable")
    mask = np.zeros(h.n_patches, dtype=bool)
    mask[order[:n]] = True
    return mask.reshape(h.rows, h.cols)
