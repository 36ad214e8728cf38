"""Decoder conditioning operators on raster pages and patch grids.

Two re-encoding strategies modify pixels given a predicted answer box
(mask everything outside, or crop-and-stretch to full size), and two
token-level strategies derive patch masks for the decoder's cross-attention
(Gaussian-decay pruning binarized at the median, and hard centre-in-box
attention masking).

Relative box coordinates are mapped to pixels with floor on low edges and
ceil on high edges, so a box never loses pixels it covers; zero-area boxes
cover no pixels.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .geometry import CentreBox, CornerBox

DEFAULT_FILL = 1.0


class EmptyMaskWarning(UserWarning):
    """A patch mask came out empty and the nearest-patch fallback was used."""


@dataclass(frozen=True)
class RasterPage:
    """Page raster with 1 or 3 channels, pixel values in [0, 1], shape (h, w, c)."""

    height: int
    width: int
    channels: int
    pixels: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.channels not in (1, 3):
            raise ValueError("channels must be 1 or 3")
        p = np.asarray(self.pixels, dtype=np.float64)
        if p.shape != (self.height, self.width, self.channels):
            raise ValueError(f"pixel shape {p.shape} != ({self.height}, {self.width}, {self.channels})")
        if not np.all(np.isfinite(p)):
            raise ValueError("pixel values must be finite")
        object.__setattr__(self, "pixels", p)


@dataclass(frozen=True)
class PatchMask:
    rows: int
    cols: int
    mask: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != (self.rows, self.cols):
            raise ValueError(f"mask shape {m.shape} != ({self.rows}, {self.cols})")
        object.__setattr__(self, "mask", m)


def _pixel_bounds(b: CornerBox, height: int, width: int) -> tuple[int, int, int, int] | None:
    """Covered pixel range [r0, r1) x [c0, c1); None for a zero-area box."""
    if b.x2 <= b.x1 or b.y2 <= b.y1:
        return None
    c0 = int(math.floor(b.x1 * width))
    c1 = int(math.ceil(b.x2 * width))
    r0 = int(math.floor(b.y1 * height))
    r1 = int(math.ceil(b.y2 * height))
    return max(0, r0), min(height, r1), max(0, c0), min(width, c1)


def mask_reencode(x: RasterPage, b: CornerBox, fill: float = DEFAULT_FILL) -> RasterPage:
    """Keep pixels inside the box, set everything else to the fill value."""
    bounds = _pixel_bounds(b, x.height, x.width)
    out = np.full_like(x.pixels, fill)
    if bounds is not None:
        r0, r1, c0, c1 = bounds
        out[r0:r1, c0:c1, :] = x.pixels[r0:r1, c0:c1, :]
    return RasterPage(x.height, x.width, x.channels, out)


def crop_reencode(x: RasterPage, b: CornerBox) -> RasterPage:
    """Crop the box region and stretch it back to the page size (bilinear)."""
    bounds = _pixel_bounds(b, x.height, x.width)
    if bounds is None:
        raise ValueError("crop region covers no pixels")
    r0, r1, c0, c1 = bounds
    if r1 <= r0 or c1 <= c0:
        raise ValueError("crop region covers no pixels")
    planes = [
        kernels.bilinear_resize(np.ascontiguousarray(x.pixels[r0:r1, c0:c1, c]), x.height, x.width)
        for c in range(x.channels)
    ]
    return RasterPage(x.height, x.width, x.channels, np.stack(planes, axis=-1))


def _patch_centres(rows: int, cols: int) -> tuple[np.ndarray, np.ndarray]:
    cy = (np.arange(rows) + 0.5) / rows
    cx = (np.arange(cols) + 0.5) / cols
    return cy, cx


def token_prune_mask(grid: tuple[int, int], b: CentreBox) -> PatchMask:
    """Gaussian-decay patch weights from the box centre, cut at the median.

    Sigma per axis is half the box extent with a one-patch floor. The cut
    keeps weights strictly above the lower median; if ties or an odd patch
    count leave fewer than ceil(P/2) patches, the cut relaxes to >= so at
    least half the grid always survives.
    """
    rows, cols = grid
    if b.w <= 0.0 or b.h <= 0.0:
        raise ValueError("box must have positive size")
    cy, cx = _patch_centres(rows, cols)
    sx = max(b.w / 2.0, 1.0 / cols)
    sy = max(b.h / 2.0, 1.0 / rows)
    wx = (cx - b.cx) ** 2 / (2.0 * sx**2)
    wy = (cy - b.cy) ** 2 / (2.0 * sy**2)
    weights = np.exp(-(wy[:, None] + wx[None, :]))
    flat = weights.reshape(-1)
    median = np.sort(flat)[(flat.size - 1) // 2]
    mask = flat > median
    if int(mask.sum()) < math.ceil(flat.size / 2):
        mask = flat >= median
    return PatchMask(rows, cols, mask.reshape(rows, cols))


def attention_mask(grid: tuple[int, int], b: CornerBox) -> PatchMask:
    """True for patches whose centre lies inside the box.

    An all-false result is flagged and replaced by the single patch nearest
    the box centre, so the decoder always keeps at least one patch.
    """
    rows, cols = grid
    cy, cx = _patch_centres(rows, cols)
    inside = ((b.y1 <= cy) & (cy <= b.y2))[:, None] & ((b.x1 <= cx) & (cx <= b.x2))[None, :]
    if not inside.any():
        warnings.warn("box contains no patch centre, enabling nearest patch", EmptyMaskWarning, stacklevel=2)
        bx, by = (b.x1 + b.x2) / 2.0, (b.y1 + b.y2) / 2.0
        dist = (cy - by)[:, None] ** 2 + (cx - bx)[None, :] ** 2
        inside = np.zeros((rows, cols), dtype=bool)
        inside.reshape(-1)[int(np.argmin(dist))] = True
    return PatchMask(rows, cols, inside)
