"""Localization and alignment losses with analytic gradients.

Three box losses against a prior box (GIoU overlap, centre distance,
scale-invariant square-root area), the MSE heatmap-alignment loss, and the
scalar objective combiner. Every loss returns its value together with the
exact derivative w.r.t. the predicted quantities; at kinked configurations
(exactly aligned edges, coincident centres, collapsed boxes) a deterministic
one-sided subgradient is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import CentreBox
from .heatmap import Heatmap

AREA_EPS = 1e-12


@dataclass(frozen=True)
class LossWeights:
    lambda_giou: float
    lambda_centre: float
    lambda_area: float
    lambda_prior: float
    lambda_dec: float

    def __post_init__(self) -> None:
        for name, v in vars(self).items():
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and non-negative, got {v}")


@dataclass(frozen=True)
class BoxGrad:
    """Partials of a scalar loss w.r.t. the predicted centre-box fields."""

    d_cx: float
    d_cy: float
    d_w: float
    d_h: float

    def as_array(self) -> np.ndarray:
        return np.array([self.d_cx, self.d_cy, self.d_w, self.d_h])


def _corners(b: CentreBox) -> tuple[float, float, float, float]:
    # Raw affine conversion; the loss path must stay differentiable, so no
    # clipping here (valid CentreBox fields keep corners within [-0.5, 1.5]).
    return b.cx - b.w / 2.0, b.cy - b.h / 2.0, b.cx + b.w / 2.0, b.cy + b.h / 2.0


def giou_loss(pred: CentreBox, target: CentreBox) -> tuple[float, BoxGrad]:
    """1 - GIoU(pred, target), in [0, 2], with its gradient.

    The derivative flows through the corner conversion, the clamped
    intersection, the union, and the enclosing box. At exactly aligned edges
    the min/max derivative is attributed to the predicted corner.
    """
    if target.w * target.h <= 0.0:
        raise ValueError("target box must have positive area")
    px1, py1, px2, py2 = _corners(pred)
    tx1, ty1, tx2, ty2 = _corners(target)

    iw = min(px2, tx2) - max(px1, tx1)
    ih = min(py2, ty2) - max(py1, ty1)
    iwp, ihp = max(0.0, iw), max(0.0, ih)
    inter = iwp * ihp
    ap = pred.w * pred.h
    union = ap + target.w * target.h - inter
    cw = max(px2, tx2) - min(px1, tx1)
    ch = max(py2, ty2) - min(py1, ty1)
    enclose = cw * ch
    if enclose <= 0.0:
        raise ValueError("enclosing box has zero area")

    value = 2.0 - inter / union - union / enclose

    d_inter = -1.0 / union - inter / union**2 + 1.0 / enclose
    d_ap = inter / union**2 - 1.0 / enclose
    d_c = union / enclose**2

    gi_x1 = -ihp * (iw > 0.0) * (px1 >= tx1)
    gi_x2 = ihp * (iw > 0.0) * (px2 <= tx2)
    gi_y1 = -iwp * (ih > 0.0) * (py1 >= ty1)
    gi_y2 = iwp * (ih > 0.0) * (py2 <= ty2)

    gc_x1 = -ch * (px1 <= tx1)
    gc_x2 = ch * (px2 >= tx2)
    gc_y1 = -cw * (py1 <= ty1)
    gc_y2 = cw * (py2 >= ty2)

    g_x1 = d_inter * gi_x1 + d_c * gc_x1
    g_x2 = d_inter * gi_x2 + d_c * gc_x2
    g_y1 = d_inter * gi_y1 + d_c * gc_y1
    g_y2 = d_inter * gi_y2 + d_c * gc_y2

    grad = BoxGrad(
        d_cx=g_x1 + g_x2,
        d_cy=g_y1 + g_y2,
        d_w=(g_x2 - g_x1) / 2.0 + d_ap * pred.h,
        d_h=(g_y2 - g_y1) / 2.0 + d_ap * pred.w,
    )
    return value, grad


def centre_loss(pred: CentreBox, target: CentreBox) -> tuple[float, BoxGrad]:
    """Euclidean distance between box centres; gradient 0 at coincidence."""
    dx = pred.cx - target.cx
    dy = pred.cy - target.cy
    dist = math.hypot(dx, dy)
    if dist == 0.0:
        return 0.0, BoxGrad(0.0, 0.0, 0.0, 0.0)
    return dist, BoxGrad(dx / dist, dy / dist, 0.0, 0.0)


def area_loss(pred: CentreBox, target: CentreBox) -> tuple[float, BoxGrad]:
    """Square-root area-ratio loss (sqrt(Ap/At) - 1)^2.

    Invariant under scaling both boxes' sizes by a common factor; the
    derivative clamps the predicted area at 1e-12 so a collapsed prediction
    still returns a finite (one-sided) gradient.
    """
    at = target.w * target.h
    if at <= 0.0:
        raise ValueError("target box must have positive area")
    ap = pred.w * pred.h
    r = math.sqrt(ap / at)
    value = (r - 1.0) ** 2
    r_safe = math.sqrt(max(ap, AREA_EPS) / at)
    scale = (r - 1.0) / (r_safe * at)
    return value, BoxGrad(0.0, 0.0, scale * pred.h, scale * pred.w)


def question_loss(pred: Heatmap, prior: Heatmap, lambda_prior: float) -> tuple[float, np.ndarray]:
    """Weighted mean-squared error between heatmaps, with per-patch gradient."""
    if (pred.rows, pred.cols) != (prior.rows, prior.cols):
        raise ValueError(f"grid mismatch: ({pred.rows}, {pred.cols}) vs ({prior.rows}, {prior.cols})")
    diff = pred.values - prior.values
    value = lambda_prior * float(np.mean(diff**2))
    grad = 2.0 * lambda_prior * diff / pred.n_patches
    return value, grad


def total_objective(
    lq: float,
    giou: float,
    centre: float,
    area: float,
    dec_ce: float,
    w: LossWeights,
) -> float:
    """Combine the (pre-weighted) alignment loss, box losses, and decoder CE."""
    parts = (lq, giou, centre, area, dec_ce)
    if not all(math.isfinite(p) for p in parts):
        raise ValueError(f"loss components must be finite, got {parts}")
    return lq + w.lambda_giou * giou + w.lambda_centre * centre + w.lambda_area * area + w.lambda_dec * dec_ce
