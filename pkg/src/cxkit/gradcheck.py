"""Finite-difference verification of the analytic box-loss gradients.

Central differences with step 1e-5 at randomly drawn non-degenerate box
pairs; pairs with nearly aligned edges are rejected so the check never
straddles a subgradient kink. The relative error is the max component
deviation normalized by the gradient's magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import CentreBox
from .losses import area_loss, centre_loss, giou_loss

FD_STEP = 1e-5
TOLERANCE = 1e-4
EDGE_GAP = 1e-3

LOSSES: dict[str, Callable[[CentreBox, CentreBox], tuple]] = {
    "giou": giou_loss,
    "centre": centre_loss,
    "area": area_loss,
}


@dataclass(frozen=True)
class GradCheckResult:
    loss: str
    n_samples: int
    max_rel_err: float
    worst_pred: tuple[float, float, float, float]
    worst_target: tuple[float, float, float, float]

    @property
    def passed(self) -> bool:
        return self.max_rel_err <= TOLERANCE


def _random_box(rng: np.random.Generator) -> CentreBox:
    w = rng.uniform(0.05, 0.6)
    h = rng.uniform(0.05, 0.6)
    cx = rng.uniform(w / 2, 1 - w / 2)
    cy = rng.uniform(h / 2, 1 - h / 2)
    return CentreBox(cx, cy, w, h)


def _edges_too_close(a: CentreBox, b: CentreBox, gap: float = EDGE_GAP) -> bool:
    ax1, ay1 = a.cx - a.w / 2, a.cy - a.h / 2
    ax2, ay2 = a.cx + a.w / 2, a.cy + a.h / 2
    bx1, by1 = b.cx - b.w / 2, b.cy - b.h / 2
    bx2, by2 = b.cx + b.w / 2, b.cy + b.h / 2
    pairs = ((ax1, bx1), (ax2, bx2), (ay1, by1), (ay2, by2), (ax1, bx2), (ax2, bx1), (ay1, by2), (ay2, by1))
    return any(abs(u - v) < gap for u, v in pairs)


def sample_pairs(n: int, seed: int) -> list[tuple[CentreBox, CentreBox]]:
    """Draw n box pairs, rejecting edge-aligned configurations."""
    rng = np.random.default_rng(seed)
    out: list[tuple[CentreBox, CentreBox]] = []
    while len(out) < n:
        pred, target = _random_box(rng), _random_box(rng)
        if not _edges_too_close(pred, target):
            out.append((pred, target))
    return out


def fd_gradient(loss_fn, pred: CentreBox, target: CentreBox, step: float = FD_STEP) -> np.ndarray:
    """Central-difference gradient of a box loss w.r.t. the predicted fields."""
    x0 = np.array(pred.as_tuple())
    grad = np.empty(4)
    for i in range(4):
        hi, lo = x0.copy(), x0.copy()
        hi[i] += step
        lo[i] -= step
        f_hi = loss_fn(CentreBox(*hi), target)[0]
        f_lo = loss_fn(CentreBox(*lo), target)[0]
        grad[i] = (f_hi - f_lo) / (2.0 * step)
    return grad


def check_loss(name: str, n_samples: int = 1000, seed: int = 0, step: float = FD_STEP) -> GradCheckResult:
    """Compare analytic vs finite-difference gradients over random pairs."""
    loss_fn = LOSSES[name]
    worst = (0.0, None, None)
    for pred, target in sample_pairs(n_samples, seed):
        _, grad = loss_fn(pred, target)
        analytic = grad.as_array()
        numeric = fd_gradient(loss_fn, pred, target, step)
        scale = max(float(np.max(np.abs(numeric))), 1e-12)
        rel = float(np.max(np.abs(analytic - numeric))) / scale
        if rel > worst[0]:
            worst = (rel, pred, target)
    rel, pred, target = worst
    if pred is None:
        pred = target = CentreBox(0.5, 0.5, 0.0, 0.0)
    return GradCheckResult(name, n_samples, rel, pred.as_tuple(), target.as_tuple())


def run_suite(n_samples: int = 1000, seed: int = 0) -> list[GradCheckResult]:
    return [check_loss(name, n_samples, seed) for name in LOSSES]
