"""Quality metrics for question-prior heatmaps against answer-box indicators.

All metrics compare a heatmap in [0, 1] with the set of patches whose centre
falls inside the ground-truth answer box: soft IoU, precision/recall at a
top-k fraction, activation sparsity, and Jensen-Shannon divergence between
the normalized heatmap and the uniform distribution over the box patches.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import CornerBox
from .heatmap import Heatmap, topk_binarize

K_EVAL = 0.30
SPARSITY_TAU = 0.01


class EmptyIndicatorWarning(UserWarning):
    """Recall was requested against an indicator with no true patches."""


@dataclass(frozen=True)
class BoxIndicator:
    """Boolean patch grid: true where the patch centre lies inside the box."""

    rows: int
    cols: int
    mask: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != (self.rows, self.cols):
            raise ValueError(f"mask shape {m.shape} != ({self.rows}, {self.cols})")
        object.__setattr__(self, "mask", m)

    @classmethod
    def from_box(cls, rows: int, cols: int, box: CornerBox) -> "BoxIndicator":
        cy = (np.arange(rows) + 0.5) / rows
        cx = (np.arange(cols) + 0.5) / cols
        inside_y = (box.y1 <= cy) & (cy <= box.y2)
        inside_x = (box.x1 <= cx) & (cx <= box.x2)
        return cls(rows, cols, inside_y[:, None] & inside_x[None, :])


def _check_dims(h: Heatmap, g: BoxIndicator) -> None:
    if (h.rows, h.cols) != (g.rows, g.cols):
        raise ValueError(f"grid mismatch: heatmap ({h.rows}, {h.cols}) vs indicator ({g.rows}, {g.cols})")


def soft_iou(h: Heatmap, g: BoxIndicator) -> float:
    """Soft IoU: sum of elementwise minima over sum of elementwise maxima."""
    _check_dims(h, g)
    gv = g.mask.astype(np.float64)
    denom = float(np.maximum(h.values, gv).sum())
    if denom <= 0.0:
        return 0.0
    return float(np.minimum(h.values, gv).sum()) / denom


def precision_recall_at_k(h: Heatmap, g: BoxIndicator, k: float = K_EVAL) -> tuple[float, float]:
    """Precision and recall of the top-k patch set against the indicator."""
    _check_dims(h, g)
    selected = topk_binarize(h, k)
    n_sel = int(selected.sum())
    n_true = int(g.mask.sum())
    hits = int((selected & g.mask).sum())
    precision = hits / n_sel if n_sel else 0.0
    if n_true == 0:
        warnings.warn("indicator has no true patches, recall set to 0", EmptyIndicatorWarning, stacklevel=2)
        return precision, 0.0
    return precision, hits / n_true


def sparsity(h: Heatmap, tau: float = SPARSITY_TAU) -> float:
    """Fraction of patches with activation strictly above tau."""
    return float((h.values > tau).mean())


def jsd(h: Heatmap, g: BoxIndicator) -> float:
    """Jensen-Shannon divergence (natural log) against uniform-over-box mass.

    The heatmap is normalized to a distribution; the reference distributes
    mass uniformly over the indicator's true patches. Bounded by ln 2,
    attained on disjoint supports.
    """
    _check_dims(h, g)
    total = float(h.values.sum())
    n_true = int(g.mask.sum())
    if total <= 0.0:
        raise ValueError("heatmap has zero mass")
    if n_true == 0:
        raise ValueError("indicator has no true patches")
    p = h.flat() / total
    q = g.mask.reshape(-1).astype(np.float64) / n_true
    m = 0.5 * (p + q)

    def kl(a: np.ndarray, b: np.ndarray) -> float:
        nz = a > 0.0
        return float(np.sum(a[nz] * np.log(a[nz] / b[nz])))

    return 0.5 * kl(p, m) + 0.5 * kl(q, m)
