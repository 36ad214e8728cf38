"""Box primitives in relative page coordinates.

Two representations: corner form (x1, y1, x2, y2) and centre form
(cx, cy, w, h), all coordinates unitless fractions of the page in [0, 1].
Conversions clip silently so every derived box stays a valid page region.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass


class DegenerateBoxWarning(UserWarning):
    """Overlap metric was requested for a zero-area configuration."""


def _clip01(v: float) -> float:
    return 0.0 if v < 0.0 else 1.0 if v > 1.0 else v


@dataclass(frozen=True)
class CornerBox:
    """Axis-aligned box as corners, 0 <= x1 <= x2 <= 1 and 0 <= y1 <= y2 <= 1."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.x1 <= self.x2 <= 1.0 and 0.0 <= self.y1 <= self.y2 <= 1.0):
            raise ValueError(f"invalid corner box {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1


@dataclass(frozen=True)
class CentreBox:
    """Axis-aligned box as centre plus size, each field in [0, 1]."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        vals = (self.cx, self.cy, self.w, self.h)
        if not all(0.0 <= v <= 1.0 for v in vals):
            raise ValueError(f"invalid centre box {vals}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.cx, self.cy, self.w, self.h)


def to_corner(b: CentreBox) -> CornerBox:
    """Centre form to corner form, clipped to the page."""
    return CornerBox(
        _clip01(b.cx - b.w / 2.0),
        _clip01(b.cy - b.h / 2.0),
        _clip01(b.cx + b.w / 2.0),
        _clip01(b.cy + b.h / 2.0),
    )


def to_centre(b: CornerBox) -> CentreBox:
    """Corner form to centre form (exact, no clipping needed)."""
    return CentreBox(
        (b.x1 + b.x2) / 2.0,
        (b.y1 + b.y2) / 2.0,
        b.x2 - b.x1,
        b.y2 - b.y1,
    )


def area(b: CornerBox) -> float:
    return (b.x2 - b.x1) * (b.y2 - b.y1)


def intersection_area(a: CornerBox, b: CornerBox) -> float:
    """Overlap area; 0 when the boxes are disjoint or only touch."""
    ow = min(a.x2, b.x2) - max(a.x1, b.x1)
    oh = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ow <= 0.0 or oh <= 0.0:
        return 0.0
    return ow * oh


def union_area(a: CornerBox, b: CornerBox) -> float:
    return area(a) + area(b) - intersection_area(a, b)


def enclosing_area(a: CornerBox, b: CornerBox) -> float:
    return (max(a.x2, b.x2) - min(a.x1, b.x1)) * (max(a.y2, b.y2) - min(a.y1, b.y1))


def iou(a: CornerBox, b: CornerBox) -> float:
    """Intersection over union; a zero-area pair yields 0 with a warning."""
    union = union_area(a, b)
    if union <= 0.0:
        warnings.warn("IoU of two zero-area boxes, returning 0", DegenerateBoxWarning, stacklevel=2)
        return 0.0
    return intersection_area(a, b) / union


def giou(a: CornerBox, b: CornerBox) -> float:
    """Generalized IoU: IoU minus the empty fraction of the enclosing box.

    Ranges over [-1, 1]; equals IoU when the enclosing box is fully covered
    by the union. A pair of zero-area boxes yields 0 with a warning.
    """
    if area(a) <= 0.0 and area(b) <= 0.0:
        warnings.warn("GIoU of two zero-area boxes, returning 0", DegenerateBoxWarning, stacklevel=2)
        return 0.0
    union = union_area(a, b)
    enclose = enclosing_area(a, b)
    base = intersection_area(a, b) / union if union > 0.0 else 0.0
    return base - (enclose - union) / enclose
