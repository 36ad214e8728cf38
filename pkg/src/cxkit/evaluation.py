"""Answer-localization and text metrics over prediction records.

Per record: ANLS / exact-match accuracy on text, and IoU, coverage
(intersection over ground-truth area), and area ratio on boxes. Records are
grouped by ANLS into correct (>= 0.75), neutral ([0.5, 0.75)), and incorrect
(< 0.5) for the category breakdown. All means are macro averages; records
without a usable box pair contribute to text metrics only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import CornerBox, area, intersection_area, union_area
from .textnorm import acc_score, anls_score

THRESHOLD_CORRECT = 0.75
THRESHOLD_NEUTRAL = 0.50


class Category(str, enum.Enum):
    CORRECT = "correct"
    NEUTRAL = "neutral"
    INCORRECT = "incorrect"


@dataclass(frozen=True)
class PredictionRecord:
    qid: str
    pred_text: str
    gt_answers: tuple[str, ...]
    pred_box: Optional[CornerBox] = None
    gt_box: Optional[CornerBox] = None

    def __post_init__(self) -> None:
        if not self.gt_answers:
            raise ValueError(f"record {self.qid!r} has no ground-truth answers")


@dataclass(frozen=True)
class CategoryStats:
    n: int
    mean_anls: Optional[float]
    iou: Optional[float]
    coverage: Optional[float]
    ar: Optional[float]


@dataclass(frozen=True)
class EvalReport:
    n: int
    acc: float
    anls: float
    iou_m: Optional[float]
    cov_m: Optional[float]
    ar_m: Optional[float]
    per_category: dict[str, CategoryStats]
    skipped: int
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "acc": self.acc,
            "anls": self.anls,
            "iou_m": self.iou_m,
            "cov_m": self.cov_m,
            "ar_m": self.ar_m,
            "per_category": {k: vars(v).copy() for k, v in self.per_category.items()},
            "skipped": self.skipped,
            "meta": dict(self.meta),
        }

    def markdown_table(self) -> str:
        def fmt(v: Optional[float]) -> str:
            return "--" if v is None else f"{v:.4f}"

        lines = [
            "| Group | N | Mean ANLS | IoU | Coverage | AR |",
            "|---|---|---|---|---|---|",
        ]
        for cat in Category:
            s = self.per_category[cat.value]
            lines.append(
                f"| {cat.value.capitalize()} | {s.n} | {fmt(s.mean_anls)} "
                f"| {fmt(s.iou)} | {fmt(s.coverage)} | {fmt(s.ar)} |"
            )
        lines.append(
            f"| Overall | {self.n} | {fmt(self.anls)} | {fmt(self.iou_m)} "
            f"| {fmt(self.cov_m)} | {fmt(self.ar_m)} |"
        )
        return "\n".join(lines)


def localization_metrics(pred: CornerBox, gt: CornerBox) -> tuple[float, float, float]:
    """Per-record (IoU, coverage, area ratio) against a ground-truth box."""
    gt_area = area(gt)
    if gt_area <= 0.0:
        raise ValueError("ground-truth box must have positive area")
    inter = intersection_area(pred, gt)
    union = union_area(pred, gt)
    iou = inter / union if union > 0.0 else 0.0
    return iou, inter / gt_area, area(pred) / gt_area


def categorize(anls: float) -> Category:
    """Map an ANLS value onto the correct/neutral/incorrect partition."""
    if anls >= THRESHOLD_CORRECT:
        return Category.CORRECT
    if anls >= THRESHOLD_NEUTRAL:
        return Category.NEUTRAL
    return Category.INCORRECT


def _mean(values: list[float]) -> Optional[float]:
    return float(np.mean(np.asarray(values))) if values else None


def evaluate(records: list[PredictionRecord], meta: Optional[dict] = None) -> EvalReport:
    """Aggregate metrics over records; order-independent by construction."""
    if not records:
        raise ValueError("no records to evaluate")
    ordered = sorted(records, key=lambda r: r.qid)

    accs: list[float] = []
    anlss: list[float] = []
    boxed: dict[str, list[tuple[float, float, float]]] = {c.value: [] for c in Category}
    cat_anls: dict[str, list[float]] = {c.value: [] for c in Category}
    skipped = 0

    for rec in ordered:
        a = anls_score(rec.pred_text, list(rec.gt_answers))
        accs.append(float(acc_score(rec.pred_text, list(rec.gt_answers))))
        anlss.append(a)
        cat = categorize(a).value
        cat_anls[cat].append(a)
        if rec.pred_box is not None and rec.gt_box is not None and area(rec.gt_box) > 0.0:
            boxed[cat].append(localization_metrics(rec.pred_box, rec.gt_box))
        else:
            skipped += 1

    all_boxed = [m for c in Category for m in boxed[c.value]]
    per_category = {
        c.value: CategoryStats(
            n=len(cat_anls[c.value]),
            mean_anls=_mean(cat_anls[c.value]),
            iou=_mean([m[0] for m in boxed[c.value]]),
            coverage=_mean([m[1] for m in boxed[c.value]]),
            ar=_mean([m[2] for m in boxed[c.value]]),
        )
        for c in Category
    }
    return EvalReport(
        n=len(ordered),
        acc=float(np.mean(np.asarray(accs))),
        anls=float(np.mean(np.asarray(anlss))),
        iou_m=_mean([m[0] for m in all_boxed]),
        cov_m=_mean([m[1] for m in all_boxed]),
        ar_m=_mean([m[2] for m in all_boxed]),
        per_category=per_category,
        skipped=skipped,
        meta=dict(meta or {}),
    )
