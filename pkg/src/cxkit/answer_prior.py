"""Answer-location priors: match ground-truth answer strings to OCR lines.

Matching runs six rules in strict priority order over the document's lines:
exact match on the normalized text, exact match on the digit string,
substring containment on each transform, then fuzzy Levenshtein matching
with per-transform thresholds (0.82 for text, 0.95 for digits). A fallback
OCR engine is consulted only when the primary engine yields no match. The
selected line box is expanded (+10% in x, +15% in y by default) and clipped.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .geometry import CornerBox, _clip01
from .textnorm import dig, lev_sim, norm

TAU_TEXT = 0.82
TAU_DIG = 0.95
EXPAND_X = 0.10
EXPAND_Y = 0.15

ENGINE_PRIMARY = "primary"
ENGINE_FALLBACK = "fallback"


class MatchReason(str, enum.Enum):
    EXACT_NORM = "exact_norm"
    EXACT_DIGITS = "exact_digits"
    SUBSTRING_NORM = "substring_norm"
    SUBSTRING_DIGITS = "substring_digits"
    FUZZY_NORM = "fuzzy_norm"
    FUZZY_DIGITS = "fuzzy_digits"
    NONE = "none"


@dataclass(frozen=True)
class OcrLine:
    text: str
    box: CornerBox


@dataclass(frozen=True)
class OcrDocument:
    doc_id: str
    width_px: int
    height_px: int
    lines: tuple[OcrLine, ...]
    engine: str = ENGINE_PRIMARY

    def __post_init__(self) -> None:
        if self.width_px <= 0 or self.height_px <= 0:
            raise ValueError(f"non-positive page size for {self.doc_id!r}")
        if self.engine not in (ENGINE_PRIMARY, ENGINE_FALLBACK):
            raise ValueError(f"unknown OCR engine tag {self.engine!r}")


@dataclass(frozen=True)
class MatchResult:
    box: Optional[CornerBox]
    reason: MatchReason
    engine: Optional[str]
    score: Optional[float] = None

    def __post_init__(self) -> None:
        if (self.reason is MatchReason.NONE) != (self.box is None):
            raise ValueError("reason 'none' must pair with an absent box")


NO_MATCH = MatchResult(box=None, reason=MatchReason.NONE, engine=None, score=None)


def match_answer(
    answer: str,
    doc: OcrDocument,
    tau_text: float = TAU_TEXT,
    tau_dig: float = TAU_DIG,
) -> MatchResult:
    """Match one answer against a document's OCR lines.

    Rules are evaluated strictly in priority order; within the exact and
    substring rules the first line in document order wins, within the fuzzy
    rules the highest-scoring line above threshold wins (ties broken by
    document order). Digit rules are skipped for answers without digits;
    norm rules are skipped for answers that normalize to the empty string
    (an empty needle would trivially "occur" in every line).
    """
    if not answer:
        raise ValueError("answer must be non-empty")

    a_norm = norm(answer)
    a_dig = dig(answer)
    norms = [norm(ln.text) for ln in doc.lines]
    digs = [dig(ln.text) for ln in doc.lines]

    def first(transformed: list[str], predicate, reason: MatchReason) -> Optional[MatchResult]:
        for line, t in zip(doc.lines, transformed):
            if predicate(t):
                return MatchResult(box=line.box, reason=reason, engine=doc.engine)
        return None

    def fuzzy(transformed: list[str], needle: str, tau: float, reason: MatchReason) -> Optional[MatchResult]:
        best_i, best_s = -1, 0.0
        for i, t in enumerate(transformed):
            s = lev_sim(needle, t)
            if s >= tau and s > best_s:
                best_i, best_s = i, s
        if best_i < 0:
            return None
        return MatchResult(box=doc.lines[best_i].box, reason=reason, engine=doc.engine, score=best_s)

    if a_norm:
        hit = first(norms, lambda t: t == a_norm, MatchReason.EXACT_NORM)
        if hit:
            return hit
    if a_dig:
        hit = first(digs, lambda t: t == a_dig, MatchReason.EXACT_DIGITS)
        if hit:
            return hit
    if a_norm:
        hit = first(norms, lambda t: a_norm in t, MatchReason.SUBSTRING_NORM)
        if hit:
            return hit
    if a_dig:
        hit = first(digs, lambda t: a_dig in t, MatchReason.SUBSTRING_DIGITS)
        if hit:
            return hit
    if a_norm:
        hit = fuzzy(norms, a_norm, tau_text, MatchReason.FUZZY_NORM)
        if hit:
            return hit
    if a_dig:
        hit = fuzzy(digs, a_dig, tau_dig, MatchReason.FUZZY_DIGITS)
        if hit:
            return hit
    return NO_MATCH


def generate_prior(
    answer: str,
    primary_doc: OcrDocument,
    fallback_doc: Optional[OcrDocument] = None,
    tau_text: float = TAU_TEXT,
    tau_dig: float = TAU_DIG,
) -> MatchResult:
    """Match against the primary engine, falling back to the backup engine."""
    result = match_answer(answer, primary_doc, tau_text, tau_dig)
    if result.reason is not MatchReason.NONE or fallback_doc is None:
        return result
    return match_answer(answer, fallback_doc, tau_text, tau_dig)


def expand_box(b: CornerBox, fx: float = EXPAND_X, fy: float = EXPAND_Y) -> CornerBox:
    """Grow width by (1+fx) and height by (1+fy) about the centre, then clip."""
    dx = (b.x2 - b.x1) * fx / 2.0
    dy = (b.y2 - b.y1) * fy / 2.0
    return CornerBox(
        _clip01(b.x1 - dx),
        _clip01(b.y1 - dy),
        _clip01(b.x2 + dx),
        _clip01(b.y2 + dy),
    )
