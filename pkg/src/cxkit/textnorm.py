"""Text transforms and similarity for answer-OCR matching and ANLS/ACC scoring.

Two transforms feed the matcher: ``norm`` (NFKC, lowercase, non-alphanumerics
to whitespace, collapsed) for general text, and ``dig`` (decimal digits only)
for numeric strings where OCR formatting differs ("1,234.00" vs "1234").
ANLS/ACC use only lowercasing and trimming, matching the standard DocVQA
evaluators rather than the matcher's stronger normalization.
"""

from __future__ import annotations

import unicodedata

from .kernels import levenshtein

_DIGITS = frozenset("0123456789")


def norm(s: str) -> str:
    """NFKC-normalize, lowercase, map non-alphanumerics to single spaces."""
    s = unicodedata.normalize("NFKC", s).lower()
    out = "".join(ch if ch.isalnum() else " " for ch in s)
    return " ".join(out.split())


def dig(s: str) -> str:
    """Keep only decimal digits, in order."""
    s = unicodedata.normalize("NFKC", s)
    return "".join(ch for ch in s if ch in _DIGITS)


def lev_sim(a: str, b: str) -> float:
    """Levenshtein similarity: 1 - d(a, b) / max(|a|, |b|, 1)."""
    return 1.0 - levenshtein(a, b) / max(len(a), len(b), 1)


def _anls_form(s: str) -> str:
    return s.lower().strip()


def anls_score(pred: str, answers: list[str]) -> float:
    """ANLS: best similarity over the answer set, zeroed below 0.5."""
    if not answers:
        raise ValueError("answer set must be non-empty")
    best = 0.0
    p = _anls_form(pred)
    for ans in answers:
        s = lev_sim(p, _anls_form(ans))
        if s >= 0.5 and s > best:
            best = s
    return best


def acc_score(pred: str, answers: list[str]) -> int:
    """Exact-match accuracy over the answer set after lowercasing and trimming."""
    if not answers:
        raise ValueError("answer set must be non-empty")
    p = _anls_form(pred)
    return int(any(p == _anls_form(ans) for ans in answers))
