"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback is selected when it
is missing or when ``CXKIT_PURE_PYTHON`` is set (used by the benchmark and
the cross-backend tests). Both backends implement the same five kernels
with matching numerics.
"""

from __future__ import annotations

import os

import numpy as np

if os.environ.get("CXKIT_PURE_PYTHON"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _ckern as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND: str = _impl.BACKEND

bicubic_resize = _impl.bicubic_resize
bilinear_resize = _impl.bilinear_resize
area_resize = _impl.area_resize
local_variance = _impl.local_variance


def _codepoints(s: str) -> np.ndarray:
    return np.frombuffer(s.encode("utf-32-le"), dtype=np.int32)


def levenshtein(a: str, b: str) -> int:
    """Edit distance (insert/delete/substitute, unit cost) between strings."""
    return int(_impl.levenshtein(_codepoints(a), _codepoints(b)))
