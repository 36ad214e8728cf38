"""Faithfulness intervention masking of heatmaps and embeddings.

The candidate region is the overlap of the top-k sets of the predicted and
prior heatmaps (or its complement); each candidate patch is independently
zeroed by a Bernoulli draw. Draws come from a counter-based generator keyed
by (seed, qid, patch index), so results are reproducible per record and
independent of batch order or parallelism.
"""

from __future__ import annotations

import enum
import hashlib
import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .gating import EmbeddingGrid
from .heatmap import Heatmap, topk_binarize

K_TOP = 0.70


class Region(str, enum.Enum):
    OVERLAP = "overlap"
    NON_OVERLAP = "non_overlap"


@dataclass(frozen=True)
class InterventionSpec:
    region: Region
    probability: float
    mask_embeddings: bool = False
    k: float = K_TOP
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("probability must lie in [0, 1]")
        if not 0.0 < self.k <= 1.0:
            raise ValueError("k must lie in (0, 1]")


def overlap_set(pred: Heatmap, prior: Heatmap, k: float = K_TOP) -> np.ndarray:
    """Patches in the top-k of both the predicted and the prior heatmap."""
    if (pred.rows, pred.cols) != (prior.rows, prior.cols):
        raise ValueError(f"grid mismatch: ({pred.rows}, {pred.cols}) vs ({prior.rows}, {prior.cols})")
    return topk_binarize(pred, k) & topk_binarize(prior, k)


def _uniform01(seed: int, qid: str, index: int) -> float:
    key = struct.pack("<q", seed)
    digest = hashlib.blake2b(f"{qid}:{index}".encode("utf-8"), digest_size=8, key=key).digest()
    return struct.unpack("<Q", digest)[0] / 2.0**64


def apply_intervention(
    pred: Heatmap,
    prior: Heatmap,
    emb: Optional[EmbeddingGrid],
    spec: InterventionSpec,
    qid: str = "",
) -> tuple[Heatmap, Optional[EmbeddingGrid], dict]:
    """Zero candidate patches of the predicted heatmap (and embeddings).

    Returns the masked heatmap, the masked embeddings (untouched object when
    ``mask_embeddings`` is off), and a report of the selected patch indices.
    """
    candidates = overlap_set(pred, prior, spec.k)
    if spec.region is Region.NON_OVERLAP:
        candidates = ~candidates
    flat_candidates = candidates.reshape(-1)
    if emb is not None and emb.n != flat_candidates.size:
        raise ValueError(f"embedding count {emb.n} != patch count {flat_candidates.size}")

    selected = [
        int(i)
        for i in np.flatnonzero(flat_candidates)
        if _uniform01(spec.rng_seed, qid, int(i)) < spec.probability
    ]

    values = pred.values.copy().reshape(-1)
    values[selected] = 0.0
    masked = Heatmap.from_flat(pred.rows, pred.cols, values)

    masked_emb = emb
    if emb is not None and spec.mask_embeddings:
        ev = emb.values.copy()
        ev[selected, :] = 0.0
        masked_emb = EmbeddingGrid(emb.n, emb.d, ev)

    report = {
        "qid": qid,
        "region": spec.region.value,
        "probability": spec.probability,
        "selected": selected,
        "n_candidates": int(flat_candidates.sum()),
    }
    return masked, masked_emb, report
