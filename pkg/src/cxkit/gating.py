"""Mask-conditioned embedding gates.

Four variants modulate patch embeddings with a relevance mask in [0, 1]:
global linear interpolation, residual mixing through a learned transform,
normalized spatial attention, and feature-wise affine modulation. The MLPs
run with fixed supplied weights (or a seeded test initializer) in inference
mode, so identical inputs give bit-identical outputs.
"""

from __future__ import annotations

import base64
import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.special import erf

DEFAULT_ALPHA = 0.1
DEFAULT_EPSILON = 1e-6


class GateVariant(str, enum.Enum):
    LINEAR = "linear"
    RESIDUAL = "residual"
    SPATIAL_ATTENTION = "spatial_attention"
    FILM = "film"


@dataclass(frozen=True)
class EmbeddingGrid:
    """n patch embeddings of dimension d."""

    n: int
    d: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.n, self.d):
            raise ValueError(f"embedding shape {v.shape} != ({self.n}, {self.d})")
        if not np.all(np.isfinite(v)):
            raise ValueError("embedding values must be finite")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class MlpWeights:
    """Two-layer perceptron weights: out = W2 @ gelu(W1 @ x + b1) + b2."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def __post_init__(self) -> None:
        for name in ("w1", "b1", "w2", "b2"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        h, _ = self.w1.shape
        d_out, h2 = self.w2.shape
        if h != h2 or self.b1.shape != (h,) or self.b2.shape != (d_out,):
            raise ValueError("inconsistent MLP weight shapes")

    def apply(self, x: np.ndarray) -> np.ndarray:
        hidden = _gelu(x @ self.w1.T + self.b1)
        return hidden @ self.w2.T + self.b2

    @classmethod
    def seeded(cls, d_in: int, hidden: int, d_out: int, rng: np.random.Generator) -> "MlpWeights":
        def layer(fan_in: int, fan_out: int) -> tuple[np.ndarray, np.ndarray]:
            bound = 1.0 / math.sqrt(fan_in)
            w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
            b = rng.uniform(-bound, bound, size=fan_out)
            return w, b

        w1, b1 = layer(d_in, hidden)
        w2, b2 = layer(hidden, d_out)
        return cls(w1, b1, w2, b2)

    @classmethod
    def zeros(cls, d_in: int, hidden: int, d_out: int) -> "MlpWeights":
        return cls(
            np.zeros((hidden, d_in)),
            np.zeros(hidden),
            np.zeros((d_out, hidden)),
            np.zeros(d_out),
        )


def _gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x / math.sqrt(2.0)))


@dataclass(frozen=True)
class GateParams:
    variant: GateVariant
    alpha: float = DEFAULT_ALPHA
    epsilon: float = DEFAULT_EPSILON
    seed: int = 0
    residual_mlp: Optional[MlpWeights] = None
    film_gamma: Optional[MlpWeights] = None
    film_beta: Optional[MlpWeights] = None

    @classmethod
    def seeded(
        cls,
        variant: GateVariant | str,
        d: int,
        hidden: Optional[int] = None,
        alpha: float = DEFAULT_ALPHA,
        epsilon: float = DEFAULT_EPSILON,
        seed: int = 0,
    ) -> "GateParams":
        """Build params with the deterministic test initializer.

        Hidden width defaults to d for both the residual transform and the
        FiLM heads. Draw order is fixed (residual, then gamma, then beta) so
        a seed fully determines every weight.
        """
        variant = GateVariant(variant)
        hidden = d if hidden is None else hidden
        rng = np.random.default_rng(seed)
        residual = film_gamma = film_beta = None
        if variant is GateVariant.RESIDUAL:
            residual = MlpWeights.seeded(d, hidden, d, rng)
        elif variant is GateVariant.FILM:
            film_gamma = MlpWeights.seeded(1, hidden, d, rng)
            film_beta = MlpWeights.seeded(1, hidden, d, rng)
        return cls(variant, alpha, epsilon, seed, residual, film_gamma, film_beta)

    @classmethod
    def film_zeros(cls, d: int, hidden: Optional[int] = None) -> "GateParams":
        """FiLM params with all-zero MLPs (the identity modulation)."""
        hidden = d if hidden is None else hidden
        return cls(
            GateVariant.FILM,
            film_gamma=MlpWeights.zeros(1, hidden, d),
            film_beta=MlpWeights.zeros(1, hidden, d),
        )


def gate(e: EmbeddingGrid, m: np.ndarray, p: GateParams) -> EmbeddingGrid:
    """Apply a gating variant to embeddings under a per-patch mask.

    The mask must hold n values in [0, 1]; it is broadcast across the
    feature dimension.
    """
    m = np.asarray(m, dtype=np.float64).reshape(-1)
    if m.shape[0] != e.n:
        raise ValueError(f"mask length {m.shape[0]} != patch count {e.n}")
    if np.any(m < 0.0) or np.any(m > 1.0) or not np.all(np.isfinite(m)):
        raise ValueError("mask values must lie in [0, 1]")
    col = m[:, None]

    if p.variant is GateVariant.LINEAR:
        out = e.values * (p.alpha * col + (1.0 - p.alpha))
    elif p.variant is GateVariant.RESIDUAL:
        if p.residual_mlp is None:
            raise ValueError("residual gate requires MLP weights")
        transformed = p.residual_mlp.apply(e.values)
        out = col * transformed + (1.0 - col) * e.values
    elif p.variant is GateVariant.SPATIAL_ATTENTION:
        attn = m / (float(m.sum()) + p.epsilon)
        out = e.values * (1.0 + p.alpha * attn[:, None])
    elif p.variant is GateVariant.FILM:
        if p.film_gamma is None or p.film_beta is None:
            raise ValueError("film gate requires gamma and beta MLP weights")
        gamma = p.film_gamma.apply(col)
        beta = p.film_beta.apply(col)
        out = e.values * (1.0 + gamma) + beta
    else:  # pragma: no cover
        raise ValueError(f"unknown gate variant {p.variant}")
    return EmbeddingGrid(e.n, e.d, out)


def _encode(a: np.ndarray) -> dict:
    return {
        "shape": list(a.shape),
        "data": base64.b64encode(np.ascontiguousarray(a, dtype="<f4").tobytes()).decode("ascii"),
    }


def _decode(obj: dict) -> np.ndarray:
    raw = np.frombuffer(base64.b64decode(obj["data"]), dtype="<f4")
    return raw.reshape(obj["shape"]).astype(np.float64)


def _mlp_to_json(mlp: Optional[MlpWeights]) -> Optional[dict]:
    if mlp is None:
        return None
    return {k: _encode(getattr(mlp, k)) for k in ("w1", "b1", "w2", "b2")}


def _mlp_from_json(obj: Optional[dict]) -> Optional[MlpWeights]:
    if obj is None:
        return None
    return MlpWeights(**{k: _decode(obj[k]) for k in ("w1", "b1", "w2", "b2")})


def save_gate_params(p: GateParams, path: str | Path) -> None:
    """Serialize params as JSON with base64 little-endian float32 blobs."""
    doc = {
        "variant": p.variant.value,
        "alpha": p.alpha,
        "epsilon": p.epsilon,
        "seed": p.seed,
        "residual_mlp": _mlp_to_json(p.residual_mlp),
        "film_gamma": _mlp_to_json(p.film_gamma),
        "film_beta": _mlp_to_json(p.film_beta),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_gate_params(path: str | Path) -> GateParams:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return GateParams(
        variant=GateVariant(doc["variant"]),
        alpha=float(doc["alpha"]),
        epsilon=float(doc["epsilon"]),
        seed=int(doc["seed"]),
        residual_mlp=_mlp_from_json(doc.get("residual_mlp")),
        film_gamma=_mlp_from_json(doc.get("film_gamma")),
        film_beta=_mlp_from_json(doc.get("film_beta")),
    )
