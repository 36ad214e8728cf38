"""Run configuration: defaults, config-file merging, and output metadata.

Precedence is command-line flags over config file over defaults, with the
``CX_SEED`` environment variable overriding the config-file seed. Defaults
match the published pipeline constants. Every output file carries a metadata
object with the tool version, the resolved-config hash, and the recorded
design-decision selections so runs can be audited and compared.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

from . import __version__
from .kernels import BACKEND
from .losses import LossWeights

DESIGN_DECISIONS = {
    "mask_fill_default": 1.0,
    "spatial_normalization": "minmax_per_map",
    "variance_weighting": "multiplicative_max_normalized",
    "gaussian_sigma_rule": "half_extent_floored_at_one_patch",
    "jsd_reference": "uniform_over_gt_box_patches",
    "bicubic_kernel": "catmull_rom_a=-0.5",
    "pixel_to_grid_downsample": "area_weighted_cell_mean",
    "anls_normalization": "lowercase_strip",
    "box_expansion": "centre_symmetric",
}


@dataclass
class RunConfig:
    tau_text: float = 0.82
    tau_dig: float = 0.95
    k_top: float = 0.70
    k_eval: float = 0.30
    sparsity_tau: float = 0.01
    border_frac: float = 0.07
    variance_window: int = 15
    patch_budget: int = 512
    expand_x: float = 0.10
    expand_y: float = 0.15
    lambda_giou: float = 2.5
    lambda_centre: float = 2.0
    lambda_area: float = 0.02
    lambda_prior: float = 0.5
    lambda_dec: float = 0.25
    gate_params: Optional[str] = None
    seed: int = 0
    jobs: int = 1

    def __post_init__(self) -> None:
        if not (0.0 < self.tau_text <= 1.0 and 0.0 < self.tau_dig <= 1.0):
            raise ValueError("match thresholds must lie in (0, 1]")
        if not (0.0 < self.k_top <= 1.0 and 0.0 < self.k_eval <= 1.0):
            raise ValueError("top-k fractions must lie in (0, 1]")
        if self.sparsity_tau < 0.0:
            raise ValueError("sparsity threshold must be non-negative")
        if not 0.0 <= self.border_frac < 0.5:
            raise ValueError("border fraction must lie in [0, 0.5)")
        if self.variance_window < 1 or self.variance_window % 2 == 0:
            raise ValueError("variance window must be odd and >= 1")
        if self.patch_budget < 1:
            raise ValueError("patch budget must be positive")
        if not (0.0 <= self.expand_x and 0.0 <= self.expand_y):
            raise ValueError("box expansion factors must be non-negative")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        self.loss_weights()  # validates the lambdas

    def loss_weights(self) -> LossWeights:
        return LossWeights(
            lambda_giou=self.lambda_giou,
            lambda_centre=self.lambda_centre,
            lambda_area=self.lambda_area,
            lambda_prior=self.lambda_prior,
            lambda_dec=self.lambda_dec,
        )

    def sha256(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


def load_config(path: Optional[str | Path] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Resolve a config from defaults, an optional JSON file, and overrides.

    Unknown keys in the file or the overrides are rejected. ``CX_SEED``
    (when set) replaces the config-file seed but yields to an explicit
    override.
    """
    known = {f.name for f in fields(RunConfig)}
    merged: dict = {}
    if path is not None:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(doc, dict):
            raise ValueError(f"{path}: config must be a JSON object")
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ValueError(f"{path}: unknown config keys: {', '.join(unknown)}")
        merged.update(doc)
    env_seed = os.environ.get("CX_SEED")
    if env_seed is not None:
        merged["seed"] = int(env_seed)
    if overrides:
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise ValueError(f"unknown config overrides: {', '.join(unknown)}")
        merged.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**merged)


def meta_object(config: RunConfig, extra: Optional[dict] = None) -> dict:
    meta = {
        "tool": "cxkit",
        "version": __version__,
        "kernel_backend": BACKEND,
        "config_sha256": config.sha256(),
        "decisions": dict(DESIGN_DECISIONS),
    }
    if extra:
        meta.update(extra)
    return meta
