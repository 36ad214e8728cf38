"""cxkit: deterministic tooling for grounded document-VQA pipelines.

Covers weak-supervision prior generation (answer boxes from OCR lines,
question heatmaps from retriever similarities), localization losses with
analytic gradients, heatmap gating and decoder-conditioning operators,
faithfulness intervention masking, and the evaluation metric suite, plus
a batch CLI over JSON-lines and compact binary grid formats.
"""

__version__ = "0.1.0"

from .kernels import BACKEND as KERNEL_BACKEND

__all__ = ["KERNEL_BACKEND", "__version__"]
