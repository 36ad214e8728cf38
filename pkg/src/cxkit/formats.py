"""File formats: JSON-lines record streams and compact binary grids.

Binary layouts (all little-endian, float32 payloads):

* ``CXHM1`` heatmap: magic, u32 rows, u32 cols, rows*cols floats row-major.
* ``CXSM1`` similarity matrix: magic, u32 n_tokens, u32 rows, u32 cols,
  floats token-major.
* ``CXIM1`` raster page: magic, u32 height, u32 width, u32 channels,
  floats planar (one full plane per channel).

Raster pages are also readable/writable as 8-bit PGM (P5) and PPM (P6).
JSON-lines streams may start with a ``{"_meta": ...}`` line, which readers
return separately from the records.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .conditioning import RasterPage
from .geometry import CornerBox
from .heatmap import GrayImage, Heatmap, SimilarityMatrix

MAGIC_HEATMAP = b"CXHM1"
MAGIC_SIMILARITY = b"CXSM1"
MAGIC_IMAGE = b"CXIM1"


class SchemaError(ValueError):
    """Input file violates the expected schema; carries a line number."""

    def __init__(self, path: str | Path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


# --- JSON lines ---------------------------------------------------------


def write_jsonl(path: str | Path, records: Iterable[dict], meta: Optional[dict] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if meta is not None:
            fh.write(json.dumps({"_meta": meta}, sort_keys=True) + "\n")
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_jsonl(path: str | Path) -> tuple[Optional[dict], list[tuple[int, dict]]]:
    """Parse a JSONL file into (meta, [(line_no, record), ...])."""
    meta: Optional[dict] = None
    records: list[tuple[int, dict]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(path, line_no, f"malformed JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise SchemaError(path, line_no, "expected a JSON object")
            if "_meta" in obj and line_no == 1:
                meta = obj["_meta"]
                continue
            records.append((line_no, obj))
    return meta, records


def _require(obj: dict, key: str, types, path, line_no: int):
    if key not in obj:
        raise SchemaError(path, line_no, f"missing key {key!r}")
    val = obj[key]
    if not isinstance(val, types):
        raise SchemaError(path, line_no, f"key {key!r} has wrong type {type(val).__name__}")
    return val


def parse_box(val, path, line_no: int) -> Optional[CornerBox]:
    if val is None:
        return None
    if not (isinstance(val, list) and len(val) == 4 and all(isinstance(v, (int, float)) for v in val)):
        raise SchemaError(path, line_no, "box must be [x1, y1, x2, y2] or null")
    try:
        return CornerBox(*(float(v) for v in val))
    except ValueError as exc:
        raise SchemaError(path, line_no, str(exc)) from exc


# --- binary grids -------------------------------------------------------


def _read_exact(fh, n: int, path) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise ValueError(f"{path}: truncated file")
    return data


def write_heatmap(path: str | Path, h: Heatmap) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC_HEATMAP)
        fh.write(struct.pack("<II", h.rows, h.cols))
        fh.write(np.ascontiguousarray(h.values, dtype="<f4").tobytes())


def read_heatmap(path: str | Path) -> Heatmap:
    p = Path(path)
    if p.suffix == ".json":
        doc = json.loads(p.read_text(encoding="utf-8"))
        return Heatmap.from_flat(int(doc["rows"]), int(doc["cols"]), np.asarray(doc["values"], dtype=np.float64))
    with open(p, "rb") as fh:
        magic = _read_exact(fh, 5, p)
        if magic != MAGIC_HEATMAP:
            raise ValueError(f"{p}: bad magic {magic!r}, expected {MAGIC_HEATMAP!r}")
        rows, cols = struct.unpack("<II", _read_exact(fh, 8, p))
        values = np.frombuffer(_read_exact(fh, 4 * rows * cols, p), dtype="<f4")
    return Heatmap.from_flat(rows, cols, values.astype(np.float64))


def write_heatmap_json(path: str | Path, h: Heatmap) -> None:
    doc = {"rows": h.rows, "cols": h.cols, "values": [float(v) for v in h.flat()]}
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


def write_similarity(path: str | Path, sim: SimilarityMatrix) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC_SIMILARITY)
        fh.write(struct.pack("<III", sim.n_tokens, sim.rows, sim.cols))
        fh.write(np.ascontiguousarray(sim.scores, dtype="<f4").tobytes())


def read_similarity(path: str | Path) -> SimilarityMatrix:
    p = Path(path)
    with open(p, "rb") as fh:
        magic = _read_exact(fh, 5, p)
        if magic != MAGIC_SIMILARITY:
            raise ValueError(f"{p}: bad magic {magic!r}, expected {MAGIC_SIMILARITY!r}")
        n_tokens, rows, cols = struct.unpack("<III", _read_exact(fh, 12, p))
        scores = np.frombuffer(_read_exact(fh, 4 * n_tokens * rows * cols, p), dtype="<f4")
    return SimilarityMatrix(n_tokens, rows, cols, scores.astype(np.float64).reshape(n_tokens, rows * cols))


def write_raster(path: str | Path, page: RasterPage) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC_IMAGE)
        fh.write(struct.pack("<III", page.height, page.width, page.channels))
        planar = np.ascontiguousarray(np.moveaxis(page.pixels, -1, 0), dtype="<f4")
        fh.write(planar.tobytes())


def read_raster(path: str | Path) -> RasterPage:
    p = Path(path)
    with open(p, "rb") as fh:
        magic = _read_exact(fh, 5, p)
        if magic != MAGIC_IMAGE:
            raise ValueError(f"{p}: bad magic {magic!r}, expected {MAGIC_IMAGE!r}")
        h, w, c = struct.unpack("<III", _read_exact(fh, 12, p))
        data = np.frombuffer(_read_exact(fh, 4 * h * w * c, p), dtype="<f4")
    pixels = np.moveaxis(data.astype(np.float64).reshape(c, h, w), 0, -1)
    return RasterPage(h, w, c, pixels)


# --- PGM / PPM ----------------------------------------------------------


def _read_pnm_token(fh) -> bytes:
    token = b""
    while True:
        ch = fh.read(1)
        if not ch:
            raise ValueError("truncated PNM header")
        if ch == b"#":
            while ch not in (b"\n", b""):
                ch = fh.read(1)
            continue
        if ch.isspace():
            if token:
                return token
            continue
        token += ch


def read_pnm(path: str | Path) -> RasterPage:
    """Read an 8-bit binary PGM (P5) or PPM (P6) page."""
    p = Path(path)
    with open(p, "rb") as fh:
        magic = _read_pnm_token(fh)
        if magic not in (b"P5", b"P6"):
            raise ValueError(f"{p}: unsupported PNM magic {magic!r}")
        width = int(_read_pnm_token(fh))
        height = int(_read_pnm_token(fh))
        maxval = int(_read_pnm_token(fh))
        if maxval <= 0 or maxval > 255:
            raise ValueError(f"{p}: unsupported maxval {maxval}")
        channels = 1 if magic == b"P5" else 3
        raw = _read_exact(fh, width * height * channels, p)
    pixels = np.frombuffer(raw, dtype=np.uint8).astype(np.float64) / maxval
    return RasterPage(height, width, channels, pixels.reshape(height, width, channels))


def write_pnm(path: str | Path, page: RasterPage) -> None:
    magic = b"P5" if page.channels == 1 else b"P6"
    data = np.clip(np.round(page.pixels * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n255\n" % (page.width, page.height))
        fh.write(data.tobytes())


def read_page(path: str | Path) -> RasterPage:
    """Read a page in any supported raster format, chosen by extension."""
    p = Path(path)
    if p.suffix in (".pgm", ".ppm"):
        return read_pnm(p)
    return read_raster(p)


def page_to_gray(page: RasterPage) -> GrayImage:
    """Collapse a page to luminance (Rec. 601 weights for RGB)."""
    if page.channels == 1:
        lum = page.pixels[:, :, 0]
    else:
        lum = page.pixels @ np.array([0.299, 0.587, 0.114])
    return GrayImage(page.height, page.width, lum)
