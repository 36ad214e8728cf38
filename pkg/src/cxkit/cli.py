"""Command-line surface binding the library into batch pipelines.

Subcommands: answer-prior, question-prior, eval, intervene, gradcheck,
gate, condition. Record streams are JSON lines, dense grids use the CX
binary formats, and every output carries a metadata object (leading
``_meta`` line, embedded ``meta`` key, or ``metadata.json`` sidecar)
recording the tool version, config hash, and decision selections.

Exit codes: 0 success, 1 operational failure (tolerance breach, missing
pairing), 2 input schema violation (diagnostics name the offending line).
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from multiprocessing import Pool
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .answer_prior import (
    ENGINE_FALLBACK,
    ENGINE_PRIMARY,
    MatchReason,
    MatchResult,
    OcrDocument,
    OcrLine,
    expand_box,
    generate_prior,
)
from .conditioning import attention_mask, crop_reencode, mask_reencode, token_prune_mask
from .config import RunConfig, load_config, meta_object
from .evaluation import PredictionRecord, evaluate
from .formats import (
    SchemaError,
    page_to_gray,
    parse_box,
    read_heatmap,
    read_jsonl,
    read_page,
    read_similarity,
    write_heatmap,
    write_jsonl,
    write_pnm,
    write_raster,
)
from .gating import EmbeddingGrid, GateParams, gate, load_gate_params
from .geometry import CornerBox, to_centre
from .gradcheck import TOLERANCE, run_suite
from .heatmap import Heatmap, aggregate_max, patch_grid_for, postprocess, resample
from .intervention import InterventionSpec, Region, apply_intervention
from .prior_eval import BoxIndicator, jsd, precision_recall_at_k, soft_iou, sparsity


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


# --- answer-prior -------------------------------------------------------

_WORKER_STATE: dict = {}


def _load_ocr_corpus(path: Path) -> dict[str, dict[str, OcrDocument]]:
    _, rows = read_jsonl(path)
    corpus: dict[str, dict[str, OcrDocument]] = {}
    for line_no, obj in rows:
        doc_id = str(obj.get("doc_id", ""))
        if not doc_id:
            raise SchemaError(path, line_no, "missing key 'doc_id'")
        engine = obj.get("engine", ENGINE_PRIMARY)
        if engine not in (ENGINE_PRIMARY, ENGINE_FALLBACK):
            raise SchemaError(path, line_no, f"unknown engine {engine!r}")
        raw_lines = obj.get("lines")
        if not isinstance(raw_lines, list):
            raise SchemaError(path, line_no, "missing or non-list key 'lines'")
        lines = []
        for entry in raw_lines:
            if not isinstance(entry, dict) or "text" not in entry or "box" not in entry:
                raise SchemaError(path, line_no, "each line needs 'text' and 'box'")
            box = parse_box(entry["box"], path, line_no)
            if box is None:
                raise SchemaError(path, line_no, "line box must not be null")
            lines.append(OcrLine(text=str(entry["text"]), box=box))
        try:
            doc = OcrDocument(
                doc_id=doc_id,
                width_px=int(obj.get("width_px", 0)),
                height_px=int(obj.get("height_px", 0)),
                lines=tuple(lines),
                engine=engine,
            )
        except (TypeError, ValueError) as exc:
            raise SchemaError(path, line_no, str(exc)) from exc
        corpus.setdefault(doc_id, {})[engine] = doc
    return corpus


def _match_qa_record(task: tuple[str, str, list[str]]) -> dict:
    qid, doc_id, answers = task
    corpus: dict = _WORKER_STATE["corpus"]
    cfg: RunConfig = _WORKER_STATE["config"]
    primary = corpus[doc_id][ENGINE_PRIMARY]
    fallback = corpus[doc_id].get(ENGINE_FALLBACK)
    result: Optional[MatchResult] = None
    for answer in answers:
        result = generate_prior(answer, primary, fallback, cfg.tau_text, cfg.tau_dig)
        if result.reason is not MatchReason.NONE:
            break
    assert result is not None
    box = None
    if result.box is not None:
        box = list(expand_box(result.box, cfg.expand_x, cfg.expand_y).as_tuple())
    return {
        "qid": qid,
        "box": box,
        "reason": result.reason.value,
        "engine": result.engine,
        "score": result.score,
    }


def _init_worker(corpus, config) -> None:
    _WORKER_STATE["corpus"] = corpus
    _WORKER_STATE["config"] = config


def _print_reason_histogram(reasons: list[str]) -> None:
    counts = Counter(reasons)
    total = len(reasons)
    print("Reason             Count")
    for reason in sorted(counts):
        n = counts[reason]
        print(f"{reason:<19}{n} ({100.0 * n / total:.1f}%)")
    print(f"{'TOTAL':<19}{total} (100%)")


def cmd_answer_prior(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, {"tau_text": args.tau_text, "tau_dig": args.tau_dig, "jobs": args.jobs})
    try:
        corpus = _load_ocr_corpus(Path(args.ocr))
        _, qa_rows = read_jsonl(Path(args.qa))
        tasks = []
        for line_no, obj in qa_rows:
            for key in ("qid", "doc_id", "question", "answers"):
                if key not in obj:
                    raise SchemaError(args.qa, line_no, f"missing key {key!r}")
            answers = obj["answers"]
            if not isinstance(answers, list) or not answers or not all(isinstance(a, str) and a for a in answers):
                raise SchemaError(args.qa, line_no, "'answers' must be a non-empty list of non-empty strings")
            doc_id = str(obj["doc_id"])
            if doc_id not in corpus or ENGINE_PRIMARY not in corpus[doc_id]:
                raise SchemaError(args.qa, line_no, f"no primary OCR document for doc_id {doc_id!r}")
            tasks.append((str(obj["qid"]), doc_id, answers))
    except SchemaError as exc:
        return _fail(2, str(exc))

    _init_worker(corpus, cfg)
    if cfg.jobs > 1:
        with Pool(cfg.jobs, initializer=_init_worker, initargs=(corpus, cfg)) as pool:
            records = pool.map(_match_qa_record, tasks)
    else:
        records = [_match_qa_record(t) for t in tasks]

    write_jsonl(args.out, records, meta=meta_object(cfg, {"command": "answer-prior"}))
    _print_reason_histogram([r["reason"] for r in records])
    return 0


# --- question-prior -----------------------------------------------------

_PAGE_EXTENSIONS = (".pgm", ".ppm", ".cxim")


def _find_page(page_dir: Path, doc_id: str) -> Optional[Path]:
    for ext in _PAGE_EXTENSIONS:
        cand = page_dir / f"{doc_id}{ext}"
        if cand.exists():
            return cand
    return None


def cmd_question_prior(args: argparse.Namespace) -> int:
    cfg = load_config(
        args.config,
        {"border_frac": args.border_frac, "variance_window": args.window, "patch_budget": args.budget},
    )
    sim_dir, page_dir, out_dir = Path(args.sim_dir), Path(args.page_dir), Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    boxes: dict[str, CornerBox] = {}
    if args.boxes:
        try:
            _, rows = read_jsonl(Path(args.boxes))
            for line_no, obj in rows:
                box = parse_box(obj.get("box"), args.boxes, line_no)
                if box is not None:
                    boxes[str(obj.get("doc_id", obj.get("qid", "")))] = box
        except SchemaError as exc:
            return _fail(2, str(exc))

    sim_files = sorted(sim_dir.glob("*.cxsm"))
    if not sim_files:
        return _fail(1, f"no .cxsm files in {sim_dir}")
    metrics_rows = []
    for sim_path in sim_files:
        doc_id = sim_path.stem
        page_path = _find_page(page_dir, doc_id)
        if page_path is None:
            return _fail(1, f"no page raster for doc_id {doc_id!r} in {page_dir}")
        sim = read_similarity(sim_path)
        page = read_page(page_path)
        gray = page_to_gray(page)
        rows, cols = patch_grid_for(page.width, page.height, cfg.patch_budget)
        hm = aggregate_max(sim)
        hm = resample(hm, (page.height, page.width), (rows, cols))
        if not args.no_postprocess:
            hm = postprocess(hm, gray, cfg.variance_window, cfg.border_frac)
        write_heatmap(out_dir / f"{doc_id}.cxhm", hm)

        if doc_id in boxes:
            indicator = BoxIndicator.from_box(rows, cols, boxes[doc_id])
            p_at_k, r_at_k = precision_recall_at_k(hm, indicator, cfg.k_eval)
            try:
                divergence = jsd(hm, indicator)
            except ValueError:
                divergence = None
            metrics_rows.append(
                {
                    "doc_id": doc_id,
                    "iou_soft": soft_iou(hm, indicator),
                    "p_at_k": p_at_k,
                    "r_at_k": r_at_k,
                    "sparsity": sparsity(hm, cfg.sparsity_tau),
                    "jsd": divergence,
                }
            )

    meta = meta_object(cfg, {"command": "question-prior", "postprocess": not args.no_postprocess})
    (out_dir / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if metrics_rows:
        write_jsonl(out_dir / "metrics.jsonl", metrics_rows, meta=meta)
    print(f"wrote {len(sim_files)} heatmaps to {out_dir}")
    return 0


# --- eval ---------------------------------------------------------------


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, {})
    try:
        _, pred_rows = read_jsonl(Path(args.pred))
        _, qa_rows = read_jsonl(Path(args.qa))
        answers: dict[str, list[str]] = {}
        for line_no, obj in qa_rows:
            if "qid" not in obj or "answers" not in obj:
                raise SchemaError(args.qa, line_no, "missing 'qid' or 'answers'")
            answers[str(obj["qid"])] = [str(a) for a in obj["answers"]]
        gt_boxes: dict[str, Optional[CornerBox]] = {}
        if args.prior:
            _, prior_rows = read_jsonl(Path(args.prior))
            for line_no, obj in prior_rows:
                gt_boxes[str(obj.get("qid", ""))] = parse_box(obj.get("box"), args.prior, line_no)

        records = []
        unjoined = []
        for line_no, obj in pred_rows:
            if "qid" not in obj or "pred_text" not in obj:
                raise SchemaError(args.pred, line_no, "missing 'qid' or 'pred_text'")
            qid = str(obj["qid"])
            if qid not in answers:
                unjoined.append(qid)
                continue
            records.append(
                PredictionRecord(
                    qid=qid,
                    pred_text=str(obj["pred_text"]),
                    gt_answers=tuple(answers[qid]),
                    pred_box=parse_box(obj.get("pred_box"), args.pred, line_no),
                    gt_box=gt_boxes.get(qid),
                )
            )
    except SchemaError as exc:
        return _fail(2, str(exc))

    if not records:
        return _fail(1, "no joinable prediction records")
    report = evaluate(records, meta=meta_object(cfg, {"command": "eval", "unjoined_qids": sorted(unjoined)}))
    doc = report.to_dict()
    Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    md_path = Path(args.markdown) if args.markdown else Path(args.out).with_suffix(".md")
    md_path.write_text(report.markdown_table() + "\n", encoding="utf-8")
    if unjoined:
        print(f"warning: {len(unjoined)} prediction(s) had no QA record: {sorted(unjoined)}", file=sys.stderr)
    print(report.markdown_table())
    return 0


# --- intervene ----------------------------------------------------------


def cmd_intervene(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, {"k_top": args.k, "seed": args.seed})
    pred_dir, prior_dir, out_dir = Path(args.pred_dir), Path(args.prior_dir), Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = InterventionSpec(
        region=Region(args.region),
        probability=args.prob,
        mask_embeddings=args.mask_embeddings,
        k=cfg.k_top,
        rng_seed=cfg.seed,
    )
    pred_files = sorted(pred_dir.glob("*.cxhm"))
    if not pred_files:
        return _fail(1, f"no .cxhm files in {pred_dir}")
    log_rows = []
    for pred_path in pred_files:
        qid = pred_path.stem
        prior_path = prior_dir / pred_path.name
        if not prior_path.exists():
            print(f"warning: no prior heatmap for qid {qid!r}, skipped", file=sys.stderr)
            continue
        pred = read_heatmap(pred_path)
        prior = read_heatmap(prior_path)
        emb = None
        if args.emb_dir:
            emb_path = Path(args.emb_dir) / f"{qid}.npy"
            if emb_path.exists():
                values = np.load(emb_path)
                emb = EmbeddingGrid(values.shape[0], values.shape[1], values.astype(np.float64))
        masked, masked_emb, report = apply_intervention(pred, prior, emb, spec, qid=qid)
        write_heatmap(out_dir / pred_path.name, masked)
        if masked_emb is not None and spec.mask_embeddings:
            np.save(out_dir / f"{qid}.npy", masked_emb.values)
        log_rows.append(report)

    meta = meta_object(cfg, {"command": "intervene", "region": spec.region.value, "probability": spec.probability})
    write_jsonl(out_dir / "intervention_log.jsonl", log_rows, meta=meta)
    (out_dir / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"masked {len(log_rows)} heatmaps into {out_dir}")
    return 0


# --- gradcheck ----------------------------------------------------------


def cmd_gradcheck(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, {"seed": args.seed})
    results = run_suite(n_samples=args.samples, seed=cfg.seed)
    worst_ok = True
    for res in results:
        rel = res.max_rel_err
        if args.self_test:
            rel = max(rel, 1.0)  # simulated wrong-sign gradient
        status = "ok" if rel <= TOLERANCE else "FAIL"
        print(f"{res.loss:<8} max_rel_err={rel:.3e} samples={res.n_samples} [{status}]")
        if rel > TOLERANCE:
            worst_ok = False
            print(f"  worst pair: pred={res.worst_pred} target={res.worst_target}", file=sys.stderr)
    return 0 if worst_ok else 1


# --- gate ---------------------------------------------------------------


def cmd_gate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, {})
    values = np.load(args.embeddings).astype(np.float64)
    if values.ndim != 2:
        return _fail(1, f"embeddings must be a 2-D array, got shape {values.shape}")
    emb = EmbeddingGrid(values.shape[0], values.shape[1], values)
    mask = read_heatmap(args.mask).flat()
    if args.params:
        params = load_gate_params(args.params)
    elif args.variant:
        params = GateParams.seeded(args.variant, emb.d, seed=cfg.seed)
    else:
        return _fail(1, "provide --params or --variant")
    gated = gate(emb, mask, params)
    np.save(args.out, gated.values)
    meta = meta_object(cfg, {"command": "gate", "variant": params.variant.value})
    Path(str(args.out) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"gated {emb.n}x{emb.d} embeddings with {params.variant.value}")
    return 0


# --- condition ----------------------------------------------------------


def cmd_condition(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, {})
    try:
        coords = [float(v) for v in args.box.split(",")]
        if len(coords) != 4:
            raise ValueError
        box = CornerBox(*coords)
    except ValueError:
        return _fail(2, f"--box must be x1,y1,x2,y2 within [0,1], got {args.box!r}")

    page = read_page(args.page)
    out = Path(args.out)
    meta = meta_object(cfg, {"command": "condition", "mode": args.mode, "fill": args.fill})
    if args.mode in ("mask", "crop"):
        result = mask_reencode(page, box, fill=args.fill) if args.mode == "mask" else crop_reencode(page, box)
        if out.suffix in (".pgm", ".ppm"):
            write_pnm(out, result)
        else:
            write_raster(out, result)
    else:
        if args.grid:
            rows, cols = (int(v) for v in args.grid.lower().split("x"))
        else:
            rows, cols = patch_grid_for(page.width, page.height, cfg.patch_budget)
        if args.mode == "token-prune":
            mask = token_prune_mask((rows, cols), to_centre(box))
        else:
            mask = attention_mask((rows, cols), box)
        doc = {
            "rows": rows,
            "cols": cols,
            "mask": [bool(v) for v in mask.mask.reshape(-1)],
            "meta": meta,
        }
        out.write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")
        print(f"wrote {args.mode} mask ({int(mask.mask.sum())}/{rows * cols} patches kept)")
        return 0
    Path(str(out) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote conditioned page to {out}")
    return 0


# --- parser -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cxkit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"cxkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("answer-prior", help="match answers to OCR lines and emit prior boxes")
    p.add_argument("--ocr", required=True, help="OCR documents (JSONL, primary + optional fallback engines)")
    p.add_argument("--qa", required=True, help="QA records (JSONL)")
    p.add_argument("--out", required=True, help="output prior records (JSONL)")
    p.add_argument("--config", default=None)
    p.add_argument("--tau-text", type=float, default=None, dest="tau_text")
    p.add_argument("--tau-dig", type=float, default=None, dest="tau_dig")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_answer_prior)

    p = sub.add_parser("question-prior", help="aggregate, resample, and post-process retriever heatmaps")
    p.add_argument("--sim-dir", required=True, help="directory of <doc_id>.cxsm similarity files")
    p.add_argument("--page-dir", required=True, help="directory of <doc_id>.pgm/.ppm/.cxim pages")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--boxes", default=None, help="answer boxes (JSONL) for the metrics sidecar")
    p.add_argument("--no-postprocess", action="store_true")
    p.add_argument("--config", default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--border-frac", type=float, default=None, dest="border_frac")
    p.add_argument("--window", type=int, default=None)
    p.set_defaults(func=cmd_question_prior)

    p = sub.add_parser("eval", help="score predictions and emit report + markdown table")
    p.add_argument("--pred", required=True)
    p.add_argument("--qa", required=True)
    p.add_argument("--prior", default=None, help="prior records supplying ground-truth boxes")
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--markdown", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("intervene", help="Bernoulli-mask heatmap patches against the prior overlap")
    p.add_argument("--pred-dir", required=True)
    p.add_argument("--prior-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--region", choices=[r.value for r in Region], default=Region.OVERLAP.value)
    p.add_argument("--prob", type=float, required=True)
    p.add_argument("--k", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--mask-embeddings", action="store_true")
    p.add_argument("--emb-dir", default=None, help="directory of <qid>.npy embedding grids")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_intervene)

    p = sub.add_parser("gradcheck", help="verify analytic loss gradients against finite differences")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--self-test", action="store_true", help="inject a wrong gradient to exercise failure")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("gate", help="apply a gating variant to an embedding grid")
    p.add_argument("--embeddings", required=True, help="n x d float array (.npy)")
    p.add_argument("--mask", required=True, help="heatmap whose flattened values gate the embeddings")
    p.add_argument("--params", default=None, help="gate parameter JSON")
    p.add_argument("--variant", default=None, help="build seeded params for this variant instead")
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("condition", help="apply a conditioning operator to a page")
    p.add_argument("--page", required=True)
    p.add_argument("--box", required=True, help="x1,y1,x2,y2 in relative coordinates")
    p.add_argument("--mode", choices=["mask", "crop", "token-prune", "attn-mask"], required=True)
    p.add_argument("--fill", type=float, default=1.0)
    p.add_argument("--grid", default=None, help="ROWSxCOLS for the token modes (default: from budget)")
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_condition)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        return _fail(2, str(exc))
    except (OSError, ValueError) as exc:
        return _fail(1, str(exc))


if __name__ == "__main__":
    sys.exit(main())
