"""Command-line surface tying ingestion, segmentation, metrics, and reporting together.

Exit codes: 0 success, 1 runtime error, 2 usage error. Reports are written
atomically (temp file + rename), so an aborted run never leaves a truncated
report behind.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import FurrowQuantError, SegmenterError, SequenceError
from .metrics import ConfusionMatrix, CumulativeAverager, class_percentages, time_segmenter
from .raster import ClassScheme, RasterError, load_frame, load_mask, scan_sequence
from .report import (
    ComparisonTable,
    TimingSummary,
    emit,
    emit_eval,
    evaluate_confusion,
    load_run_summary,
    rank_by_cleanliness,
    run_summary_to_json,
    summarize,
)
from .segmenter import make_segmenter, parse_spec
from .synthgen import SceneParams, generate_dataset, load_manifest, split_dataset
from .util import atomic_write_text

logger = logging.getLogger(__name__)

PROGRESS_EVERY = 100


class UsageError(FurrowQuantError):
    """Bad invocation: reported with usage text and exit code 2."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="furrowquant",
        description="Quantify seed-trench cleanliness from per-pixel segmentation masks.",
    )
    parser.add_argument("--classes", metavar="FILE", help="JSON class scheme (ordered `classes` array)")
    parser.add_argument("--verbose", action="store_true", help="progress output every %d frames" % PROGRESS_EVERY)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("quantify", help="per-frame class percentages and their cumulative average")
    p.add_argument("--frames", required=True, metavar="DIR")
    p.add_argument("--segmenter", required=True, metavar="SPEC",
                   help="oracle:DIR | hsv[:PARAMS_FILE] | remote:HOST:PORT")
    p.add_argument("--name", required=True, help="run identifier (e.g. the row cleaner model)")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")

    p = sub.add_parser("evaluate", help="IoU/accuracy of predicted masks against ground truth")
    p.add_argument("--pred", required=True, metavar="DIR")
    p.add_argument("--gt", required=True, metavar="DIR")
    p.add_argument("--out", metavar="PATH", help="write the JSON evaluation report here")

    p = sub.add_parser("compare", help="comparison table and cleanliness ranking across runs")
    p.add_argument("--run", action="append", default=[], metavar="NAME=REPORT.json")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")

    p = sub.add_parser("generate", help="render synthetic scenes with ground-truth masks")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--straw", type=float, required=True, help="target straw fraction in [0, 1]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=int, default=512)
    p.add_argument("--height", type=int, default=512)
    p.add_argument("--band", type=int, default=0, help="machinery band rows at the top")
    p.add_argument("--noise", type=int, default=15, help="uniform pixel noise amplitude")
    p.add_argument("--out", required=True, metavar="DIR")

    p = sub.add_parser("split", help="seeded train/validation split of a dataset manifest")
    p.add_argument("--manifest", required=True, metavar="FILE")
    p.add_argument("--ratio", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("bench", help="segmentation latency statistics over a frame directory")
    p.add_argument("--segmenter", required=True, metavar="SPEC")
    p.add_argument("--frames", required=True, metavar="DIR")
    p.add_argument("--out", metavar="PATH", help="report file to write/extend with timing stats")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    handler = {
        "quantify": cmd_quantify,
        "evaluate": cmd_evaluate,
        "compare": cmd_compare,
        "generate": cmd_generate,
        "split": cmd_split,
        "bench": cmd_bench,
    }[args.command]
    try:
        return handler(args)
    except UsageError as exc:
        print(parser.format_usage(), end="", file=sys.stderr)
        print(f"furrowquant {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except FurrowQuantError as exc:
        print(f"furrowquant {args.command}: error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


def _load_scheme(args) -> ClassScheme:
    if not args.classes:
        return ClassScheme.default()
    try:
        return ClassScheme.from_json_file(args.classes)
    except RasterError as exc:
        raise UsageError(str(exc)) from exc


def _scan(frames_dir, masks_dir=None):
    try:
        return scan_sequence(frames_dir, masks_dir)
    except SequenceError as exc:
        raise UsageError(str(exc)) from exc


def _make_segmenter(spec_text: str, scheme: ClassScheme):
    try:
        return make_segmenter(parse_spec(spec_text), scheme)
    except SegmenterError as exc:
        raise UsageError(str(exc)) from exc


def _write_or_print(text: str, out: str | None) -> None:
    if out is None:
        print(text, end="" if text.endswith("\n") else "\n")
        return
    try:
        atomic_write_text(Path(out), text)
    except OSError as exc:
        raise FurrowQuantError(f"cannot write {out}: {exc}") from exc


def cmd_quantify(args) -> int:
    scheme = _load_scheme(args)
    sequence = _scan(args.frames)
    segmenter = _make_segmenter(args.segmenter, scheme)
    averager = CumulativeAverager(scheme.class_count)
    try:
        for entry in sequence:
            frame = load_frame(entry.frame_path)
            try:
                result = segmenter.segment(frame, entry.stem)
            except FurrowQuantError as exc:
                raise FurrowQuantError(f"segmentation failed at frame {entry.stem!r}: {exc}") from exc
            averager.add(class_percentages(result.mask, scheme))
            if args.verbose and averager.frame_count % PROGRESS_EVERY == 0:
                running = averager.value()
                cells = " ".join(f"{n}={v:.2f}" for n, v in zip(scheme.names, running))
                print(f"[{averager.frame_count}] c_avg: {cells}", file=sys.stderr)
    finally:
        segmenter.close()

    summary = summarize(args.name, averager)
    if args.format == "json":
        text = run_summary_to_json(summary, scheme)
    else:
        text = emit(ComparisonTable(scheme, (summary,)), args.format)
    _write_or_print(text, args.out)
    return 0


def cmd_evaluate(args) -> int:
    scheme = _load_scheme(args)
    gt_seq = _scan(args.gt)
    pred_seq = _scan(args.pred)
    gt_stems = {e.stem: e.frame_path for e in gt_seq}
    pred_stems = {e.stem: e.frame_path for e in pred_seq}
    unpaired = sorted(set(gt_stems) ^ set(pred_stems))
    if unpaired:
        raise FurrowQuantError("unpaired mask stems: " + ", ".join(unpaired))

    cm = ConfusionMatrix(scheme.class_count)
    for stem in sorted(gt_stems):
        gt = load_mask(gt_stems[stem], scheme)
        pred = load_mask(pred_stems[stem], scheme)
        try:
            cm.add_pair(gt, pred)
        except FurrowQuantError as exc:
            raise FurrowQuantError(f"stem {stem!r}: {exc}") from exc

    summary = evaluate_confusion(cm, scheme)
    print(emit_eval(summary, "text"), end="")
    if args.out:
        _write_or_print(emit_eval(summary, "json"), args.out)
    return 0


def cmd_compare(args) -> int:
    scheme = _load_scheme(args)
    if not args.run:
        raise UsageError("compare needs at least one --run NAME=REPORT.json")
    rows = []
    seen = set()
    for item in args.run:
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            raise UsageError(f"bad --run value {item!r}, expected NAME=REPORT.json")
        if name in seen:
            raise UsageError(f"duplicate run name {name!r}")
        seen.add(name)
        loaded = load_run_summary(path, scheme)
        if loaded.name != name:
            loaded = type(loaded)(name, loaded.frame_count, loaded.c_avg, loaded.timing)
        rows.append(loaded)
    table = ComparisonTable(scheme, tuple(rows))
    ranking = rank_by_cleanliness(table)
    _write_or_print(emit(table, args.format, ranking), args.out)
    return 0


def cmd_generate(args) -> int:
    if args.n < 1:
        raise UsageError(f"--n must be >= 1, got {args.n}")
    try:
        params = SceneParams(
            width=args.width,
            height=args.height,
            target_straw_fraction=args.straw,
            machinery_band_rows=args.band,
            noise_amplitude=args.noise,
        )
    except FurrowQuantError as exc:
        raise UsageError(str(exc)) from exc
    manifest = generate_dataset(args.n, params, args.seed, args.out)
    out = Path(args.out)
    print(f"wrote {len(manifest)} scenes under {out} (manifest: {out / 'manifest.json'})")
    return 0


def cmd_split(args) -> int:
    if not 0.0 < args.ratio < 1.0:
        raise UsageError(f"--ratio must be in (0, 1), got {args.ratio}")
    manifest_path = Path(args.manifest)
    if not manifest_path.is_file():
        raise UsageError(f"manifest does not exist: {manifest_path}")
    manifest = load_manifest(manifest_path)
    train, validation = split_dataset(manifest, args.ratio, args.seed)
    text = json.dumps({"train": train, "validation": validation}, indent=2) + "\n"
    _write_or_print(text, args.out)
    logger.info("split %d entries into %d train / %d validation", len(manifest), len(train), len(validation))
    return 0


def cmd_bench(args) -> int:
    scheme = _load_scheme(args)
    sequence = _scan(args.frames)
    segmenter = _make_segmenter(args.segmenter, scheme)
    frames = [load_frame(e.frame_path) for e in sequence]  # decode up front, timing excludes I/O
    try:
        stats = time_segmenter(segmenter, frames)
    finally:
        segmenter.close()
    print(
        f"samples={len(stats.samples_ms)} mean_ms={stats.mean_ms:.3f} "
        f"median_ms={stats.median_ms:.3f} p95_ms={stats.p95_ms:.3f}"
    )
    if args.out:
        _append_timing(Path(args.out), stats, len(frames))
    return 0


def _append_timing(path: Path, stats, frame_count: int) -> None:
    """Attach timing to an existing run report, or write a timing-only report."""
    timing = TimingSummary.of(stats)
    doc = {}
    if path.is_file():
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise FurrowQuantError(f"cannot extend report {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise FurrowQuantError(f"cannot extend report {path}: not a JSON object")
    doc.setdefault("frames", frame_count)
    doc["timing"] = {
        "mean_ms": timing.mean_ms,
        "median_ms": timing.median_ms,
        "p95_ms": timing.p95_ms,
    }
    try:
        atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise FurrowQuantError(f"cannot write {path}: {exc}") from exc
