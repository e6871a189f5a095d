"""Run summaries, cross-run comparison tables, cleanliness ranking, and emission.

A run summary snapshots one row-cleaner run: the cumulative average percentage
per class plus frame count and optional timing. Comparison tables collect runs
for ranking and display; class 0 is treated as background and shown last, so
the default scheme displays as (soil, straw, background).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ReportError
from .metrics import ConfusionMatrix, CumulativeAverager, TimingStats, acc_per_class, iou_per_class, overall_accuracy
from .raster import ClassScheme
from .util import round_half_up

# Our own pipeline keeps percentage sums within 1e-9 of 100; reports published
# elsewhere may carry 2-decimal rounding, so loaded files get this much slack.
SUM_TOLERANCE_COMPUTED = 1e-9
SUM_TOLERANCE_LOADED = 0.5

FORMATS = ("json", "csv", "text")


@dataclass(frozen=True)
class TimingSummary:
    """The three timing statistics a report carries (samples stay in TimingStats)."""

    mean_ms: float
    median_ms: float
    p95_ms: float

    @classmethod
    def of(cls, stats: "TimingStats | TimingSummary | None") -> "TimingSummary | None":
        if stats is None or isinstance(stats, TimingSummary):
            return stats
        return cls(stats.mean_ms, stats.median_ms, stats.p95_ms)


@dataclass(frozen=True)
class RunSummary:
    name: str
    frame_count: int
    c_avg: tuple[float, ...]  # percent per class, scheme order
    timing: TimingSummary | None = None

    def __post_init__(self):
        if not self.name:
            raise ReportError("run name must be non-empty")
        if self.frame_count < 1:
            raise ReportError(f"run {self.name!r}: frame count must be >= 1")
        object.__setattr__(self, "c_avg", tuple(float(v) for v in self.c_avg))


def summarize(
    name: str,
    averager: CumulativeAverager,
    timing: TimingStats | TimingSummary | None = None,
) -> RunSummary:
    """Snapshot the averager's cumulative value into a named run summary."""
    values = tuple(float(v) for v in averager.value())
    if abs(sum(values) - 100.0) > SUM_TOLERANCE_COMPUTED:
        raise ReportError(f"run {name!r}: class percentages sum to {sum(values)!r}, not 100")
    return RunSummary(name, averager.frame_count, values, TimingSummary.of(timing))


@dataclass(frozen=True)
class ComparisonTable:
    scheme: ClassScheme
    rows: tuple[RunSummary, ...]

    def __post_init__(self):
        names = [r.name for r in self.rows]
        if len(set(names)) != len(names):
            raise ReportError(f"run names must be unique, got {names}")
        for row in self.rows:
            if len(row.c_avg) != self.scheme.class_count:
                raise ReportError(
                    f"run {row.name!r} has {len(row.c_avg)} classes, scheme has "
                    f"{self.scheme.class_count}"
                )

    @property
    def display_order(self) -> tuple[int, ...]:
        """Class ids for display: scheme order with class 0 (background) last."""
        return tuple(range(1, self.scheme.class_count)) + (0,)


@dataclass(frozen=True)
class Ranking:
    names: tuple[str, ...]  # best first
    keys: tuple[tuple[float, float], ...]  # (straw pct, soil pct) per run


def rank_by_cleanliness(table: ComparisonTable) -> Ranking:
    """Order runs by ascending straw percentage (cleanest trench first).

    Ties break by descending soil percentage, then lexicographic name; the
    comparison uses full-precision values, so display rounding never changes
    the order.
    """
    if not table.rows:
        raise ReportError("cannot rank an empty table")
    straw = table.scheme.id_of("straw")
    soil = table.scheme.id_of("soil")
    rows = sorted(table.rows, key=lambda r: (r.c_avg[straw], -r.c_avg[soil], r.name))
    return Ranking(
        tuple(r.name for r in rows),
        tuple((r.c_avg[straw], r.c_avg[soil]) for r in rows),
    )


# ---------------------------------------------------------------------------
# JSON report schema (one run)
# ---------------------------------------------------------------------------

def run_summary_to_dict(summary: RunSummary, scheme: ClassScheme) -> dict:
    doc = {
        "name": summary.name,
        "frames": summary.frame_count,
        "c_avg": {name: summary.c_avg[i] for i, name in enumerate(scheme.names)},
    }
    if summary.timing is not None:
        doc["timing"] = {
            "mean_ms": summary.timing.mean_ms,
            "median_ms": summary.timing.median_ms,
            "p95_ms": summary.timing.p95_ms,
        }
    return doc


def run_summary_to_json(summary: RunSummary, scheme: ClassScheme) -> str:
    return json.dumps(run_summary_to_dict(summary, scheme), indent=2, sort_keys=True) + "\n"


def run_summary_from_dict(doc: dict, scheme: ClassScheme, source: str = "report") -> RunSummary:
    """Parse a run-summary document; tolerates published-rounding sums."""
    try:
        name = doc["name"]
        frames = int(doc["frames"])
        c_avg_map = doc["c_avg"]
        values = tuple(float(c_avg_map[n]) for n in scheme.names)
    except (KeyError, TypeError, ValueError) as exc:
        raise ReportError(f"malformed report {source}: {exc!r}") from exc
    if abs(sum(values) - 100.0) > SUM_TOLERANCE_LOADED:
        raise ReportError(
            f"malformed report {source}: class percentages sum to {sum(values)}, not ~100"
        )
    timing = None
    if "timing" in doc:
        try:
            t = doc["timing"]
            timing = TimingSummary(float(t["mean_ms"]), float(t["median_ms"]), float(t["p95_ms"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ReportError(f"malformed report {source}: bad timing: {exc!r}") from exc
    return RunSummary(name, frames, values, timing)


def load_run_summary(path: str | Path, scheme: ClassScheme) -> RunSummary:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ReportError(f"malformed report file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ReportError(f"malformed report file {path}: not a JSON object")
    return run_summary_from_dict(doc, scheme, source=str(path))


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def emit(table: ComparisonTable, format: str, ranking: Ranking | None = None) -> str:
    """Render a comparison table as json, csv, or a 2-decimal text table.

    JSON carries full double precision with canonical (sorted) key order;
    CSV uses the fixed header row_cleaner,<class>_pct...,frames; text rounds
    half-up to 2 decimals. The ranking is included where the format allows
    (json, text).
    """
    if format == "json":
        return _emit_json(table, ranking)
    if format == "csv":
        return _emit_csv(table)
    if format == "text":
        return _emit_text(table, ranking)
    raise ReportError(f"unknown format {format!r} (expected one of {FORMATS})")


def _emit_json(table: ComparisonTable, ranking: Ranking | None) -> str:
    doc = {"rows": [run_summary_to_dict(r, table.scheme) for r in table.rows]}
    if ranking is not None:
        doc["ranking"] = list(ranking.names)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _emit_csv(table: ComparisonTable) -> str:
    order = table.display_order
    header = "row_cleaner," + ",".join(f"{table.scheme.names[i]}_pct" for i in order) + ",frames"
    lines = [header]
    for row in table.rows:
        cells = [row.name] + [repr(row.c_avg[i]) for i in order] + [str(row.frame_count)]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _emit_text(table: ComparisonTable, ranking: Ranking | None) -> str:
    order = table.display_order
    header = ["row_cleaner"] + [f"{table.scheme.names[i]}_pct" for i in order] + ["frames"]
    body = [
        [row.name] + [round_half_up(row.c_avg[i]) for i in order] + [str(row.frame_count)]
        for row in table.rows
    ]
    widths = [max(len(r[col]) for r in [header] + body) for col in range(len(header))]
    lines = [_pad_row(header, widths), _pad_row(["-" * w for w in widths], widths)]
    lines += [_pad_row(r, widths) for r in body]
    if ranking is not None:
        lines.append("")
        lines.append("ranking (cleanest first): " + " > ".join(ranking.names))
    return "\n".join(lines) + "\n"


def _pad_row(cells: list[str], widths: list[int]) -> str:
    padded = [cells[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(cells[1:], widths[1:])]
    return "  ".join(padded).rstrip()


# ---------------------------------------------------------------------------
# evaluation summaries (per-class IoU/Acc against ground truth)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalSummary:
    """Per-class IoU/accuracy percentages (None = class absent) plus overall."""

    scheme: ClassScheme
    iou_pct: tuple[float | None, ...]
    acc_pct: tuple[float | None, ...]
    overall_acc_pct: float
    pixels: int


def evaluate_confusion(cm: ConfusionMatrix, scheme: ClassScheme) -> EvalSummary:
    to_pct = lambda v: None if v is None else v * 100.0
    return EvalSummary(
        scheme,
        tuple(to_pct(v) for v in iou_per_class(cm)),
        tuple(to_pct(v) for v in acc_per_class(cm)),
        overall_accuracy(cm) * 100.0,
        cm.total,
    )


def emit_eval(summary: EvalSummary, format: str) -> str:
    if format == "json":
        classes = {}
        for i, name in enumerate(summary.scheme.names):
            iou, acc = summary.iou_pct[i], summary.acc_pct[i]
            classes[name] = {"iou_pct": iou, "acc_pct": acc}
        doc = {
            "classes": classes,
            "overall_acc_pct": summary.overall_acc_pct,
            "pixels": summary.pixels,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if format == "text":
        fmt = lambda v: "absent" if v is None else round_half_up(v)
        header = ["class", "iou_pct", "acc_pct"]
        body = [
            [name, fmt(summary.iou_pct[i]), fmt(summary.acc_pct[i])]
            for i, name in enumerate(summary.scheme.names)
        ]
        widths = [max(len(r[col]) for r in [header] + body) for col in range(3)]
        lines = [_pad_row(header, widths), _pad_row(["-" * w for w in widths], widths)]
        lines += [_pad_row(r, widths) for r in body]
        lines.append("")
        lines.append(f"overall_acc_pct: {round_half_up(summary.overall_acc_pct)}")
        return "\n".join(lines) + "\n"
    raise ReportError(f"unknown format {format!r} for evaluation reports (json|text)")
