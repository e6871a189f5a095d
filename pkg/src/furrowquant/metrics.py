"""Per-frame class percentages, their cumulative average, and mask-overlap metrics.

For a frame i and class c the per-frame percentage is

    pct[c] = pixels labeled c / total pixels * 100

and a run's cumulative average is the unweighted mean of those per-frame
percentages over all frames, regardless of frame resolution. Overlap metrics
(per-class IoU and accuracy, overall pixel accuracy) all derive from one
C x C confusion matrix with rows = ground truth and columns = prediction.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import MetricError, SegmenterError
from .raster import ClassScheme, LabelMask

__all__ = [
    "ClassPercentages",
    "CumulativeAverager",
    "ConfusionMatrix",
    "TimingStats",
    "class_percentages",
    "iou_per_class",
    "acc_per_class",
    "overall_accuracy",
    "time_segmenter",
]


@dataclass(frozen=True)
class ClassPercentages:
    """Per-class pixel percentages of one frame; indexed by class id."""

    values: np.ndarray  # float64, length = class_count
    frame_pixels: int

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def class_count(self) -> int:
        return self.values.size


def class_percentages(mask: LabelMask, scheme: ClassScheme) -> ClassPercentages:
    """Percentage of the frame covered by each class, background included.

    The denominator is every pixel in the frame, so the values always sum
    to 100 (up to float rounding far below 1e-9).
    """
    total = mask.pixel_count
    if total == 0:
        raise MetricError("cannot compute class percentages of a zero-pixel mask")
    counts = kernels.label_counts(mask.labels, scheme.class_count)
    values = counts.astype(np.float64) / total * 100.0
    return ClassPercentages(values, total)


class CumulativeAverager:
    """Streaming unweighted mean of per-frame class percentages.

    Mergeable: combining two averagers (sums and frame counts add) equals
    accumulating their concatenated streams, so frame processing can fan
    out and reduce.
    """

    def __init__(self, class_count: int):
        if class_count < 1:
            raise MetricError("class_count must be >= 1")
        self._sums = np.zeros(class_count, dtype=np.float64)
        self._count = 0

    @property
    def class_count(self) -> int:
        return self._sums.size

    @property
    def frame_count(self) -> int:
        return self._count

    def add(self, p: ClassPercentages) -> "CumulativeAverager":
        if p.class_count != self.class_count:
            raise MetricError(
                f"class count mismatch: averager has {self.class_count}, frame has {p.class_count}"
            )
        self._sums += p.values
        self._count += 1
        return self

    def merge(self, other: "CumulativeAverager") -> "CumulativeAverager":
        if other.class_count != self.class_count:
            raise MetricError(
                f"class count mismatch: {self.class_count} vs {other.class_count}"
            )
        self._sums += other._sums
        self._count += other._count
        return self

    def value(self) -> np.ndarray:
        """Cumulative average percentage per class."""
        if self._count == 0:
            raise MetricError("no frames accumulated")
        return self._sums / self._count


class ConfusionMatrix:
    """C x C pixel counts; counts[g][p] = pixels with ground truth g predicted p."""

    def __init__(self, class_count: int):
        if class_count < 2:
            raise MetricError("class_count must be >= 2")
        self.counts = np.zeros((class_count, class_count), dtype=np.int64)

    @property
    def class_count(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def add_pair(self, gt: LabelMask, pred: LabelMask) -> "ConfusionMatrix":
        if gt.labels.shape != pred.labels.shape:
            raise MetricError(
                f"mask dimensions differ: ground truth {gt.width}x{gt.height}, "
                f"prediction {pred.width}x{pred.height}"
            )
        self.counts += kernels.confusion_tally(gt.labels, pred.labels, self.class_count)
        return self

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.class_count != self.class_count:
            raise MetricError(
                f"class count mismatch: {self.class_count} vs {other.class_count}"
            )
        self.counts += other.counts
        return self


def iou_per_class(cm: ConfusionMatrix) -> list[float | None]:
    """Per-class intersection over union: TP / (TP + FP + FN).

    Classes occurring in neither ground truth nor prediction are absent and
    reported as None, never as 0.
    """
    counts = cm.counts
    out: list[float | None] = []
    for c in range(cm.class_count):
        tp = int(counts[c, c])
        fp = int(counts[:, c].sum()) - tp
        fn = int(counts[c, :].sum()) - tp
        denom = tp + fp + fn
        out.append(tp / denom if denom else None)
    return out


def acc_per_class(cm: ConfusionMatrix) -> list[float | None]:
    """Per-class accuracy (ground-truth recall): TP / (TP + FN).

    Classes absent from the ground truth are reported as None.
    """
    counts = cm.counts
    out: list[float | None] = []
    for c in range(cm.class_count):
        tp = int(counts[c, c])
        row = int(counts[c, :].sum())
        out.append(tp / row if row else None)
    return out


def overall_accuracy(cm: ConfusionMatrix) -> float:
    """Correctly classified pixels over all pixels (trace / total)."""
    total = cm.total
    if total == 0:
        raise MetricError("confusion matrix is empty")
    return int(np.trace(cm.counts)) / total


@dataclass(frozen=True)
class TimingStats:
    """Per-frame wall-clock durations in milliseconds with summary statistics."""

    samples_ms: tuple[float, ...]

    def __post_init__(self):
        if not self.samples_ms:
            raise MetricError("timing stats need at least one sample")
        object.__setattr__(self, "samples_ms", tuple(float(s) for s in self.samples_ms))

    @property
    def mean_ms(self) -> float:
        return sum(self.samples_ms) / len(self.samples_ms)

    @property
    def median_ms(self) -> float:
        return float(statistics.median(self.samples_ms))

    @property
    def p95_ms(self) -> float:
        """Nearest-rank 95th percentile of the sorted samples."""
        ordered = sorted(self.samples_ms)
        rank = max(1, -(-len(ordered) * 95 // 100))  # ceil(0.95 n) in integers
        return ordered[rank - 1]


def time_segmenter(segmenter, frames) -> TimingStats:
    """Wall-clock each segment() call over the given frames; I/O excluded."""
    samples = []
    for index, frame in enumerate(frames):
        start = time.perf_counter()
        try:
            segmenter.segment(frame, f"{index:05d}")
        except Exception as exc:
            raise SegmenterError(f"segmenter failed on frame {index}: {exc}") from exc
        samples.append((time.perf_counter() - start) * 1000.0)
    if not samples:
        raise MetricError("no frames to time")
    return TimingStats(tuple(samples))
