"""Quantify seed-trench cleanliness from per-pixel segmentation masks."""

from .errors import (
    FurrowQuantError,
    MaskClassError,
    MetricError,
    ProtocolError,
    RasterError,
    RemoteStatusError,
    ReportError,
    SceneError,
    SegmenterError,
    SequenceError,
)
from .metrics import (
    ClassPercentages,
    ConfusionMatrix,
    CumulativeAverager,
    TimingStats,
    acc_per_class,
    class_percentages,
    iou_per_class,
    overall_accuracy,
    time_segmenter,
)
from .raster import (
    ClassScheme,
    FrameSequence,
    LabelMask,
    RgbFrame,
    load_frame,
    load_mask,
    save_frame,
    save_mask,
    scan_sequence,
    validate_mask,
)
from .report import (
    ComparisonTable,
    EvalSummary,
    Ranking,
    RunSummary,
    TimingSummary,
    emit,
    emit_eval,
    evaluate_confusion,
    load_run_summary,
    rank_by_cleanliness,
    run_summary_to_json,
    summarize,
)
from .segmenter import (
    HueInterval,
    OracleSegmenter,
    OracleSpec,
    RemoteSegmenter,
    RemoteSpec,
    SegResult,
    ThresholdParams,
    ThresholdSegmenter,
    ThresholdSpec,
    make_segmenter,
    parse_spec,
    threshold_segment,
)
from .synthgen import (
    Manifest,
    SceneMeta,
    SceneParams,
    augment,
    generate_dataset,
    generate_scene,
    load_manifest,
    split_dataset,
)

__version__ = "0.1.0"
