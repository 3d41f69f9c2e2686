"""Score road-damage detections against VOC ground truth and fuse model ensembles.

The matching rule: a detection is a true positive when its class label
equals a ground truth's and their IoU is strictly greater than the
threshold (default 0.5), assigned greedily in descending confidence order.
The headline metric is micro-averaged F1.
"""

__version__ = "0.1.0"

from .dataset_io import (
    CLASS_IDS,
    Country,
    DamageClass,
    DatasetStats,
    Detection,
    GroundTruthBox,
    VocAnnotation,
    country_of,
    dataset_stats,
    ground_truth_index,
    load_annotations,
    parse_detections,
    parse_voc_annotation,
    select_detections,
    write_scored,
    write_submission,
)
from .errors import (
    ConfidenceOutOfRange,
    DataError,
    DuplicateName,
    EmptyEnsemble,
    InvalidBox,
    MalformedXml,
    MixedImageIds,
    ParseError,
    RddEvalError,
    UnknownClass,
    UsageError,
)
from .fusion import (
    Cluster,
    FusionConfig,
    FusionStrategy,
    cluster_detections,
    fuse,
    load_fusion_config,
    nms,
    sweep_threshold,
)
from .geometry import BBox, intersection_area, iou
from .matching import (
    Counts,
    GroupScore,
    MatchOutcome,
    MetricsReport,
    compute_f1,
    evaluate,
    match_image,
)
from .report import emit_curve, format_report, render_table, report_to_kv

__all__ = [
    "__version__",
    "BBox",
    "intersection_area",
    "iou",
    "DamageClass",
    "Country",
    "GroundTruthBox",
    "Detection",
    "VocAnnotation",
    "DatasetStats",
    "CLASS_IDS",
    "country_of",
    "parse_voc_annotation",
    "load_annotations",
    "ground_truth_index",
    "parse_detections",
    "select_detections",
    "write_submission",
    "write_scored",
    "dataset_stats",
    "Counts",
    "MatchOutcome",
    "GroupScore",
    "MetricsReport",
    "compute_f1",
    "match_image",
    "evaluate",
    "FusionStrategy",
    "FusionConfig",
    "Cluster",
    "load_fusion_config",
    "nms",
    "cluster_detections",
    "fuse",
    "sweep_threshold",
    "render_table",
    "emit_curve",
    "format_report",
    "report_to_kv",
    "RddEvalError",
    "UsageError",
    "DataError",
    "EmptyEnsemble",
    "DuplicateName",
    "MalformedXml",
    "UnknownClass",
    "InvalidBox",
    "ParseError",
    "ConfidenceOutOfRange",
    "MixedImageIds",
]
