"""Detection-to-ground-truth matching and the F1 metric.

A prediction counts as correct when its class label equals the ground
truth's and the IoU between the two boxes is strictly greater than the
threshold (default 0.5). Matching is greedy and one-to-one: detections are
processed in descending confidence order and each claims the best
still-free ground truth of its own class; duplicates count as false
positives.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

from .dataset_io import Country, DamageClass, Detection, GroundTruthBox, country_of
from .errors import MixedImageIds
from .geometry import iou

__all__ = [
    "Counts",
    "MatchOutcome",
    "GroupScore",
    "MetricsReport",
    "compute_f1",
    "match_image",
    "evaluate",
]


@dataclass(frozen=True)
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if self.tp < 0 or self.fp < 0 or self.fn < 0:
            raise ValueError(f"counts must be non-negative: {self}")

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


def compute_f1(counts: Counts) -> tuple[float, float, float]:
    """Precision, recall, and F1 = 2pr/(p+r); 0/0 ratios resolve to 0."""
    detected = counts.tp + counts.fp
    actual = counts.tp + counts.fn
    precision = counts.tp / detected if detected else 0.0
    recall = counts.tp / actual if actual else 0.0
    if precision + recall == 0.0:
        return precision, recall, 0.0
    f1 = 2 * (precision * recall) / (precision + recall)
    return precision, recall, f1


@dataclass(frozen=True)
class MatchOutcome:
    """Per-image assignment: matched (detection, ground-truth) index pairs.

    Indices refer to the original input order of the lists passed to
    :func:`match_image`; pairs appear in match (descending confidence)
    order.
    """

    image_id: str
    tp: int
    fp: int
    fn: int
    pairs: list[tuple[int, int, float]]

    @property
    def counts(self) -> Counts:
        return Counts(self.tp, self.fp, self.fn)


def match_image(
    gts: Sequence[GroundTruthBox],
    dets: Sequence[Detection],
    iou_threshold: float = 0.5,
) -> MatchOutcome:
    """Greedy one-to-one matching of one image's detections to its ground truth.

    Detections are visited in descending confidence (ties by input order);
    each is matched to the unmatched same-class ground truth with the
    highest IoU, provided that IoU is strictly greater than
    ``iou_threshold`` (IoU ties go to the lowest ground-truth index).
    """
    if not (0.0 < iou_threshold < 1.0):
        raise ValueError(f"iou_threshold must be in (0, 1), got {iou_threshold}")
    image_ids = {gt.image_id for gt in gts} | {det.image_id for det in dets}
    if len(image_ids) > 1:
        raise MixedImageIds(f"inputs span multiple image ids: {sorted(image_ids)}")
    image_id = next(iter(image_ids), "")

    order = sorted(range(len(dets)), key=lambda i: -dets[i].confidence)
    matched_gts: set[int] = set()
    pairs: list[tuple[int, int, float]] = []
    for i in order:
        det = dets[i]
        best_j = -1
        best_iou = 0.0
        for j, gt in enumerate(gts):
            if j in matched_gts or gt.label != det.label:
                continue
            value = iou(det.box, gt.box)
            if value > iou_threshold and value > best_iou:
                best_j, best_iou = j, value
        if best_j >= 0:
            matched_gts.add(best_j)
            pairs.append((i, best_j, best_iou))
    tp = len(pairs)
    return MatchOutcome(image_id, tp, len(dets) - tp, len(gts) - tp, pairs)


@dataclass(frozen=True)
class GroupScore:
    counts: Counts
    precision: float
    recall: float
    f1: float


def _score(counts: Counts) -> GroupScore:
    precision, recall, f1 = compute_f1(counts)
    return GroupScore(counts, precision, recall, f1)


@dataclass(frozen=True)
class MetricsReport:
    """Micro-averaged scores plus per-class and per-country breakdowns."""

    counts: Counts
    precision: float
    recall: float
    f1: float
    per_class: dict[DamageClass, GroupScore]
    per_country: dict[Country, GroupScore]


def evaluate(
    gt_index: Mapping[str, Sequence[GroundTruthBox]],
    detections: Sequence[Detection],
    conf_threshold: float = 0.0,
    iou_threshold: float = 0.5,
    threads: int = 1,
) -> MetricsReport:
    """Score a detection set against indexed ground truth.

    Detections below ``conf_threshold`` are dropped before matching.
    Images present only in the ground truth contribute false negatives;
    detections on images absent from ``gt_index`` count as false positives.
    Counts are pooled over all images before applying the F1 formula
    (micro-averaging); the same pooling is reported per class and per
    country. Per-image matching may run on ``threads`` workers; the result
    does not depend on the worker count.
    """
    kept = [d for d in detections if d.confidence >= conf_threshold]
    dets_by_image: dict[str, list[Detection]] = {}
    for det in kept:
        dets_by_image.setdefault(det.image_id, []).append(det)

    images = sorted(set(gt_index) | set(dets_by_image))

    def match_one(image_id: str) -> MatchOutcome:
        return match_image(
            gt_index.get(image_id, ()), dets_by_image.get(image_id, ()), iou_threshold
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(match_one, images))
    else:
        outcomes = [match_one(image_id) for image_id in images]

    class_counts = {cls: [0, 0, 0] for cls in DamageClass}  # tp, fp, fn
    country_counts = {country: [0, 0, 0] for country in Country}
    for image_id, outcome in zip(images, outcomes):
        gts = gt_index.get(image_id, ())
        dets = dets_by_image.get(image_id, ())
        country = country_counts[country_of(image_id)]
        matched_dets = {i for i, _, _ in outcome.pairs}
        matched_gts = {j for _, j, _ in outcome.pairs}
        for i, det in enumerate(dets):
            slot = 0 if i in matched_dets else 1
            class_counts[det.label][slot] += 1
            country[slot] += 1
        for j, gt in enumerate(gts):
            if j not in matched_gts:
                class_counts[gt.label][2] += 1
                country[2] += 1

    total = Counts()
    per_class = {}
    for cls, (tp, fp, fn) in class_counts.items():
        counts = Counts(tp, fp, fn)
        per_class[cls] = _score(counts)
        total = total + counts
    per_country = {
        country: _score(Counts(*triple)) for country, triple in country_counts.items()
    }
    precision, recall, f1 = compute_f1(total)
    return MetricsReport(total, precision, recall, f1, per_class, per_country)
