"""Independent reference implementations and generators used by the tests.

Everything here is deliberately written from scratch (no reuse of the
production geometry/matching code paths) so it can serve as an oracle.
"""

from __future__ import annotations

import random

from rddeval.dataset_io import DamageClass, Detection, GroundTruthBox
from rddeval.geometry import BBox

CLASSES = list(DamageClass)


def pixel_iou(a: BBox, b: BBox, extent: int = 64) -> float:
    """IoU by brute-force enumeration of unit pixels on the integer grid.

    Exact for integer-coordinate boxes inside [0, extent]^2: each unit cell
    [i, i+1) x [j, j+1) is either fully inside or fully outside such a box.
    """
    inter = 0
    union = 0
    for i in range(extent):
        for j in range(extent):
            in_a = a.xmin <= i and i + 1 <= a.xmax and a.ymin <= j and j + 1 <= a.ymax
            in_b = b.xmin <= i and i + 1 <= b.xmax and b.ymin <= j and j + 1 <= b.ymax
            if in_a and in_b:
                inter += 1
            if in_a or in_b:
                union += 1
    return inter / union if union else 0.0


def plain_iou(a: BBox, b: BBox) -> float:
    """Straight-line IoU arithmetic, written independently of the package."""
    overlap_w = min(a.xmax, b.xmax) - max(a.xmin, b.xmin)
    overlap_h = min(a.ymax, b.ymax) - max(a.ymin, b.ymin)
    if overlap_w <= 0 or overlap_h <= 0:
        return 0.0
    overlap = overlap_w * overlap_h
    area_a = (a.xmax - a.xmin) * (a.ymax - a.ymin)
    area_b = (b.xmax - b.xmin) * (b.ymax - b.ymin)
    return overlap / (area_a + area_b - overlap)


def naive_match(gts, dets, iou_threshold: float = 0.5):
    """O(n*m) reference of the greedy matching definition.

    Detections in descending confidence (ties by input order) each claim
    the unmatched same-class ground truth with the highest IoU, when that
    IoU is strictly greater than the threshold; IoU ties go to the lowest
    ground-truth index.
    """
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].confidence, i))
    taken = [False] * len(gts)
    pairs = []
    for i in order:
        best_j = None
        best_value = None
        for j in range(len(gts)):
            if taken[j] or gts[j].label != dets[i].label:
                continue
            value = plain_iou(dets[i].box, gts[j].box)
            if value > iou_threshold and (best_value is None or value > best_value):
                best_j = j
                best_value = value
        if best_j is not None:
            taken[best_j] = True
            pairs.append((i, best_j, best_value))
    tp = len(pairs)
    return tp, len(dets) - tp, len(gts) - tp, pairs


def naive_evaluate(gt_index, dets, conf_threshold: float = 0.0, iou_threshold: float = 0.5):
    """Pooled (tp, fp, fn) over all images via the naive matcher."""
    kept = [d for d in dets if d.confidence >= conf_threshold]
    by_image: dict[str, list] = {}
    for det in kept:
        by_image.setdefault(det.image_id, []).append(det)
    tp = fp = fn = 0
    for image_id in set(gt_index) | set(by_image):
        t, f, n, _ = naive_match(
            gt_index.get(image_id, []), by_image.get(image_id, []), iou_threshold
        )
        tp += t
        fp += f
        fn += n
    return tp, fp, fn


def naive_f1(tp: int, fp: int, fn: int) -> float:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return 2 * p * r / (p + r) if p + r else 0.0


def random_box(rng: random.Random, max_coord: float = 100.0, min_size: float = 1.0) -> BBox:
    x1 = rng.uniform(0, max_coord - min_size)
    y1 = rng.uniform(0, max_coord - min_size)
    return BBox(
        x1,
        y1,
        x1 + rng.uniform(min_size, max_coord - x1),
        y1 + rng.uniform(min_size, max_coord - y1),
    )


def random_int_box(rng: random.Random, extent: int = 64) -> BBox:
    x1 = rng.randint(0, extent - 1)
    y1 = rng.randint(0, extent - 1)
    return BBox(x1, y1, rng.randint(x1 + 1, extent), rng.randint(y1 + 1, extent))


def random_detection(rng: random.Random, image_id: str = "Japan_000001", model_id: str = "m0") -> Detection:
    return Detection(
        image_id,
        rng.choice(CLASSES),
        random_box(rng),
        confidence=rng.random(),
        model_id=model_id,
    )


def random_ground_truth(rng: random.Random, image_id: str = "Japan_000001") -> GroundTruthBox:
    return GroundTruthBox(image_id, rng.choice(CLASSES), random_box(rng))


def random_instance(rng: random.Random, max_gts: int = 8, max_dets: int = 8, image_id: str = "Japan_000001"):
    """One random single-image matching instance with clustered overlaps.

    Half of the detections are jittered copies of ground-truth boxes so
    that matches at interesting IoU values actually occur.
    """
    gts = [random_ground_truth(rng, image_id) for _ in range(rng.randint(0, max_gts))]
    dets = []
    for _ in range(rng.randint(0, max_dets)):
        if gts and rng.random() < 0.6:
            src = rng.choice(gts)
            jitter = rng.uniform(0, 0.6)
            w = src.box.width
            h = src.box.height
            box = BBox(
                max(0.0, src.box.xmin + jitter * w * rng.uniform(-1, 1) * 0.5),
                max(0.0, src.box.ymin + jitter * h * rng.uniform(-1, 1) * 0.5),
                src.box.xmax + jitter * w * rng.uniform(-1, 1) * 0.5 + 0.1,
                src.box.ymax + jitter * h * rng.uniform(-1, 1) * 0.5 + 0.1,
            )
            label = src.label if rng.random() < 0.8 else rng.choice(CLASSES)
            dets.append(Detection(image_id, label, box, rng.random()))
        else:
            dets.append(random_detection(rng, image_id))
    return gts, dets
