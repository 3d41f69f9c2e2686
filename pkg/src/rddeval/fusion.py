"""Combine detection sets from several models into one detection set.

Three strategies behind one config:

* ``union_nms`` -- pool every model's boxes and run per-class greedy NMS.
* ``consensus`` -- cluster overlapping same-class boxes across models and
  keep each cluster's highest-confidence box, provided the cluster is
  supported by at least ``min_votes`` distinct models.
* ``weighted_fusion`` -- per cluster, emit a single box whose coordinates
  are the confidence-and-weight-weighted average of its members, with a
  confidence that shrinks when few models agree.

All strategies are deterministic: confidence ties break by
(model_id, original index), and output never depends on the mapping
iteration order of the input model sets.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping, Sequence

from .dataset_io import DamageClass, Detection, GroundTruthBox
from .errors import EmptyEnsemble, MixedImageIds, UsageError
from .geometry import BBox, iou
from .matching import evaluate

__all__ = [
    "FusionStrategy",
    "FusionConfig",
    "Cluster",
    "load_fusion_config",
    "nms",
    "cluster_detections",
    "fuse",
    "sweep_threshold",
]


class FusionStrategy(str, Enum):
    UNION_NMS = "union_nms"
    CONSENSUS = "consensus"
    WEIGHTED_FUSION = "weighted_fusion"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class FusionConfig:
    """Strategy selector plus thresholds and per-model weights.

    Models missing from ``model_weights`` weigh 1.0. ``min_votes`` applies
    to the consensus strategy; ``skip_box_threshold`` drops weighted-fusion
    output boxes whose fused confidence falls below it.
    """

    strategy: FusionStrategy = FusionStrategy.UNION_NMS
    iou_cluster_threshold: float = 0.5
    min_votes: int = 1
    model_weights: dict[str, float] = field(default_factory=dict)
    skip_box_threshold: float = 0.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "strategy", FusionStrategy(self.strategy))
        except ValueError:
            choices = ", ".join(s.value for s in FusionStrategy)
            raise UsageError(f"unknown strategy {self.strategy!r} (expected one of: {choices})") from None
        if not (0.0 < self.iou_cluster_threshold < 1.0):
            raise UsageError(f"iou_cluster_threshold must be in (0, 1), got {self.iou_cluster_threshold}")
        if self.min_votes < 1:
            raise UsageError(f"min_votes must be >= 1, got {self.min_votes}")
        if self.skip_box_threshold < 0.0:
            raise UsageError(f"skip_box_threshold must be >= 0, got {self.skip_box_threshold}")
        for model_id, weight in self.model_weights.items():
            if weight < 0.0:
                raise UsageError(f"weight for model {model_id!r} must be >= 0, got {weight}")

    def weight(self, model_id: str) -> float:
        return float(self.model_weights.get(model_id, 1.0))


def load_fusion_config(text: str) -> FusionConfig:
    """Parse a plain-text ``key=value`` fusion config.

    Recognized keys: ``strategy``, ``iou_cluster_threshold``, ``min_votes``,
    ``skip_box_threshold``, and ``weight.<model_id>``. Blank lines and
    ``#`` comments are ignored.
    """
    kwargs: dict = {}
    weights: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"config line {lineno}: expected key=value, got {line!r}")
        key = key.strip()
        value = value.strip()
        try:
            if key == "strategy":
                kwargs["strategy"] = value
            elif key == "iou_cluster_threshold":
                kwargs["iou_cluster_threshold"] = float(value)
            elif key == "min_votes":
                kwargs["min_votes"] = int(value)
            elif key == "skip_box_threshold":
                kwargs["skip_box_threshold"] = float(value)
            elif key.startswith("weight."):
                weights[key[len("weight."):]] = float(value)
            else:
                raise UsageError(f"config line {lineno}: unknown key {key!r}")
        except ValueError:
            raise UsageError(f"config line {lineno}: bad value {value!r} for {key!r}") from None
    if weights:
        kwargs["model_weights"] = weights
    return FusionConfig(**kwargs)


@dataclass
class Cluster:
    """Overlapping same-class boxes from the union of all models.

    Every member overlaps the representative (the highest-confidence
    member) above the clustering threshold.
    """

    label: DamageClass
    image_id: str
    members: list[Detection]
    representative: Detection

    def model_ids(self) -> set[str]:
        return {det.model_id for det in self.members}


def _require_single_image(dets: Sequence[Detection]) -> None:
    image_ids = {det.image_id for det in dets}
    if len(image_ids) > 1:
        raise MixedImageIds(f"detections span multiple image ids: {sorted(image_ids)}")


def nms(dets: Sequence[Detection], iou_threshold: float = 0.5) -> list[Detection]:
    """Classic per-class greedy non-maximum suppression on one image.

    Repeatedly keeps the highest-confidence remaining box and discards
    same-class boxes overlapping it with IoU > ``iou_threshold``. Output is
    sorted by descending confidence (ties keep input order).
    """
    if not (0.0 < iou_threshold < 1.0):
        raise UsageError(f"iou_threshold must be in (0, 1), got {iou_threshold}")
    _require_single_image(dets)
    kept: list[Detection] = []
    for det in sorted(dets, key=lambda d: -d.confidence):
        suppressed = any(
            k.label == det.label and iou(k.box, det.box) > iou_threshold for k in kept
        )
        if not suppressed:
            kept.append(det)
    return kept


def _union_in_order(det_sets: Mapping[str, Sequence[Detection]]) -> list[Detection]:
    """Pool all model sets, stamping each box with its model key.

    Order: descending confidence, ties by (model_id, original index), so
    the result is independent of the mapping's iteration order.
    """
    entries: list[tuple[float, str, int, Detection]] = []
    for model_id in sorted(det_sets):
        for index, det in enumerate(det_sets[model_id]):
            if det.model_id != model_id:
                det = replace(det, model_id=model_id)
            entries.append((-det.confidence, model_id, index, det))
    entries.sort(key=lambda e: e[:3])
    return [det for _, _, _, det in entries]


def cluster_detections(
    det_sets: Mapping[str, Sequence[Detection]], cfg: FusionConfig
) -> list[Cluster]:
    """Greedy per-class clustering of one image's pooled detections.

    Boxes are visited in descending confidence order; each joins the first
    existing same-class cluster whose representative overlaps it with
    IoU > ``cfg.iou_cluster_threshold``, otherwise it seeds a new cluster.
    Membership always tests against the running representative, not a
    fused average, so clustering is single-pass and order-stable.
    """
    union = _union_in_order(det_sets)
    _require_single_image(union)
    clusters: list[Cluster] = []
    for det in union:
        for cluster in clusters:
            if cluster.label != det.label:
                continue
            if iou(cluster.representative.box, det.box) > cfg.iou_cluster_threshold:
                cluster.members.append(det)
                if det.confidence > cluster.representative.confidence:
                    cluster.representative = det
                break
        else:
            clusters.append(Cluster(det.label, det.image_id, [det], det))
    return clusters


def _fuse_cluster(cluster: Cluster, cfg: FusionConfig, n_models: int) -> Detection:
    """Weighted-fusion box for one cluster.

    Coordinates are averaged with per-member weight ``w_i * conf_i``; the
    confidence is the weighted mean member confidence scaled by
    (distinct models in cluster) / (models in ensemble).
    """
    members = cluster.members
    conf_weights = [cfg.weight(d.model_id) * d.confidence for d in members]
    weight_sum = sum(conf_weights)
    coords = []
    for attr in ("xmin", "ymin", "xmax", "ymax"):
        values = [getattr(d.box, attr) for d in members]
        if weight_sum > 0.0:
            coords.append(sum(w * v for w, v in zip(conf_weights, values)) / weight_sum)
        else:
            coords.append(sum(values) / len(values))
    member_weights = sum(cfg.weight(d.model_id) for d in members)
    mean_conf = weight_sum / member_weights if member_weights > 0.0 else 0.0
    confidence = mean_conf * (len(cluster.model_ids()) / n_models)
    return Detection(cluster.image_id, cluster.label, BBox(*coords), confidence, model_id="ensemble")


def _fuse_one_image(
    det_sets: Mapping[str, Sequence[Detection]], cfg: FusionConfig, n_models: int
) -> list[Detection]:
    if cfg.strategy is FusionStrategy.UNION_NMS:
        return nms(_union_in_order(det_sets), cfg.iou_cluster_threshold)
    clusters = cluster_detections(det_sets, cfg)
    if cfg.strategy is FusionStrategy.CONSENSUS:
        return [c.representative for c in clusters if len(c.model_ids()) >= cfg.min_votes]
    fused = [_fuse_cluster(c, cfg, n_models) for c in clusters]
    return [det for det in fused if det.confidence >= cfg.skip_box_threshold]


def fuse(
    det_sets: Mapping[str, Sequence[Detection]],
    cfg: FusionConfig | None = None,
    threads: int = 1,
) -> list[Detection]:
    """Fuse N models' detection sets into one, image by image.

    Output is grouped by ascending image id; within an image the strategy's
    own deterministic order applies (descending confidence). Raises
    :class:`EmptyEnsemble` when no model sets are given.
    """
    if not det_sets:
        raise EmptyEnsemble("fusion requires at least one model detection set")
    cfg = cfg or FusionConfig()
    n_models = len(det_sets)
    if cfg.min_votes > n_models:
        raise UsageError(f"min_votes {cfg.min_votes} exceeds the ensemble size {n_models}")
    if all(cfg.weight(model_id) == 0.0 for model_id in det_sets):
        raise UsageError("model weights must not all be zero")

    grouped: dict[str, dict[str, list[Detection]]] = {}
    for model_id, dets in det_sets.items():
        for det in dets:
            grouped.setdefault(det.image_id, {}).setdefault(model_id, []).append(det)

    images = sorted(grouped)

    def fuse_image(image_id: str) -> list[Detection]:
        return _fuse_one_image(grouped[image_id], cfg, n_models)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_image = list(pool.map(fuse_image, images))
    else:
        per_image = [fuse_image(image_id) for image_id in images]

    fused: list[Detection] = []
    for boxes in per_image:
        fused.extend(boxes)
    return fused


def sweep_threshold(
    gt_index: Mapping[str, Sequence[GroundTruthBox]],
    detections: Sequence[Detection],
    grid: Sequence[float],
    iou_threshold: float = 0.5,
    threads: int = 1,
) -> tuple[float, list[tuple[float, float, float, float]]]:
    """Evaluate F1 at every confidence threshold in ``grid``.

    Returns the threshold with the highest F1 (ties go to the lowest
    threshold) and the full (threshold, precision, recall, f1) curve in
    grid order.
    """
    if not grid:
        raise UsageError("threshold grid must not be empty")
    for value in grid:
        if not (0.0 <= value < 1.0):
            raise UsageError(f"grid thresholds must lie in [0, 1), got {value}")
    curve = []
    for threshold in grid:
        report = evaluate(
            gt_index,
            detections,
            conf_threshold=threshold,
            iou_threshold=iou_threshold,
            threads=threads,
        )
        curve.append((threshold, report.precision, report.recall, report.f1))
    best_f1 = max(point[3] for point in curve)
    best_threshold = min(t for t, _, _, f1 in curve if f1 == best_f1)
    return best_threshold, curve
