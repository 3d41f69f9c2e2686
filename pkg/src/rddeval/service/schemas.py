"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from ..dataset_io import DamageClass
from ..fusion import FusionStrategy


class BoxModel(BaseModel):
    xmin: float
    ymin: float
    xmax: float
    ymax: float


class GroundTruthModel(BaseModel):
    image_id: str
    label: DamageClass
    box: BoxModel


class DetectionModel(BaseModel):
    image_id: str
    label: DamageClass
    box: BoxModel
    confidence: float = 1.0
    model_id: str = "m0"


class EvaluateRequest(BaseModel):
    ground_truth: list[GroundTruthModel]
    detections: list[DetectionModel]
    iou_threshold: float = 0.5
    conf_threshold: float = 0.0


class ScoreModel(BaseModel):
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


class EvaluateResponse(ScoreModel):
    per_class: dict[str, ScoreModel]
    per_country: dict[str, ScoreModel]


class FuseRequest(BaseModel):
    model_sets: dict[str, list[DetectionModel]]
    strategy: FusionStrategy = FusionStrategy.UNION_NMS
    iou_cluster_threshold: float = 0.5
    min_votes: int = 1
    model_weights: dict[str, float] = Field(default_factory=dict)
    skip_box_threshold: float = 0.0


class FuseResponse(BaseModel):
    detections: list[DetectionModel]


class SweepRequest(BaseModel):
    ground_truth: list[GroundTruthModel]
    detections: list[DetectionModel]
    grid: list[float]
    iou_threshold: float = 0.5


class CurvePoint(BaseModel):
    threshold: float
    precision: float
    recall: float
    f1: float


class SweepResponse(BaseModel):
    best_threshold: float
    best_f1: float
    curve: list[CurvePoint]


class LabeledBox(BaseModel):
    label: DamageClass
    box: BoxModel


class ImageAnnotationModel(BaseModel):
    image_id: str
    boxes: list[LabeledBox] = Field(default_factory=list)


class StatsRequest(BaseModel):
    images: list[ImageAnnotationModel]


class StatsResponse(BaseModel):
    images_per_country: dict[str, int]
    boxes_per_class: dict[str, int]
    total_images: int
    total_boxes: int


class ConvertRequest(BaseModel):
    text: str
    in_format: Literal["submission", "scored"]
    out_format: Literal["submission", "scored"]
    conf_threshold: float = 0.0
    max_per_image: Optional[int] = None


class ConvertResponse(BaseModel):
    text: str


class ScoreRequest(BaseModel):
    """Score a raw detection file against the server's preloaded ground truth."""

    text: str
    format: Literal["submission", "scored"] = "submission"
    iou_threshold: float = 0.5
    conf_threshold: float = 0.0


class HealthResponse(BaseModel):
    status: str
    version: str
    ground_truth_images: Optional[int] = None
