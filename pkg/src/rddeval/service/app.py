"""FastAPI application wrapping the core evaluation and fusion package.

Start with ``rddeval serve``; pass ``--gt`` to preload ground truth so
clients can POST raw detection files to ``/score``, mirroring a challenge
scoring platform.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from .. import __version__, dataset_io, fusion, matching
from ..errors import RddEvalError
from ..geometry import BBox
from . import schemas

__all__ = ["create_app"]


def _to_box(model: schemas.BoxModel) -> BBox:
    return BBox(model.xmin, model.ymin, model.xmax, model.ymax)


def _from_box(box: BBox) -> schemas.BoxModel:
    return schemas.BoxModel(xmin=box.xmin, ymin=box.ymin, xmax=box.xmax, ymax=box.ymax)


def _to_ground_truth(model: schemas.GroundTruthModel) -> dataset_io.GroundTruthBox:
    return dataset_io.GroundTruthBox(model.image_id, model.label, _to_box(model.box))


def _to_detection(model: schemas.DetectionModel) -> dataset_io.Detection:
    return dataset_io.Detection(
        model.image_id, model.label, _to_box(model.box), model.confidence, model.model_id
    )


def _from_detection(det: dataset_io.Detection) -> schemas.DetectionModel:
    return schemas.DetectionModel(
        image_id=det.image_id,
        label=det.label,
        box=_from_box(det.box),
        confidence=det.confidence,
        model_id=det.model_id,
    )


def _score_model(score: matching.GroupScore) -> schemas.ScoreModel:
    return schemas.ScoreModel(
        tp=score.counts.tp,
        fp=score.counts.fp,
        fn=score.counts.fn,
        precision=score.precision,
        recall=score.recall,
        f1=score.f1,
    )


def _report_response(report: matching.MetricsReport) -> schemas.EvaluateResponse:
    return schemas.EvaluateResponse(
        tp=report.counts.tp,
        fp=report.counts.fp,
        fn=report.counts.fn,
        precision=report.precision,
        recall=report.recall,
        f1=report.f1,
        per_class={cls.value: _score_model(s) for cls, s in report.per_class.items()},
        per_country={c.value: _score_model(s) for c, s in report.per_country.items()},
    )


def _index_ground_truth(models: list[schemas.GroundTruthModel]):
    index: dict[str, list[dataset_io.GroundTruthBox]] = {}
    for model in models:
        index.setdefault(model.image_id, []).append(_to_ground_truth(model))
    return index


def create_app(gt_source: str | None = None, strict: bool = False) -> FastAPI:
    """Build the service; ``gt_source`` preloads ground truth for /score."""
    app = FastAPI(title="rddeval", version=__version__)

    gt_index: dict[str, list[dataset_io.GroundTruthBox]] | None = None
    if gt_source is not None:
        annotations = dataset_io.load_annotations(gt_source, strict=strict)
        gt_index = dataset_io.ground_truth_index(annotations)

    @app.exception_handler(RddEvalError)
    def _domain_error(request: Request, exc: RddEvalError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(
            status="ok",
            version=__version__,
            ground_truth_images=None if gt_index is None else len(gt_index),
        )

    @app.post("/evaluate", response_model=schemas.EvaluateResponse)
    def evaluate(request: schemas.EvaluateRequest) -> schemas.EvaluateResponse:
        report = matching.evaluate(
            _index_ground_truth(request.ground_truth),
            [_to_detection(d) for d in request.detections],
            conf_threshold=request.conf_threshold,
            iou_threshold=request.iou_threshold,
        )
        return _report_response(report)

    @app.post("/fuse", response_model=schemas.FuseResponse)
    def fuse_sets(request: schemas.FuseRequest) -> schemas.FuseResponse:
        det_sets = {
            model_id: [_to_detection(d) for d in dets]
            for model_id, dets in request.model_sets.items()
        }
        cfg = fusion.FusionConfig(
            strategy=request.strategy,
            iou_cluster_threshold=request.iou_cluster_threshold,
            min_votes=request.min_votes,
            model_weights=request.model_weights,
            skip_box_threshold=request.skip_box_threshold,
        )
        fused = fusion.fuse(det_sets, cfg)
        return schemas.FuseResponse(detections=[_from_detection(d) for d in fused])

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(request: schemas.SweepRequest) -> schemas.SweepResponse:
        best, curve = fusion.sweep_threshold(
            _index_ground_truth(request.ground_truth),
            [_to_detection(d) for d in request.detections],
            request.grid,
            iou_threshold=request.iou_threshold,
        )
        best_f1 = max(point[3] for point in curve)
        return schemas.SweepResponse(
            best_threshold=best,
            best_f1=best_f1,
            curve=[
                schemas.CurvePoint(threshold=t, precision=p, recall=r, f1=f)
                for t, p, r, f in curve
            ],
        )

    @app.post("/stats", response_model=schemas.StatsResponse)
    def stats(request: schemas.StatsRequest) -> schemas.StatsResponse:
        annotations = [
            dataset_io.VocAnnotation(
                image.image_id,
                0,
                0,
                [
                    dataset_io.GroundTruthBox(image.image_id, b.label, _to_box(b.box))
                    for b in image.boxes
                ],
            )
            for image in request.images
        ]
        result = dataset_io.dataset_stats(annotations)
        return schemas.StatsResponse(
            images_per_country={c.value: n for c, n in result.images_per_country.items()},
            boxes_per_class={cls.value: n for cls, n in result.boxes_per_class.items()},
            total_images=result.total_images,
            total_boxes=result.total_boxes,
        )

    @app.post("/convert", response_model=schemas.ConvertResponse)
    def convert(request: schemas.ConvertRequest) -> schemas.ConvertResponse:
        detections = dataset_io.parse_detections(request.text, fmt=request.in_format)
        if request.out_format == "submission":
            text = dataset_io.write_submission(
                detections, request.conf_threshold, request.max_per_image
            )
        else:
            selected = dataset_io.select_detections(
                detections, request.conf_threshold, request.max_per_image
            )
            text = dataset_io.write_scored(selected)
        return schemas.ConvertResponse(text=text)

    @app.post("/score", response_model=schemas.EvaluateResponse)
    def score(request: schemas.ScoreRequest) -> schemas.EvaluateResponse:
        if gt_index is None:
            raise HTTPException(
                status_code=409,
                detail="no ground truth loaded; start the server with --gt",
            )
        detections = dataset_io.parse_detections(request.text, fmt=request.format)
        report = matching.evaluate(
            gt_index,
            detections,
            conf_threshold=request.conf_threshold,
            iou_threshold=request.iou_threshold,
        )
        return _report_response(report)

    return app
