"""Shared fixtures: the hand-built golden corpus and VOC XML helpers."""

from __future__ import annotations

from pathlib import Path

import pytest

from rddeval.dataset_io import DamageClass, Detection, GroundTruthBox, write_scored
from rddeval.geometry import BBox

# Golden corpus: 3 images, 6 ground truths, 7 detections, hand-checked to
# produce tp=4, fp=3, fn=2 under class-matched greedy matching at IoU > 0.5.
#
# Czech_000001: both dets match (IoU 1.0 and 9025/10975), the D20 det has no
#               D20 ground truth -> fp.
# India_000002: D20 det matches; the D40 det is disjoint from the D40 gt -> fp
#               and the gt stays unmatched -> fn.
# Japan_000003: the conf-1.0 det takes the D00 gt, the duplicate is fp; the
#               D40 gt is undetected -> fn.

GOLDEN_GTS = [
    GroundTruthBox("Czech_000001", DamageClass.D00, BBox(0, 0, 100, 100)),
    GroundTruthBox("Czech_000001", DamageClass.D10, BBox(200, 200, 300, 300)),
    GroundTruthBox("India_000002", DamageClass.D20, BBox(50, 50, 150, 150)),
    GroundTruthBox("India_000002", DamageClass.D40, BBox(0, 0, 30, 30)),
    GroundTruthBox("Japan_000003", DamageClass.D00, BBox(10, 10, 110, 110)),
    GroundTruthBox("Japan_000003", DamageClass.D40, BBox(300, 300, 400, 400)),
]

GOLDEN_DETS = [
    Detection("Czech_000001", DamageClass.D00, BBox(0, 0, 100, 100), 0.9),
    Detection("Czech_000001", DamageClass.D10, BBox(205, 205, 305, 305), 0.8),
    Detection("Czech_000001", DamageClass.D20, BBox(400, 400, 500, 500), 0.7),
    Detection("India_000002", DamageClass.D20, BBox(55, 55, 155, 155), 0.95),
    Detection("India_000002", DamageClass.D40, BBox(100, 100, 130, 130), 0.5),
    Detection("Japan_000003", DamageClass.D00, BBox(10, 10, 110, 110), 1.0),
    Detection("Japan_000003", DamageClass.D00, BBox(12, 12, 112, 112), 0.6),
]

GOLDEN_COUNTS = (4, 3, 2)  # tp, fp, fn
GOLDEN_F1 = 0.6153846153846154  # 8/13


def golden_gt_index() -> dict[str, list[GroundTruthBox]]:
    index: dict[str, list[GroundTruthBox]] = {}
    for gt in GOLDEN_GTS:
        index.setdefault(gt.image_id, []).append(gt)
    return index


def voc_xml(filename: str, objects, width: int = 600, height: int = 600) -> str:
    """Minimal VOC annotation document; objects = [(name, x1, y1, x2, y2)]."""
    parts = [
        "<annotation>",
        f"  <filename>{filename}</filename>",
        f"  <size><width>{width}</width><height>{height}</height></size>",
    ]
    for name, x1, y1, x2, y2 in objects:
        parts.append(
            "  <object>"
            f"<name>{name}</name>"
            "<bndbox>"
            f"<xmin>{x1}</xmin><ymin>{y1}</ymin><xmax>{x2}</xmax><ymax>{y2}</ymax>"
            "</bndbox>"
            "</object>"
        )
    parts.append("</annotation>")
    return "\n".join(parts) + "\n"


def write_gt_dir(gts, directory: Path) -> Path:
    """Write one VOC XML per image into ``directory``."""
    directory.mkdir(parents=True, exist_ok=True)
    by_image: dict[str, list] = {}
    for gt in gts:
        by_image.setdefault(gt.image_id, []).append(gt)
    for image_id, boxes in by_image.items():
        objects = [
            (gt.label.value, gt.box.xmin, gt.box.ymin, gt.box.xmax, gt.box.ymax)
            for gt in boxes
        ]
        (directory / f"{image_id}.xml").write_text(
            voc_xml(f"{image_id}.jpg", objects), encoding="utf-8"
        )
    return directory


@pytest.fixture
def golden_files(tmp_path):
    """Golden corpus on disk: (gt directory, scored detection file)."""
    gt_dir = write_gt_dir(GOLDEN_GTS, tmp_path / "gt")
    det_file = tmp_path / "dets.txt"
    det_file.write_text(write_scored(GOLDEN_DETS), encoding="utf-8")
    return gt_dir, det_file
