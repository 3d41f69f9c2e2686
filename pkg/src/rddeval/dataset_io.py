"""Annotation and detection file formats for the 4-class road-damage task.

Ground truth ships as Pascal-VOC XML, one file per image. Detections travel
in two text formats:

* ``submission`` -- one line per image:
  ``image_id,label xmin ymin xmax ymax [label xmin ymin xmax ymax ...]``
  with labels encoded 1..4 for D00, D10, D20, D40, integer coordinates,
  and no confidences (parsed confidence defaults to 1.0).
* ``scored`` -- one line per box:
  ``image_id class confidence xmin ymin xmax ymax`` whitespace-separated,
  with the class written as its D-code.

Both formats are UTF-8; LF line endings on write, LF or CRLF accepted on
read.
"""

from __future__ import annotations

import math
import os
import sys
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .errors import (
    ConfidenceOutOfRange,
    DataError,
    InvalidBox,
    MalformedXml,
    ParseError,
    UnknownClass,
    UsageError,
)
from .geometry import BBox

__all__ = [
    "DamageClass",
    "Country",
    "GroundTruthBox",
    "Detection",
    "VocAnnotation",
    "DatasetStats",
    "CLASS_IDS",
    "ID_CLASSES",
    "country_of",
    "parse_voc_annotation",
    "load_annotations",
    "ground_truth_index",
    "parse_detections",
    "select_detections",
    "write_submission",
    "write_scored",
    "dataset_stats",
    "format_number",
]


class DamageClass(str, Enum):
    """Closed damage taxonomy: any other label is an error or is dropped."""

    D00 = "D00"  # longitudinal linear crack
    D10 = "D10"  # lateral linear crack
    D20 = "D20"  # alligator crack
    D40 = "D40"  # pothole

    def __str__(self) -> str:
        return self.value


class Country(str, Enum):
    CZECH = "Czech"
    INDIA = "India"
    JAPAN = "Japan"
    UNKNOWN = "Unknown"

    def __str__(self) -> str:
        return self.value


# Submission wire encoding of the damage classes.
CLASS_IDS: dict[DamageClass, int] = {
    DamageClass.D00: 1,
    DamageClass.D10: 2,
    DamageClass.D20: 3,
    DamageClass.D40: 4,
}
ID_CLASSES: dict[int, DamageClass] = {v: k for k, v in CLASS_IDS.items()}


def country_of(image_id: str) -> Country:
    """Country derived from the image-id prefix (case-sensitive)."""
    for country in (Country.CZECH, Country.INDIA, Country.JAPAN):
        if image_id.startswith(country.value):
            return country
    return Country.UNKNOWN


@dataclass(frozen=True)
class GroundTruthBox:
    image_id: str
    label: DamageClass
    box: BBox

    def __post_init__(self):
        if not self.image_id:
            raise ValueError("ground-truth box requires a non-empty image_id")


@dataclass(frozen=True)
class Detection:
    """A predicted box with confidence and the id of the model that emitted it."""

    image_id: str
    label: DamageClass
    box: BBox
    confidence: float = 1.0
    model_id: str = "m0"

    def __post_init__(self):
        if not self.image_id:
            raise ValueError("detection requires a non-empty image_id")
        conf = float(self.confidence)
        if not (0.0 <= conf <= 1.0):
            raise ConfidenceOutOfRange(f"confidence {self.confidence!r} outside [0, 1]")
        object.__setattr__(self, "confidence", conf)


@dataclass(frozen=True)
class VocAnnotation:
    """One parsed annotation file: image identity, size, and its boxes.

    ``warnings`` holds one message per object dropped in lenient mode.
    """

    image_id: str
    width: int
    height: int
    boxes: list[GroundTruthBox] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class DatasetStats:
    images_per_country: dict[Country, int]
    boxes_per_class: dict[DamageClass, int]
    total_images: int
    total_boxes: int


_IMAGE_EXTENSIONS = {".jpg", ".jpeg", ".png", ".bmp", ".gif", ".tif", ".tiff", ".webp"}


def _strip_image_extension(name: str) -> str:
    stem, ext = os.path.splitext(name)
    if ext.lower() in _IMAGE_EXTENSIONS:
        return stem
    return name


def _child_text(parent: ET.Element, tag: str, context: str) -> str:
    node = parent.find(tag)
    if node is None or node.text is None or not node.text.strip():
        raise MalformedXml(f"missing <{tag}> in {context}")
    return node.text.strip()


def _child_number(parent: ET.Element, tag: str, context: str) -> float:
    text = _child_text(parent, tag, context)
    try:
        return float(text)
    except ValueError:
        raise MalformedXml(f"<{tag}> in {context} is not numeric: {text!r}") from None


def parse_voc_annotation(xml_text: str, strict: bool = False) -> VocAnnotation:
    """Parse one Pascal-VOC annotation document.

    Objects whose ``<name>`` is not a known damage class raise
    :class:`UnknownClass` in strict mode and are dropped with a warning
    otherwise. The image id is the ``<filename>`` with its image extension
    stripped.
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise MalformedXml(f"not well-formed XML: {exc}") from None
    if root.tag != "annotation":
        raise MalformedXml(f"expected <annotation> root, found <{root.tag}>")

    image_id = _strip_image_extension(_child_text(root, "filename", "<annotation>"))
    size = root.find("size")
    if size is None:
        raise MalformedXml(f"missing <size> in annotation for {image_id}")
    width = int(_child_number(size, "width", "<size>"))
    height = int(_child_number(size, "height", "<size>"))

    boxes: list[GroundTruthBox] = []
    warnings: list[str] = []
    for obj in root.findall("object"):
        name = _child_text(obj, "name", "<object>")
        try:
            label = DamageClass(name)
        except ValueError:
            if strict:
                raise UnknownClass(f"unknown damage class {name!r} in {image_id}") from None
            warnings.append(f"dropped object with unknown class {name!r}")
            continue
        bndbox = obj.find("bndbox")
        if bndbox is None:
            raise MalformedXml(f"<object> without <bndbox> in {image_id}")
        coords = [_child_number(bndbox, tag, "<bndbox>") for tag in ("xmin", "ymin", "xmax", "ymax")]
        try:
            box = BBox(*coords)
        except InvalidBox as exc:
            raise InvalidBox(f"{image_id}: {exc}") from None
        boxes.append(GroundTruthBox(image_id, label, box))
    return VocAnnotation(image_id, width, height, boxes, warnings)


def _warn_to_stderr(message: str) -> None:
    print(message, file=sys.stderr)


def _annotation_paths(source: Path) -> list[Path]:
    if source.is_dir():
        return sorted(source.rglob("*.xml"))
    if source.is_file():
        if source.suffix.lower() == ".xml":
            return [source]
        # Anything else is a list file: one annotation path per line.
        paths = []
        for raw in source.read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if line and not line.startswith("#"):
                paths.append(Path(line))
        return paths
    raise UsageError(f"no such ground-truth source: {source}")


def load_annotations(
    source: str | Path,
    strict: bool = False,
    warn: Callable[[str], None] = _warn_to_stderr,
) -> list[VocAnnotation]:
    """Load VOC annotations from a directory tree, an XML file, or a list file.

    Parser warnings are forwarded to ``warn`` as ``WARN <file>:<line>
    <message>`` lines (standard error by default). XML carries no usable
    line information, so those warnings report line 0.
    """
    annotations = []
    for path in _annotation_paths(Path(source)):
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read annotation file {path}: {exc}") from None
        try:
            annotation = parse_voc_annotation(text, strict=strict)
        except DataError as exc:
            raise type(exc)(f"{path}: {exc}") from None
        for message in annotation.warnings:
            warn(f"WARN {path}:0 {message}")
        annotations.append(annotation)
    return annotations


def ground_truth_index(annotations: Iterable[VocAnnotation]) -> dict[str, list[GroundTruthBox]]:
    """Map image_id to its ground-truth boxes; background images map to []."""
    index: dict[str, list[GroundTruthBox]] = {}
    for annotation in annotations:
        index.setdefault(annotation.image_id, []).extend(annotation.boxes)
    return index


def parse_detections(text: str, fmt: str = "submission", model_id: str = "m0") -> list[Detection]:
    """Parse a detection file, preserving input order.

    ``fmt`` selects the wire format (``submission`` or ``scored``); every
    returned detection is stamped with ``model_id``.
    """
    if fmt == "submission":
        return _parse_submission(text, model_id)
    if fmt == "scored":
        return _parse_scored(text, model_id)
    raise UsageError(f"unknown detection format {fmt!r} (expected 'submission' or 'scored')")


def _parse_float(token: str, lineno: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"{what} is not numeric: {token!r}", line=lineno) from None
    if not math.isfinite(value):
        raise ParseError(f"{what} is not finite: {token!r}", line=lineno)
    return value


def _build_box(coords: Sequence[float], lineno: int) -> BBox:
    try:
        return BBox(*coords)
    except InvalidBox as exc:
        raise InvalidBox(f"line {lineno}: {exc}") from None


def _parse_submission(text: str, model_id: str) -> list[Detection]:
    detections: list[Detection] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        image_field, sep, prediction = line.partition(",")
        if not sep:
            raise ParseError("expected ',' after the image id", line=lineno)
        image_id = _strip_image_extension(image_field.strip())
        if not image_id:
            raise ParseError("empty image id", line=lineno)
        tokens = prediction.split()
        if len(tokens) % 5 != 0:
            raise ParseError(
                f"prediction string has {len(tokens)} tokens, expected a multiple of 5",
                line=lineno,
            )
        for k in range(0, len(tokens), 5):
            try:
                class_id = int(tokens[k])
            except ValueError:
                raise ParseError(f"class id is not an integer: {tokens[k]!r}", line=lineno) from None
            label = ID_CLASSES.get(class_id)
            if label is None:
                raise ParseError(f"class id {class_id} outside 1..4", line=lineno)
            coords = [
                _parse_float(tokens[k + i], lineno, "coordinate") for i in range(1, 5)
            ]
            box = _build_box(coords, lineno)
            detections.append(Detection(image_id, label, box, confidence=1.0, model_id=model_id))
    return detections


def _parse_scored(text: str, model_id: str) -> list[Detection]:
    detections: list[Detection] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 7:
            raise ParseError(f"expected 7 fields, got {len(parts)}", line=lineno)
        image_id = _strip_image_extension(parts[0])
        try:
            label = DamageClass(parts[1])
        except ValueError:
            raise ParseError(f"unknown damage class {parts[1]!r}", line=lineno) from None
        confidence = _parse_float(parts[2], lineno, "confidence")
        if not (0.0 <= confidence <= 1.0):
            raise ConfidenceOutOfRange(f"line {lineno}: confidence {confidence!r} outside [0, 1]")
        coords = [_parse_float(token, lineno, "coordinate") for token in parts[3:7]]
        box = _build_box(coords, lineno)
        detections.append(Detection(image_id, label, box, confidence, model_id=model_id))
    return detections


def select_detections(
    detections: Sequence[Detection],
    conf_threshold: float = 0.0,
    max_per_image: int | None = None,
) -> list[Detection]:
    """Confidence-gate and cap detections per image.

    Boxes with confidence below ``conf_threshold`` are dropped; if
    ``max_per_image`` is set, only the highest-confidence boxes survive
    (stable order: descending confidence, then input order). Image groups
    keep their first-appearance order.
    """
    by_image: dict[str, list[Detection]] = {}
    for det in detections:
        by_image.setdefault(det.image_id, []).append(det)
    selected: list[Detection] = []
    for group in by_image.values():
        kept = sorted(
            (d for d in group if d.confidence >= conf_threshold),
            key=lambda d: -d.confidence,
        )
        if max_per_image is not None:
            kept = kept[:max_per_image]
        selected.extend(kept)
    return selected


def _round_half_up(value: float) -> int:
    return math.floor(value + 0.5)


def write_submission(
    detections: Sequence[Detection],
    conf_threshold: float = 0.0,
    max_per_image: int | None = None,
) -> str:
    """Serialize detections to the submission format.

    Emits one line per image present in the input (first-appearance order),
    even when every box of that image was filtered out. Coordinates are
    rounded half-up to integers; boxes are ordered by descending confidence,
    ties by input order.
    """
    image_order: list[str] = []
    by_image: dict[str, list[Detection]] = {}
    for det in detections:
        if det.image_id not in by_image:
            image_order.append(det.image_id)
            by_image[det.image_id] = []
        by_image[det.image_id].append(det)

    lines = []
    for image_id in image_order:
        kept = select_detections(by_image[image_id], conf_threshold, max_per_image)
        tokens: list[str] = []
        for det in kept:
            tokens.append(str(CLASS_IDS[det.label]))
            tokens.extend(
                str(_round_half_up(c))
                for c in (det.box.xmin, det.box.ymin, det.box.xmax, det.box.ymax)
            )
        lines.append(f"{image_id}," + " ".join(tokens))
    if not lines:
        return ""
    return "\n".join(lines) + "\n"


def format_number(value: float) -> str:
    """Shortest decimal form that round-trips through float() exactly."""
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def write_scored(detections: Sequence[Detection]) -> str:
    """Serialize detections to the scored format, one box per line, input order."""
    lines = []
    for det in detections:
        fields = [
            det.image_id,
            det.label.value,
            format_number(det.confidence),
            format_number(det.box.xmin),
            format_number(det.box.ymin),
            format_number(det.box.xmax),
            format_number(det.box.ymax),
        ]
        lines.append(" ".join(fields))
    if not lines:
        return ""
    return "\n".join(lines) + "\n"


def dataset_stats(annotations: Iterable[VocAnnotation]) -> DatasetStats:
    """Per-country image counts and per-class box counts, with totals."""
    images_per_country = {country: 0 for country in Country}
    boxes_per_class = {cls: 0 for cls in DamageClass}
    total_images = 0
    total_boxes = 0
    for annotation in annotations:
        images_per_country[country_of(annotation.image_id)] += 1
        total_images += 1
        for gt in annotation.boxes:
            boxes_per_class[gt.label] += 1
            total_boxes += 1
    return DatasetStats(images_per_country, boxes_per_class, total_images, total_boxes)
