"""Axis-aligned box arithmetic: area, intersection, Intersection-over-Union.

A box is the closed region [xmin, xmax] x [ymin, ymax] in real-valued pixel
coordinates; width is ``xmax - xmin`` with no "+1 pixel" correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidBox

__all__ = ["BBox", "intersection_area", "iou"]


@dataclass(frozen=True)
class BBox:
    """Axis-aligned rectangle with strictly positive area.

    Coordinates must be finite, non-negative, and satisfy ``xmin < xmax``
    and ``ymin < ymax``; anything else raises :class:`InvalidBox` at
    construction time rather than being silently fixed.
    """

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        for name in ("xmin", "ymin", "xmax", "ymax"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidBox(f"{name} must be finite, got {value!r}")
            if value < 0.0:
                raise InvalidBox(f"{name} must be >= 0, got {value!r}")
            object.__setattr__(self, name, value)
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise InvalidBox(
                f"box ({self.xmin}, {self.ymin}, {self.xmax}, {self.ymax}) "
                "is inverted or has zero area"
            )

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def area(self) -> float:
        """Box area in square pixels; always > 0 by construction."""
        return self.width * self.height

    def translate(self, dx: float, dy: float) -> BBox:
        return BBox(self.xmin + dx, self.ymin + dy, self.xmax + dx, self.ymax + dy)

    def scale(self, factor: float) -> BBox:
        """Scale all coordinates about the origin by ``factor`` > 0."""
        return BBox(
            self.xmin * factor, self.ymin * factor, self.xmax * factor, self.ymax * factor
        )


def intersection_area(a: BBox, b: BBox) -> float:
    """Overlap area of two boxes; 0 when disjoint or touching only at an edge."""
    iw = min(a.xmax, b.xmax) - max(a.xmin, b.xmin)
    ih = min(a.ymax, b.ymax) - max(a.ymin, b.ymin)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    return iw * ih


def iou(a: BBox, b: BBox) -> float:
    """Intersection over Union in [0, 1].

    Returns exactly 1.0 for identical boxes and exactly 0.0 when the
    interiors are disjoint. Symmetric in its arguments.
    """
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    return inter / (a.area + b.area - inter)
