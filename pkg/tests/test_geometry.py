"""Box arithmetic: construction guards, IoU examples, and invariants."""

import math
import random

import pytest
from hypothesis import given, strategies as st

from helpers import pixel_iou, random_int_box
from rddeval.errors import InvalidBox
from rddeval.geometry import BBox, intersection_area, iou


class TestBBox:
    def test_area_unit_square_scaling(self):
        assert BBox(0, 0, 10, 10).area == 100

    def test_area_fractional(self):
        assert BBox(2, 3, 2.5, 7).area == 2.0

    def test_area_unit_square(self):
        assert BBox(0, 0, 1, 1).area == 1

    def test_width_height(self):
        box = BBox(1, 2, 4, 8)
        assert box.width == 3
        assert box.height == 6

    @pytest.mark.parametrize(
        "coords",
        [
            (0, 0, 0, 10),  # zero width
            (0, 0, 10, 0),  # zero height
            (10, 0, 0, 10),  # inverted x
            (0, 10, 10, 0),  # inverted y
            (5, 5, 5, 5),  # point
            (-1, 0, 10, 10),  # negative coordinate
            (0, 0, math.inf, 10),
            (0, 0, math.nan, 10),
        ],
    )
    def test_invalid_boxes_rejected(self, coords):
        with pytest.raises(InvalidBox):
            BBox(*coords)

    def test_coordinates_coerced_to_float(self):
        box = BBox(1, 2, 3, 4)
        assert isinstance(box.xmin, float)
        assert box == BBox(1.0, 2.0, 3.0, 4.0)


class TestIou:
    def test_identical_boxes(self):
        assert iou(BBox(0, 0, 10, 10), BBox(0, 0, 10, 10)) == 1.0

    def test_disjoint_boxes(self):
        assert iou(BBox(0, 0, 10, 10), BBox(20, 20, 30, 30)) == 0.0

    def test_half_overlap(self):
        # inter 50, union 150 on the integer grid
        value = iou(BBox(0, 0, 10, 10), BBox(5, 0, 15, 10))
        assert value == pytest.approx(1 / 3, abs=1e-12)
        assert value == pytest.approx(pixel_iou(BBox(0, 0, 10, 10), BBox(5, 0, 15, 10)), abs=1e-12)

    def test_edge_touching_is_zero(self):
        assert iou(BBox(0, 0, 10, 10), BBox(10, 0, 20, 10)) == 0.0
        assert iou(BBox(0, 0, 10, 10), BBox(0, 10, 10, 20)) == 0.0

    def test_corner_touching_is_zero(self):
        assert iou(BBox(0, 0, 10, 10), BBox(10, 10, 20, 20)) == 0.0

    def test_contained_box(self):
        assert iou(BBox(0, 0, 10, 10), BBox(2, 2, 4, 4)) == pytest.approx(4 / 100, abs=1e-12)

    def test_intersection_area_disjoint(self):
        assert intersection_area(BBox(0, 0, 1, 1), BBox(5, 5, 6, 6)) == 0.0


def _boxes():
    coord = st.floats(min_value=0, max_value=500, allow_nan=False, width=32)
    size = st.floats(min_value=0.5, max_value=200, allow_nan=False, width=32)
    return st.builds(
        lambda x, y, w, h: BBox(x, y, x + w, y + h), coord, coord, size, size
    )


class TestIouProperties:
    @given(_boxes(), _boxes())
    def test_symmetry_and_bounds(self, a, b):
        ab = iou(a, b)
        assert ab == iou(b, a)
        assert 0.0 <= ab <= 1.0

    @given(_boxes())
    def test_identity(self, box):
        assert iou(box, box) == 1.0

    @given(_boxes(), _boxes(), st.floats(min_value=0, max_value=1000, allow_nan=False, width=32))
    def test_translation_invariance(self, a, b, shift):
        assert iou(a.translate(shift, shift), b.translate(shift, shift)) == pytest.approx(
            iou(a, b), abs=1e-12
        )

    @given(_boxes(), _boxes(), st.floats(min_value=0.015625, max_value=64, allow_nan=False, width=32))
    def test_scale_invariance(self, a, b, factor):
        assert iou(a.scale(factor), b.scale(factor)) == pytest.approx(
            iou(a, b), rel=1e-12, abs=1e-12
        )


def test_pixel_oracle_agreement():
    rng = random.Random(20260810)
    for _ in range(300):
        a = random_int_box(rng, extent=32)
        b = random_int_box(rng, extent=32)
        assert iou(a, b) == pytest.approx(pixel_iou(a, b, extent=32), abs=1e-9)
