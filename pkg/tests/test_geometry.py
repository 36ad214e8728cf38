import numpy as np
import pytest

from cxkit.geometry import (
    CentreBox,
    CornerBox,
    DegenerateBoxWarning,
    area,
    giou,
    intersection_area,
    iou,
    to_centre,
    to_corner,
)

from oracles import mc_box_areas


def random_corner_box(rng, lo=0.35, hi=0.95):
    w = rng.uniform(lo, hi)
    h = rng.uniform(lo, hi)
    x1 = rng.uniform(0, 1 - w)
    y1 = rng.uniform(0, 1 - h)
    return CornerBox(x1, y1, x1 + w, y1 + h)


class TestConversions:
    def test_symmetric_expansion(self):
        assert to_corner(CentreBox(0.5, 0.5, 0.2, 0.2)).as_tuple() == pytest.approx((0.4, 0.4, 0.6, 0.6))

    def test_clip_at_origin(self):
        # Direct arithmetic: 0 - 0.1 clips to 0, 0 + 0.1 stays.
        assert to_corner(CentreBox(0.0, 0.0, 0.2, 0.2)).as_tuple() == pytest.approx((0.0, 0.0, 0.1, 0.1))

    def test_degenerate_zero_size(self):
        assert to_corner(CentreBox(0.5, 0.5, 0.0, 0.0)).as_tuple() == pytest.approx((0.5, 0.5, 0.5, 0.5))

    def test_round_trip_without_clipping(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            w, h = rng.uniform(0.01, 0.4, size=2)
            cx = rng.uniform(w / 2, 1 - w / 2)
            cy = rng.uniform(h / 2, 1 - h / 2)
            b = CentreBox(cx, cy, w, h)
            back = to_centre(to_corner(b))
            assert back.as_tuple() == pytest.approx(b.as_tuple(), abs=1e-12)

    def test_invalid_boxes_rejected(self):
        with pytest.raises(ValueError):
            CornerBox(0.5, 0.0, 0.4, 1.0)
        with pytest.raises(ValueError):
            CentreBox(0.5, 0.5, -0.1, 0.2)


class TestOverlap:
    def test_identical(self):
        b = CornerBox(0, 0, 1, 1)
        assert intersection_area(b, b) == 1.0
        assert iou(b, b) == 1.0
        assert giou(b, b) == 1.0

    def test_disjoint_corner_touch(self):
        a = CornerBox(0, 0, 0.5, 0.5)
        b = CornerBox(0.5, 0.5, 1, 1)
        assert intersection_area(a, b) == 0.0
        assert iou(a, b) == 0.0
        # Hand computation: inter 0, union 0.5, enclosure 1.
        assert giou(a, b) == pytest.approx(-0.5)

    def test_half_overlap(self):
        a = CornerBox(0, 0, 1, 1)
        b = CornerBox(0, 0, 0.5, 1)
        assert intersection_area(a, b) == pytest.approx(0.5)
        assert iou(a, b) == pytest.approx(0.5)
        # Enclosure equals a, so no penalty term.
        assert giou(a, b) == pytest.approx(0.5)

    def test_symmetry_and_axis_swap(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            a = random_corner_box(rng, 0.05, 0.6)
            b = random_corner_box(rng, 0.05, 0.6)
            assert iou(a, b) == pytest.approx(iou(b, a), abs=1e-15)
            assert giou(a, b) == pytest.approx(giou(b, a), abs=1e-15)
            at = CornerBox(a.y1, a.x1, a.y2, a.x2)
            bt = CornerBox(b.y1, b.x1, b.y2, b.x2)
            assert iou(at, bt) == pytest.approx(iou(a, b), abs=1e-15)
            assert giou(at, bt) == pytest.approx(giou(a, b), abs=1e-15)

    def test_bounds_and_ordering(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            a = random_corner_box(rng, 0.05, 0.6)
            b = random_corner_box(rng, 0.05, 0.6)
            inter = intersection_area(a, b)
            assert 0.0 <= inter <= min(area(a), area(b)) + 1e-15
            assert giou(a, b) <= iou(a, b) + 1e-15
            assert -1.0 <= giou(a, b) <= 1.0

    def test_degenerate_pair_warns(self):
        p = CornerBox(0.5, 0.5, 0.5, 0.5)
        with pytest.warns(DegenerateBoxWarning):
            assert iou(p, p) == 0.0
        with pytest.warns(DegenerateBoxWarning):
            assert giou(p, p) == 0.0

    def test_one_degenerate_is_total(self):
        p = CornerBox(0.5, 0.5, 0.5, 0.5)
        b = CornerBox(0, 0, 1, 1)
        assert iou(p, b) == 0.0
        assert giou(p, b) == pytest.approx(0.0)


class TestMonteCarloOracle:
    def test_analytic_matches_sampled(self):
        rng = np.random.default_rng(2024)
        for trial in range(20):
            a = random_corner_box(rng)
            b = random_corner_box(rng)
            mc_inter, mc_union, mc_enclose = mc_box_areas(a.as_tuple(), b.as_tuple(), seed=trial)
            assert intersection_area(a, b) == pytest.approx(mc_inter, abs=2e-3)
            assert iou(a, b) == pytest.approx(mc_inter / mc_union, abs=2e-3)
            expected_giou = mc_inter / mc_union - (mc_enclose - mc_union) / mc_enclose
            assert giou(a, b) == pytest.approx(expected_giou, abs=2e-3)
