import numpy as np
import pytest

from cxkit.geometry import CentreBox
from cxkit.gradcheck import check_loss, fd_gradient, run_suite, sample_pairs
from cxkit.heatmap import Heatmap
from cxkit.losses import (
    LossWeights,
    area_loss,
    centre_loss,
    giou_loss,
    question_loss,
    total_objective,
)

BEST_CROP_WEIGHTS = LossWeights(2.5, 2.0, 0.02, 0.5, 0.25)


class TestGiouLoss:
    def test_zero_at_identity(self):
        b = CentreBox(0.4, 0.6, 0.3, 0.2)
        value, grad = giou_loss(b, b)
        assert value == pytest.approx(0.0)
        assert grad.d_cx == 0.0 and grad.d_cy == 0.0

    def test_disjoint_value(self):
        value, _ = giou_loss(CentreBox(0.25, 0.25, 0.5, 0.5), CentreBox(0.75, 0.75, 0.5, 0.5))
        assert value == pytest.approx(1.5)

    def test_range(self):
        rng = np.random.default_rng(0)
        for pred, target in sample_pairs(300, 1):
            value, _ = giou_loss(pred, target)
            assert 0.0 <= value <= 2.0

    def test_degenerate_target_rejected(self):
        with pytest.raises(ValueError):
            giou_loss(CentreBox(0.5, 0.5, 0.2, 0.2), CentreBox(0.5, 0.5, 0.0, 0.1))

    def test_gradient_spot_check(self):
        pred = CentreBox(0.42, 0.37, 0.21, 0.33)
        target = CentreBox(0.6, 0.55, 0.3, 0.25)
        _, grad = giou_loss(pred, target)
        numeric = fd_gradient(giou_loss, pred, target)
        assert grad.as_array() == pytest.approx(numeric, rel=1e-5, abs=1e-7)


class TestCentreLoss:
    def test_identity(self):
        b = CentreBox(0.5, 0.5, 0.1, 0.1)
        value, grad = centre_loss(b, b)
        assert value == 0.0
        assert np.all(grad.as_array() == 0.0)

    def test_documented_distance(self):
        value, grad = centre_loss(CentreBox(0.5, 0.5, 0.1, 0.1), CentreBox(0.5, 0.9, 0.1, 0.1))
        assert value == pytest.approx(0.4)
        assert grad.d_cy == pytest.approx(-1.0)
        assert grad.d_w == 0.0 and grad.d_h == 0.0

    def test_unit_gradient_norm(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            pred = CentreBox(*rng.uniform(0.2, 0.8, 2), 0.1, 0.1)
            target = CentreBox(*rng.uniform(0.2, 0.8, 2), 0.1, 0.1)
            if (pred.cx, pred.cy) == (target.cx, target.cy):
                continue
            _, grad = centre_loss(pred, target)
            assert np.hypot(grad.d_cx, grad.d_cy) == pytest.approx(1.0)


class TestAreaLoss:
    def test_equal_areas(self):
        value, _ = area_loss(CentreBox(0.3, 0.3, 0.2, 0.3), CentreBox(0.7, 0.7, 0.3, 0.2))
        assert value == pytest.approx(0.0)

    def test_quadruple_area(self):
        value, _ = area_loss(CentreBox(0.5, 0.5, 0.4, 0.4), CentreBox(0.5, 0.5, 0.2, 0.2))
        assert value == pytest.approx(1.0)

    def test_scale_invariance(self):
        a = area_loss(CentreBox(0.5, 0.5, 0.2, 0.3), CentreBox(0.5, 0.5, 0.3, 0.1))[0]
        b = area_loss(CentreBox(0.5, 0.5, 0.4, 0.6), CentreBox(0.5, 0.5, 0.6, 0.2))[0]
        assert a == pytest.approx(b)

    def test_collapsed_pred_value_one_finite_grad(self):
        value, grad = area_loss(CentreBox(0.5, 0.5, 0.0, 0.0), CentreBox(0.5, 0.5, 0.2, 0.2))
        assert value == 1.0
        assert np.all(np.isfinite(grad.as_array()))

    def test_degenerate_target_rejected(self):
        with pytest.raises(ValueError):
            area_loss(CentreBox(0.5, 0.5, 0.2, 0.2), CentreBox(0.5, 0.5, 0.2, 0.0))


class TestGradientSuite:
    def test_all_losses_within_tolerance(self):
        for res in run_suite(n_samples=200, seed=7):
            assert res.max_rel_err <= 1e-4, res

    def test_individual_losses(self):
        for name in ("giou", "centre", "area"):
            res = check_loss(name, n_samples=100, seed=3)
            assert res.passed


class TestQuestionLoss:
    def test_identity(self):
        hm = Heatmap(2, 3, np.random.default_rng(0).random((2, 3)))
        value, grad = question_loss(hm, hm, 1.0)
        assert value == 0.0
        assert np.all(grad == 0.0)

    def test_constant_offset(self):
        ones = Heatmap(2, 2, np.ones((2, 2)))
        zeros = Heatmap(2, 2, np.zeros((2, 2)))
        value, grad = question_loss(ones, zeros, 1.0)
        assert value == pytest.approx(1.0)
        assert grad == pytest.approx(np.full((2, 2), 2.0 / 4))

    def test_lambda_zero(self):
        rng = np.random.default_rng(1)
        a = Heatmap(3, 3, rng.random((3, 3)))
        b = Heatmap(3, 3, rng.random((3, 3)))
        value, grad = question_loss(a, b, 0.0)
        assert value == 0.0 and np.all(grad == 0.0)

    def test_gradient_matches_fd(self):
        rng = np.random.default_rng(2)
        pred = rng.random((2, 2))
        prior = rng.random((2, 2))
        lam = 0.7
        _, grad = question_loss(Heatmap(2, 2, pred), Heatmap(2, 2, prior), lam)
        step = 1e-6
        for i in range(2):
            for j in range(2):
                hi, lo = pred.copy(), pred.copy()
                hi[i, j] += step
                lo[i, j] -= step
                num = (
                    question_loss(Heatmap(2, 2, hi), Heatmap(2, 2, prior), lam)[0]
                    - question_loss(Heatmap(2, 2, lo), Heatmap(2, 2, prior), lam)[0]
                ) / (2 * step)
                assert grad[i, j] == pytest.approx(num, rel=1e-4, abs=1e-9)

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            question_loss(Heatmap(2, 2, np.zeros((2, 2))), Heatmap(2, 3, np.zeros((2, 3))), 1.0)


class TestTotalObjective:
    def test_all_zero(self):
        assert total_objective(0, 0, 0, 0, 0, BEST_CROP_WEIGHTS) == 0.0

    def test_best_crop_configuration(self):
        # lq arrives pre-weighted; unit components reproduce the weight sum.
        value = total_objective(0.5, 1.0, 1.0, 1.0, 1.0, BEST_CROP_WEIGHTS)
        assert value == pytest.approx(5.27)

    def test_decoder_warmup_start(self):
        weights = LossWeights(2.5, 2.0, 0.02, 0.5, 0.0)
        with_dec = total_objective(0.1, 0.2, 0.3, 0.4, 123.0, weights)
        without = total_objective(0.1, 0.2, 0.3, 0.4, 0.0, weights)
        assert with_dec == without

    def test_linearity(self):
        w = BEST_CROP_WEIGHTS
        base = total_objective(0.1, 0.2, 0.3, 0.4, 0.5, w)
        bumped = total_objective(0.1, 0.2 + 1.0, 0.3, 0.4, 0.5, w)
        assert bumped - base == pytest.approx(w.lambda_giou)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            total_objective(float("nan"), 0, 0, 0, 0, BEST_CROP_WEIGHTS)
        with pytest.raises(ValueError):
            total_objective(0, float("inf"), 0, 0, 0, BEST_CROP_WEIGHTS)

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            LossWeights(-1.0, 0, 0, 0, 0)
