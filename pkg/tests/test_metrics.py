"""Tests for the evaluation metrics."""

import numpy as np
import pytest

from omnistereo.geometry import PanoramaGeometry, Projection
from omnistereo.metrics import (
    DEFAULT_EVAL_HFOV,
    central_band_mask,
    depth_metrics,
    disparity_metrics,
)


class TestDisparityMetrics:
    def test_split_error_map(self):
        """Half the pixels off by 0.5 px, half by 4 px against a truth of 10."""
        gt = np.full((16, 16), 10.0)
        pred = gt.copy()
        pred[:8] += 0.5
        pred[8:] -= 4.0
        m = disparity_metrics(pred, gt)
        assert m.mae == 2.25
        assert m.rmse == pytest.approx(np.sqrt(8.125), rel=1e-15)
        assert m.bad1 == 50.0
        assert m.bad3 == 50.0
        assert m.bad5 == 0.0
        assert m.d1 == 50.0
        assert m.count == 256

    def test_thresholds_are_strict(self):
        gt = np.zeros((8, 8))
        pred = np.full((8, 8), 3.0)
        m = disparity_metrics(pred, gt)
        assert m.bad3 == 0.0
        assert m.bad1 == 100.0

    def test_d1_needs_relative_error_too(self):
        """A 4 px error on a 100 px disparity is under 5 % and not a D1
        outlier, while the same error on a 10 px disparity is."""
        gt = np.array([[100.0, 10.0]])
        pred = gt + 4.0
        m = disparity_metrics(pred, gt)
        assert m.d1 == 50.0

    def test_mask_restricts_support(self):
        gt = np.zeros((4, 4))
        pred = np.zeros((4, 4))
        pred[0, 0] = 7.0
        mask = np.ones((4, 4), dtype=bool)
        mask[0, 0] = False
        assert disparity_metrics(pred, gt, mask).mae == 0.0
        assert disparity_metrics(pred, gt).mae == pytest.approx(7.0 / 16.0)

    def test_perfect_prediction(self):
        gt = np.linspace(1.0, 50.0, 64).reshape(8, 8)
        m = disparity_metrics(gt, gt)
        assert m.mae == 0.0 and m.rmse == 0.0 and m.d1 == 0.0

    def test_empty_support_rejected(self):
        with pytest.raises(ValueError):
            disparity_metrics(np.zeros((2, 2)), np.zeros((2, 2)),
                              np.zeros((2, 2), dtype=bool))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            disparity_metrics(np.zeros((2, 2)), np.zeros((2, 3)))

    def test_rmse_dominates_mae(self):
        rng = np.random.default_rng(80)
        gt = rng.uniform(1.0, 50.0, size=(32, 32))
        pred = gt + rng.normal(0.0, 2.0, size=(32, 32))
        m = disparity_metrics(pred, gt)
        assert m.rmse >= m.mae


class TestDepthMetrics:
    def test_ten_percent_high(self):
        gt = np.full((16, 16), 10.0)
        m = depth_metrics(np.full((16, 16), 11.0), gt)
        assert m.mae == 1.0
        assert m.rmse == 1.0
        assert m.abs_rel == pytest.approx(0.1, rel=1e-14)
        assert m.sq_rel == pytest.approx(0.1, rel=1e-14)
        assert abs(m.silog) < 1e-15
        assert m.delta1 == 100.0
        assert m.count == 256

    def test_double_depth_fails_all_deltas(self):
        gt = np.full((8, 8), 5.0)
        m = depth_metrics(np.full((8, 8), 10.0), gt)
        assert m.abs_rel == 1.0
        assert m.delta1 == 0.0
        assert m.delta2 == 0.0
        # 1.25 ** 3 = 1.953125 < 2, so even the loosest gate fails.
        assert m.delta3 == 0.0
        assert abs(m.silog) < 1e-15

    def test_deltas_are_nested(self):
        rng = np.random.default_rng(81)
        gt = rng.uniform(1.0, 20.0, size=(64, 64))
        pred = gt * rng.uniform(0.5, 2.0, size=(64, 64))
        m = depth_metrics(pred, gt)
        assert 0.0 <= m.delta1 <= m.delta2 <= m.delta3 <= 100.0

    def test_nonpositive_pixels_excluded(self):
        gt = np.full((4, 4), 5.0)
        gt[0, 0] = 0.0
        pred = np.full((4, 4), 5.0)
        pred[1, 1] = -2.0
        m = depth_metrics(pred, gt)
        assert m.count == 14
        assert m.mae == 0.0

    def test_all_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            depth_metrics(np.zeros((2, 2)), np.full((2, 2), 3.0))

    def test_scale_invariance_of_silog(self):
        rng = np.random.default_rng(82)
        gt = rng.uniform(1.0, 20.0, size=(32, 32))
        pred = gt * rng.uniform(0.8, 1.2, size=(32, 32))
        a = depth_metrics(pred, gt).silog
        b = depth_metrics(pred * 3.0, gt * 3.0).silog
        assert a == pytest.approx(b, rel=1e-9)

    def test_worse_prediction_scores_worse(self):
        rng = np.random.default_rng(83)
        gt = rng.uniform(1.0, 20.0, size=(32, 32))
        noise = rng.normal(0.0, 0.5, size=(32, 32))
        near = depth_metrics(np.abs(gt + noise) + 1e-6, gt)
        far = depth_metrics(np.abs(gt + 4.0 * noise) + 1e-6, gt)
        assert far.mae > near.mae
        assert far.abs_rel > near.abs_rel
        assert far.delta1 <= near.delta1


class TestCentralBand:
    def test_cassini_column_range(self):
        geom = PanoramaGeometry(Projection.CASSINI, 512, 1024)
        band = central_band_mask(geom)
        cols = band[0]
        assert cols.sum() == 327
        assert cols[93] and cols[419]
        assert not cols[92] and not cols[420]
        # Constant along rows.
        assert np.array_equal(band, np.broadcast_to(cols, band.shape))

    def test_cylindrical_band_inside_fov(self):
        geom = PanoramaGeometry(Projection.CYLINDRICAL, 400, 1024)
        assert central_band_mask(geom).all()

    def test_narrow_band(self):
        geom = PanoramaGeometry(Projection.CASSINI, 512, 1024)
        narrow = central_band_mask(geom, hfov=np.pi / 2.0)
        assert narrow.sum() < central_band_mask(geom).sum()
        assert narrow[0, 256]

    def test_bad_inputs_rejected(self):
        geom = PanoramaGeometry(Projection.ERP, 512, 256)
        with pytest.raises(ValueError):
            central_band_mask(geom)
        with pytest.raises(ValueError):
            central_band_mask(PanoramaGeometry(Projection.CASSINI, 64, 128),
                              hfov=4.0)

    def test_default_band_matches_square_cylinder(self):
        assert DEFAULT_EVAL_HFOV == pytest.approx(2.0077696437077743, rel=1e-15)
