"""Tests for panorama reprojection, stereo rectification, and ground-truth
disparity conversion."""

import numpy as np
import pytest

from conftest import cylindrical_gt_disparity, render_rectified_view

from omnistereo.disparity import depth_from_disparity_cylindrical
from omnistereo.geometry import (
    PanoramaGeometry,
    Pose,
    Projection,
    project_to_pixel,
    rotation_about_x,
    rotation_from_rpy,
)
from omnistereo.rasters import Panorama
from omnistereo.resample import (
    convert_gt_disparity,
    rectification_rotation,
    rectify_pair,
    reproject_panorama,
)
from omnistereo.scenes import box_room, room_with_sphere, solid_texture

CAS = PanoramaGeometry(Projection.CASSINI, 512, 1024)
CYL = PanoramaGeometry(Projection.CYLINDRICAL, 512, 1024)


def random_panorama(rng, geom, channels=0):
    shape = (geom.height, geom.width) if channels == 0 else (geom.height, geom.width, channels)
    return Panorama(geom, rng.uniform(size=shape).astype(np.float32))


def smooth_panorama(geom):
    """A band-limited function of the viewing ray, so resampling error is
    dominated by interpolation rather than aliasing."""
    v, u = np.mgrid[0:geom.height, 0:geom.width]
    from omnistereo.geometry import unproject_pixel
    rays = unproject_pixel(u.astype(np.float64) + 0.0, v.astype(np.float64), geom)
    f = 0.5 + 0.25 * rays[..., 0] + 0.2 * rays[..., 1] * rays[..., 2]
    return Panorama(geom, f.astype(np.float32))


class TestReproject:
    def test_identity_nearest_is_bitwise(self):
        rng = np.random.default_rng(11)
        src = random_panorama(rng, CAS)
        out = reproject_panorama(src, CAS, interp="nearest")
        np.testing.assert_array_equal(out.data, src.data)
        assert out.mask.all()

    def test_identity_three_channel(self):
        rng = np.random.default_rng(12)
        src = random_panorama(rng, CYL, channels=3)
        out = reproject_panorama(src, CYL, interp="nearest")
        np.testing.assert_array_equal(out.data, src.data)

    def test_axis_rotation_is_row_roll(self):
        """Rotating a cylindrical panorama about the x axis by k rows shifts
        the image by exactly k rows, bitwise under nearest sampling."""
        rng = np.random.default_rng(13)
        geom = PanoramaGeometry(Projection.CYLINDRICAL, 64, 256)
        src = random_panorama(rng, geom)
        for k in (1, 7, 100):
            alpha = 2.0 * np.pi * k / geom.height
            out = reproject_panorama(src, geom, rotation=rotation_about_x(alpha),
                                     interp="nearest")
            np.testing.assert_array_equal(out.data, np.roll(src.data, k, axis=0))
            assert out.mask.all()

    def test_cassini_row_roll(self):
        rng = np.random.default_rng(14)
        geom = PanoramaGeometry(Projection.CASSINI, 32, 128)
        src = random_panorama(rng, geom)
        out = reproject_panorama(src, geom, rotation=rotation_about_x(2.0 * np.pi * 5 / 128),
                                 interp="nearest")
        np.testing.assert_array_equal(out.data, np.roll(src.data, 5, axis=0))

    def test_cassini_cylindrical_round_trip(self):
        """Cassini -> cylindrical -> Cassini at matched resolution preserves a
        smooth field over the shared interior band to display precision."""
        src = smooth_panorama(CAS)
        mid = reproject_panorama(src, CYL)
        back = reproject_panorama(mid, CAS)
        u = np.arange(CAS.width)
        phi = (u + 0.0) * np.pi / CAS.width - np.pi / 2.0
        band = np.abs(phi) <= np.deg2rad(52.5)
        assert back.mask[:, band].all()
        err = np.abs(back.data[:, band].astype(np.float64)
                     - src.data[:, band].astype(np.float64))
        assert err.max() <= 2.0 / 255.0, f"round-trip error {err.max():.5f}"

    def test_mask_is_conservative(self):
        """A hole in the source contaminates every destination pixel whose
        bilinear footprint touches it."""
        geom = PanoramaGeometry(Projection.CYLINDRICAL, 64, 256)
        data = np.ones((256, 64), dtype=np.float32)
        mask = np.ones((256, 64), dtype=bool)
        mask[100, 30] = False
        src = Panorama(geom, data, mask)
        out = reproject_panorama(src, geom, rotation=rotation_about_x(1e-4))
        assert not out.mask.all()
        assert out.data[out.mask].min() == pytest.approx(1.0)

    def test_worker_invariance(self):
        src = smooth_panorama(CYL)
        rot = rotation_from_rpy(np.deg2rad(3.0), np.deg2rad(-7.0), np.deg2rad(11.0))
        outs = [reproject_panorama(src, CAS, rotation=rot, workers=n) for n in (1, 4, 16)]
        for other in outs[1:]:
            np.testing.assert_array_equal(outs[0].data, other.data)
            np.testing.assert_array_equal(outs[0].mask, other.mask)

    def test_perspective_view_extraction(self):
        """Cutting a perspective view out of a Cassini panorama lands rays
        where the pinhole model says they should."""
        src = smooth_panorama(CAS)
        persp = PanoramaGeometry(Projection.PERSPECTIVE, 128, 128)
        out = reproject_panorama(src, persp)
        assert out.mask.all()
        # The optical axis pixel should carry the value of the +z ray.
        center = out.data[64, 64].astype(np.float64)
        assert center == pytest.approx(0.5, abs=0.02)


class TestRectification:
    def test_baseline_aligned_pair_left_unchanged(self):
        """Cameras already separated along +x with identity rotations are
        already rectified: the left view resamples onto itself."""
        rng = np.random.default_rng(21)
        geom = PanoramaGeometry(Projection.CASSINI, 64, 128)
        left = random_panorama(rng, geom)
        right = random_panorama(rng, geom)
        pose_l = Pose(translation=np.array([0.5, 0.0, 0.0]))
        pose_r = Pose()
        pair = rectify_pair(left, pose_l, right, pose_r, interp="nearest")
        assert pair.baseline == pytest.approx(0.5)
        np.testing.assert_array_equal(pair.left.data, left.data)
        np.testing.assert_array_equal(pair.right.data, right.data)
        np.testing.assert_allclose(pair.pose.translation, pose_l.translation)

    def test_rotation_is_orthonormal(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            pose_l = Pose(rotation_from_rpy(*rng.uniform(-1.0, 1.0, 3)),
                          rng.uniform(-1.0, 1.0, 3))
            pose_r = Pose(rotation_from_rpy(*rng.uniform(-1.0, 1.0, 3)),
                          rng.uniform(-1.0, 1.0, 3))
            rot = rectification_rotation(pose_l, pose_r)
            np.testing.assert_allclose(rot.T @ rot, np.eye(3), atol=1e-12)
            assert np.linalg.det(rot) == pytest.approx(1.0)
            # First column points from right center to left center.
            expected_x = pose_l.translation - pose_r.translation
            expected_x = expected_x / np.linalg.norm(expected_x)
            np.testing.assert_allclose(rot[:, 0], expected_x, atol=1e-12)

    def test_coincident_centers_rejected(self):
        with pytest.raises(ValueError):
            rectification_rotation(Pose(), Pose())

    def test_epipolar_alignment(self):
        """In a rectified pair, any world point projects to the same row in
        both views and to a non-negative column disparity consistent with the
        cylindrical relation."""
        rng = np.random.default_rng(23)
        geom = PanoramaGeometry(Projection.CYLINDRICAL, 256, 512)
        for trial in range(5):
            pose_l = Pose(rotation_from_rpy(*rng.uniform(-0.6, 0.6, 3)),
                          rng.uniform(-0.5, 0.5, 3))
            pose_r = Pose(rotation_from_rpy(*rng.uniform(-0.6, 0.6, 3)),
                          pose_l.translation + rng.uniform(0.3, 0.8, 3))
            rot = rectification_rotation(pose_l, pose_r)
            baseline = np.linalg.norm(pose_l.translation - pose_r.translation)
            rect_l = Pose(rot, pose_l.translation)
            rect_r = Pose(rot, pose_r.translation)

            pts = rng.uniform(-6.0, 6.0, size=(2000, 3))
            local_l = rect_l.inverse().transform(pts)
            local_r = rect_r.inverse().transform(pts)
            rho = np.hypot(local_l[:, 1], local_l[:, 2])
            keep = rho > 1.5 * baseline
            local_l, local_r = local_l[keep], local_r[keep]

            ul, vl = project_to_pixel(local_l, geom)
            ur, vr = project_to_pixel(local_r, geom)
            row_err = np.abs(vl - vr)
            row_err = np.minimum(row_err, geom.height - row_err)
            assert row_err.max() < 1e-6
            disp = ul - ur
            assert disp.min() > 0.0
            rho_back = depth_from_disparity_cylindrical(disp, baseline, geom.radius)
            np.testing.assert_allclose(
                rho_back, np.hypot(local_l[:, 1], local_l[:, 2]), rtol=1e-9)

    def test_rendered_pair_photoconsistency(self):
        """Rectified renders of an analytic scene agree along epipolar rows
        once shifted by the ground-truth disparity."""
        scene = box_room(3.0)
        geom = PanoramaGeometry(Projection.CYLINDRICAL, 128, 512)
        pose_l = Pose(translation=np.array([0.0, 0.0, 0.0]))
        pose_r = Pose(translation=np.array([-0.5, 0.0, 0.0]))
        rot = rectification_rotation(pose_l, pose_r)
        rect_pose = Pose(rot, pose_l.translation)

        left, _ = render_rectified_view(scene, rect_pose, geom)
        gt = cylindrical_gt_disparity(scene, rect_pose, 0.5, geom)
        right, _ = render_rectified_view(
            scene, Pose(rot, pose_r.translation), geom)

        # Sample the right image at (u - d, v) and compare against the left.
        v, u = np.mgrid[0:geom.height, 0:geom.width].astype(np.float64)
        from omnistereo.rasters import sample_bilinear
        vals, ok = sample_bilinear(right, u - np.asarray(gt.data, np.float64), v)
        m = ok & gt.mask
        assert m.mean() > 0.9
        err = np.abs(vals[m] - np.asarray(left.data, np.float64)[m])
        assert np.quantile(err, 0.98) < 0.02


class TestGtConversion:
    def test_matches_oracle_on_scene(self):
        """Angular ground truth rendered in Cassini converts to cylindrical
        pixel disparity matching a direct ray-cast oracle."""
        from conftest import cassini_gt_angular
        scene = box_room(3.0)
        cas = PanoramaGeometry(Projection.CASSINI, 256, 512)
        cyl = PanoramaGeometry(Projection.CYLINDRICAL, 256, 512)
        rect_pose = Pose()
        baseline = 0.7
        ang = cassini_gt_angular(scene, rect_pose, baseline, cas)
        got = convert_gt_disparity(ang, baseline, cyl)
        want = cylindrical_gt_disparity(scene, rect_pose, baseline, cyl)
        m = got.mask & want.mask
        assert m.mean() > 0.95
        err = np.abs(np.asarray(got.data, np.float64)[m]
                     - np.asarray(want.data, np.float64)[m])
        assert np.median(err) < 0.1
        assert err.max() < 1.5, f"max gt conversion error {err.max():.3f} px"

    def test_requires_matching_projections(self):
        rng = np.random.default_rng(31)
        bad = Panorama(CYL, rng.uniform(size=(1024, 512)).astype(np.float32))
        with pytest.raises(ValueError):
            convert_gt_disparity(bad, 1.0, CYL)

    def test_worker_invariance(self):
        from conftest import cassini_gt_angular
        scene = box_room(2.0)
        cas = PanoramaGeometry(Projection.CASSINI, 128, 256)
        cyl = PanoramaGeometry(Projection.CYLINDRICAL, 128, 256)
        ang = cassini_gt_angular(scene, Pose(), 0.4, cas)
        outs = [convert_gt_disparity(ang, 0.4, cyl, workers=n) for n in (1, 4, 16)]
        for other in outs[1:]:
            np.testing.assert_array_equal(outs[0].data, other.data)
            np.testing.assert_array_equal(outs[0].mask, other.mask)
