"""Tests for coordinate conversions, panorama projections, and poses."""

import numpy as np
import pytest

from omnistereo.geometry import (
    PanoramaGeometry,
    Pose,
    Projection,
    cartesian_to_cylindrical,
    cartesian_to_spherical,
    cylindrical_to_cartesian,
    horizontal_fov,
    local_scale_factors,
    project_to_pixel,
    project_to_pixel_masked,
    rotation_about_x,
    rotation_about_z,
    rotation_from_rpy,
    spherical_to_cartesian,
    unproject_pixel,
    wrap_angle,
)

# Radius of the reference 512x1024 panorama, frozen from 1024 / (2 pi).
R_1024 = 162.97466172610083

CASSINI = PanoramaGeometry(Projection.CASSINI, 512, 1024)
CYLINDRICAL = PanoramaGeometry(Projection.CYLINDRICAL, 512, 1024)
ERP = PanoramaGeometry(Projection.ERP, 1024, 512)
PERSPECTIVE = PanoramaGeometry(Projection.PERSPECTIVE, 512, 512)

ALL_GEOMS = [CASSINI, CYLINDRICAL, ERP, PERSPECTIVE]


def random_points(rng, n, r_min=0.1, r_max=50.0):
    """Uniform random directions scaled to radii in [r_min, r_max]."""
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return d * rng.uniform(r_min, r_max, size=(n, 1))


class TestAngleWrapping:
    def test_range(self):
        rng = np.random.default_rng(7)
        t = wrap_angle(rng.uniform(-20.0, 20.0, size=5000))
        assert np.all(t >= -np.pi) and np.all(t < np.pi)

    def test_seam(self):
        assert wrap_angle(np.pi) == -np.pi
        assert wrap_angle(-np.pi) == -np.pi
        assert wrap_angle(0.0) == 0.0

    def test_periodicity(self):
        rng = np.random.default_rng(8)
        t = rng.uniform(-np.pi, np.pi, size=1000)
        np.testing.assert_allclose(wrap_angle(t + 6 * np.pi), t, atol=1e-12)


class TestCoordinateConversions:
    def test_spherical_example(self):
        rho, phi, theta = cartesian_to_spherical([0.0, 1.0, 1.0])
        np.testing.assert_allclose(rho, np.sqrt(2.0), rtol=1e-15)
        np.testing.assert_allclose(phi, 0.0, atol=1e-15)
        np.testing.assert_allclose(theta, np.pi / 4.0, rtol=1e-15)

    def test_cylindrical_example(self):
        rho, theta, x = cartesian_to_cylindrical([1.0, 0.0, 1.0])
        np.testing.assert_allclose([rho, theta, x], [1.0, 0.0, 1.0], atol=1e-15)

    def test_spherical_round_trip(self):
        rng = np.random.default_rng(11)
        p = random_points(rng, 10000)
        rho, phi, theta = cartesian_to_spherical(p)
        back = spherical_to_cartesian(rho, phi, theta)
        err = np.abs(back - p) / np.linalg.norm(p, axis=1, keepdims=True)
        assert err.max() < 1e-12, f"worst relative error {err.max():.3e}"

    def test_cylindrical_round_trip(self):
        rng = np.random.default_rng(12)
        p = random_points(rng, 10000)
        back = cylindrical_to_cartesian(*cartesian_to_cylindrical(p))
        err = np.abs(back - p) / np.linalg.norm(p, axis=1, keepdims=True)
        assert err.max() < 1e-12

    def test_angles_normalized(self):
        rng = np.random.default_rng(13)
        p = random_points(rng, 2000)
        _, phi, theta = cartesian_to_spherical(p)
        assert np.all((theta >= -np.pi) & (theta < np.pi))
        assert np.all((phi >= -np.pi / 2) & (phi <= np.pi / 2))

    def test_origin_rejected(self):
        with pytest.raises(ValueError):
            cartesian_to_spherical([0.0, 0.0, 0.0])

    def test_axis_point_rejected_cylindrical(self):
        with pytest.raises(ValueError):
            cartesian_to_cylindrical([3.0, 0.0, 0.0])

    def test_pole_azimuth_is_zero(self):
        # On the x axis the azimuth is undefined; the convention is theta = 0.
        _, phi, theta = cartesian_to_spherical([2.0, 0.0, 0.0])
        assert theta == 0.0
        np.testing.assert_allclose(phi, np.pi / 2.0, rtol=1e-15)


class TestProjection:
    def test_cassini_example(self):
        u, v = project_to_pixel([0.0, 1.0, 1.0], CASSINI)
        np.testing.assert_allclose([u, v], [256.0, 640.0], atol=1e-9)

    def test_cylindrical_example(self):
        u, v = project_to_pixel([1.0, 0.0, 1.0], CYLINDRICAL)
        np.testing.assert_allclose(u, 256.0 - R_1024, atol=1e-9)
        np.testing.assert_allclose(u, 93.02533827389917, atol=1e-9)
        np.testing.assert_allclose(v, 512.0, atol=1e-9)

    def test_cylindrical_unproject_example(self):
        ray = unproject_pixel(93.02533827389917, 512.0, CYLINDRICAL)
        expected = np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0)
        np.testing.assert_allclose(ray, expected, atol=1e-12)

    @pytest.mark.parametrize("geom", ALL_GEOMS, ids=lambda g: g.projection.value)
    def test_project_unproject_identity(self, geom):
        """project(unproject(px)) == px to 1e-9 px over the interior."""
        u = np.linspace(1.0, geom.width - 2.0, 48)
        v = np.linspace(1.0, geom.height - 2.0, 48)
        uu, vv = np.meshgrid(u, v)
        rays = unproject_pixel(uu, vv, geom)
        u2, v2 = project_to_pixel(rays, geom)
        np.testing.assert_allclose(u2, uu, atol=1e-9,
                                   err_msg=f"u drift for {geom}")
        np.testing.assert_allclose(v2, vv, atol=1e-9,
                                   err_msg=f"v drift for {geom}")

    @pytest.mark.parametrize("geom", ALL_GEOMS, ids=lambda g: g.projection.value)
    def test_unproject_unit_norm(self, geom):
        rng = np.random.default_rng(21)
        u = rng.uniform(0.0, geom.width - 1.0, size=500)
        v = rng.uniform(0.0, geom.height - 1.0, size=500)
        rays = unproject_pixel(u, v, geom)
        np.testing.assert_allclose(np.linalg.norm(rays, axis=-1), 1.0, atol=1e-12)

    def test_projection_scale_invariance(self):
        rng = np.random.default_rng(22)
        p = random_points(rng, 1000)
        for geom in (CASSINI, CYLINDRICAL, ERP):
            u1, v1 = project_to_pixel(p, geom)
            u2, v2 = project_to_pixel(p * 3.5, geom)
            np.testing.assert_allclose(u1, u2, atol=1e-9)
            np.testing.assert_allclose(v1, v2, atol=1e-9)

    def test_singular_rays_raise(self):
        with pytest.raises(ValueError):
            project_to_pixel([0.0, 0.0, 0.0], CASSINI)
        with pytest.raises(ValueError):
            project_to_pixel([1.0, 0.0, 0.0], CYLINDRICAL)
        with pytest.raises(ValueError):
            project_to_pixel([0.0, 0.0, -1.0], PERSPECTIVE)

    def test_masked_projection_flags(self):
        pts = np.array([[1.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
        u, v, valid = project_to_pixel_masked(pts, CYLINDRICAL)
        assert valid.tolist() == [True, False]
        assert np.isfinite(u).all()

    def test_unproject_rejects_out_of_span(self):
        with pytest.raises(ValueError):
            unproject_pixel(-1.0, 10.0, CASSINI)
        with pytest.raises(ValueError):
            unproject_pixel(10.0, CASSINI.height + 3.0, CASSINI)

    def test_erp_covers_sphere(self):
        """ERP pixel grid unprojects to directions spanning all octants."""
        u, v = np.meshgrid(np.arange(0, 1024, 16), np.arange(0, 512, 16))
        rays = unproject_pixel(u, v, ERP)
        signs = set(map(tuple, np.sign(rays.reshape(-1, 3)).astype(int)[
            np.all(np.sign(rays.reshape(-1, 3)) != 0, axis=1)]))
        assert len(signs) == 8


class TestScaleFactors:
    def test_spherical_example(self):
        h, vert = local_scale_factors(CASSINI, np.pi / 3.0, 1.0)
        np.testing.assert_allclose(h, 2.0 * R_1024, rtol=1e-12)
        np.testing.assert_allclose(vert, R_1024, rtol=1e-12)

    def test_cylindrical_example(self):
        h, vert = local_scale_factors(CYLINDRICAL, 0.3, 2.0)
        np.testing.assert_allclose(h, R_1024 / 2.0, rtol=1e-12)
        np.testing.assert_allclose(vert, R_1024 / 2.0, rtol=1e-12)

    def test_cylindrical_factors_equal_everywhere(self):
        rng = np.random.default_rng(31)
        theta = rng.uniform(-np.pi, np.pi, size=200)
        rho = rng.uniform(0.2, 30.0, size=200)
        h, vert = local_scale_factors(CYLINDRICAL, theta, rho)
        np.testing.assert_array_equal(h, vert)

    def test_spherical_horizontal_blowup(self):
        with pytest.raises(ValueError):
            local_scale_factors(CASSINI, np.pi / 2.0, 1.0)

    def test_nonpositive_rho_rejected(self):
        with pytest.raises(ValueError):
            local_scale_factors(CYLINDRICAL, 0.0, 0.0)


class TestFieldOfView:
    def test_reference_resolution(self):
        # 2 * arctan(pi / 2); the commonly quoted 105 degrees is a rounding
        # slip, the formula gives ~115.04 degrees.
        fov = horizontal_fov(CYLINDRICAL)
        np.testing.assert_allclose(fov, 2.0077696437077743, rtol=1e-12)
        np.testing.assert_allclose(np.degrees(fov), 115.0367268189405, rtol=1e-12)

    def test_narrower_image_narrower_fov(self):
        narrow = PanoramaGeometry(Projection.CYLINDRICAL, 256, 1024)
        assert horizontal_fov(narrow) < horizontal_fov(CYLINDRICAL)

    def test_wrong_projection_rejected(self):
        with pytest.raises(ValueError):
            horizontal_fov(CASSINI)


class TestPose:
    def test_rotation_about_z_example(self):
        pose = Pose(rotation_about_z(np.pi / 2.0))
        np.testing.assert_allclose(pose.transform([0.0, 0.0, 1.0]),
                                   [0.0, 0.0, 1.0], atol=1e-15)
        np.testing.assert_allclose(pose.transform([1.0, 0.0, 0.0]),
                                   [0.0, 1.0, 0.0], atol=1e-15)

    def test_compose_inverse_identity(self):
        rng = np.random.default_rng(41)
        for _ in range(20):
            pose = Pose(rotation_from_rpy(*rng.uniform(-np.pi, np.pi, 3)),
                        rng.normal(size=3))
            ident = pose.compose(pose.inverse())
            np.testing.assert_allclose(ident.rotation, np.eye(3), atol=1e-12)
            np.testing.assert_allclose(ident.translation, 0.0, atol=1e-12)

    def test_transform_round_trip(self):
        rng = np.random.default_rng(42)
        pose = Pose(rotation_about_x(0.7), [1.0, -2.0, 3.0])
        p = rng.normal(size=(100, 3))
        np.testing.assert_allclose(pose.inverse().transform(pose.transform(p)),
                                   p, atol=1e-12)

    def test_compose_is_associative_application(self):
        a = Pose(rotation_about_x(0.3), [1.0, 0.0, 0.0])
        b = Pose(rotation_about_z(1.1), [0.0, 2.0, 0.0])
        p = np.array([0.5, 0.25, -1.0])
        np.testing.assert_allclose(a.compose(b).transform(p),
                                   a.transform(b.transform(p)), atol=1e-12)

    def test_bad_rotation_rejected(self):
        with pytest.raises(ValueError):
            Pose(np.eye(3) * 1.001)
        with pytest.raises(ValueError):
            Pose(np.diag([1.0, 1.0, -1.0]))
