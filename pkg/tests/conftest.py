"""Shared analytic-scene oracles for the test suite.

These helpers derive ground truth straight from the closed-form scene
geometry (ray casting in the rectified frame), independent of the image
pipeline under test.
"""

import numpy as np

from omnistereo.geometry import PanoramaGeometry, Pose, unproject_pixel
from omnistereo.rasters import Panorama


def render_rectified_view(scene, rect_pose, geom):
    """Render image + depth directly in a rectified frame (no resampling)."""
    return scene.render(rect_pose, geom)


def cylindrical_gt_disparity(scene, rect_pose, baseline, geom):
    """True left-image pixel disparity for a rectified cylindrical view.

    Ray-casts the left view and converts hit distances to disparity via the
    cylinder radius, bypassing the matcher and converter under test.
    """
    u, v = np.meshgrid(np.arange(geom.width, dtype=np.float64),
                       np.arange(geom.height, dtype=np.float64))
    rays = unproject_pixel(u, v, geom)
    rays_world = rays @ rect_pose.rotation.T
    t = scene.intersect(rect_pose.translation, rays_world)
    hit = np.isfinite(t)
    t_safe = np.where(hit, t, 1.0)
    rho_cyl = t_safe * np.hypot(rays[..., 1], rays[..., 2])
    ok = hit & (rho_cyl > 0)
    disp = np.where(ok, baseline * geom.radius / np.where(ok, rho_cyl, 1.0), 0.0)
    return Panorama(geom, disp.astype(np.float32), ok)


def cassini_gt_depth(scene, rect_pose, geom):
    """True Euclidean depth rendered on a Cassini grid in the given frame."""
    _, depth = scene.render(rect_pose, geom)
    return depth


def cassini_gt_angular(scene, rect_pose, baseline, geom):
    """True angular disparity (right-ray minus left-ray elevation, rectified
    frame) on a Cassini grid; the companion camera sits at (-B, 0, 0)."""
    u, v = np.meshgrid(np.arange(geom.width, dtype=np.float64),
                       np.arange(geom.height, dtype=np.float64))
    rays = unproject_pixel(u, v, geom)
    rays_world = rays @ rect_pose.rotation.T
    t = scene.intersect(rect_pose.translation, rays_world)
    hit = np.isfinite(t)
    t_safe = np.where(hit, t, 1.0)
    p_left = rays * t_safe[..., None]
    phi_l = np.arcsin(np.clip(p_left[..., 0] / t_safe, -1.0, 1.0))
    p_right = p_left.copy()
    p_right[..., 0] += baseline
    norm_r = np.linalg.norm(p_right, axis=-1)
    phi_r = np.arcsin(np.clip(p_right[..., 0] / norm_r, -1.0, 1.0))
    d_ang = np.where(hit, phi_r - phi_l, 0.0)
    return Panorama(geom, d_ang.astype(np.float32), hit)
