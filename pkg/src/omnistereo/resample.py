"""Panorama reprojection, stereo rectification, and ground-truth conversion.

Reprojection is inverse mapping: every destination pixel is unprojected,
rotated into the source frame, projected, and sampled. Work is partitioned
over destination rows with disjoint writes, so results are bit-identical
for any worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .disparity import angular_to_cylindrical_disparity
from .geometry import (
    PanoramaGeometry,
    Pose,
    Projection,
    project_to_pixel_masked,
    unproject_pixel,
)
from .parallel import map_rows
from .rasters import Panorama, sample


def reproject_panorama(src: Panorama, dst_geom: PanoramaGeometry,
                       rotation: np.ndarray | None = None,
                       interp: str = "bilinear", workers=None) -> Panorama:
    """Resample a panorama into another geometry and/or orientation.

    ``rotation`` maps destination-frame rays into the source frame (the two
    cameras share a center). Destination pixels whose source sample falls
    outside the source field of view or on invalid texels are masked.
    """
    rot = np.eye(3) if rotation is None else np.asarray(rotation, dtype=np.float64)
    h, w = dst_geom.height, dst_geom.width
    shape = (h, w) if src.data.ndim == 2 else (h, w, 3)
    out = np.zeros(shape, dtype=src.data.dtype)
    mask = np.zeros((h, w), dtype=bool)
    u = np.arange(w, dtype=np.float64)

    def work(rows):
        v = np.arange(rows.start, rows.stop, dtype=np.float64)
        uu, vv = np.meshgrid(u, v)
        rays = unproject_pixel(uu, vv, dst_geom)
        rays_src = rays @ rot.T
        us, vs, proj_ok = project_to_pixel_masked(rays_src, src.geometry)
        values, samp_ok = sample(src, us, vs, interp)
        ok = proj_ok & samp_ok
        if out.ndim == 3:
            out[rows] = np.where(ok[..., None], values, 0.0).astype(out.dtype)
        else:
            out[rows] = np.where(ok, values, 0.0).astype(out.dtype)
        mask[rows] = ok

    map_rows(work, h, workers)
    return Panorama(dst_geom, out, mask)


@dataclass
class RectifiedPair:
    """Stereo pair resampled into a shared rectified frame.

    ``pose`` carries the rectified orientation with the left camera's
    center; the right camera sits at ``(-baseline, 0, 0)`` in that frame,
    which keeps left-image disparity ``u_left - u_right`` nonnegative.
    """

    left: Panorama
    right: Panorama
    baseline: float
    pose: Pose


def rectification_rotation(pose_left: Pose, pose_right: Pose) -> np.ndarray:
    """Rectified-frame orientation (world <- rectified, columns x/y/z).

    The x axis runs from the right camera center to the left; z is the left
    camera's viewing axis projected perpendicular to x (world y as the
    fallback when they align), and y completes the right-handed frame.
    Epipolar curves become constant-v rows in this frame.
    """
    offset = pose_left.translation - pose_right.translation
    baseline = np.linalg.norm(offset)
    if baseline < 1e-12:
        raise ValueError("camera centers coincide; cannot rectify")
    x_axis = offset / baseline
    for candidate in (pose_left.rotation[:, 2], np.array([0.0, 1.0, 0.0]),
                      np.array([0.0, 0.0, 1.0])):
        z_axis = candidate - np.dot(candidate, x_axis) * x_axis
        norm = np.linalg.norm(z_axis)
        if norm > 1e-9:
            z_axis = z_axis / norm
            break
    else:  # pragma: no cover - two fallbacks cannot both align with x
        raise ValueError("degenerate rectification geometry")
    y_axis = np.cross(z_axis, x_axis)
    return np.column_stack([x_axis, y_axis, z_axis])


def rectify_pair(pano_left: Panorama, pose_left: Pose,
                 pano_right: Panorama, pose_right: Pose,
                 out_geom: PanoramaGeometry | None = None,
                 interp: str = "bilinear", workers=None) -> RectifiedPair:
    """Resample two panoramas into a shared baseline-aligned frame."""
    if out_geom is None:
        out_geom = pano_left.geometry
    r_rect = rectification_rotation(pose_left, pose_right)
    baseline = float(np.linalg.norm(pose_left.translation - pose_right.translation))
    rot_left = pose_left.rotation.T @ r_rect
    rot_right = pose_right.rotation.T @ r_rect
    left = reproject_panorama(pano_left, out_geom, rot_left, interp, workers)
    right = reproject_panorama(pano_right, out_geom, rot_right, interp, workers)
    return RectifiedPair(left, right, baseline, Pose(r_rect, pose_left.translation))


def convert_gt_disparity(gt_angular: Panorama, baseline: float,
                         out_geom: PanoramaGeometry, workers=None) -> Panorama:
    """Convert a Cassini angular-disparity map to cylindrical pixel disparity.

    Source and destination describe the same rectified view. Destination
    pixels look up the source by nearest neighbor along the shared epipolar
    row; the sampled angular disparity is converted at the source pixel's
    own elevation. Zero angular disparity (infinite depth) maps to invalid.
    """
    if gt_angular.geometry.projection is not Projection.CASSINI:
        raise ValueError("angular ground truth must be Cassini")
    if out_geom.projection is not Projection.CYLINDRICAL:
        raise ValueError("output geometry must be cylindrical")
    if baseline <= 0.0:
        raise ValueError("baseline must be positive")
    h, w = out_geom.height, out_geom.width
    radius = out_geom.radius
    gt_w = gt_angular.geometry.width
    gt_h = gt_angular.geometry.height
    out = np.zeros((h, w), dtype=np.float32)
    mask = np.zeros((h, w), dtype=bool)
    u = np.arange(w, dtype=np.float64)

    def work(rows):
        v = np.arange(rows.start, rows.stop, dtype=np.float64)
        uu, vv = np.meshgrid(u, v)
        # Destination ray angles; elevation from the axial pixel coordinate.
        axial = (out_geom.width / 2.0 - uu) / radius
        phi = np.arctan(axial)
        theta = vv * 2.0 * np.pi / h - np.pi
        u_src = (phi + np.pi / 2.0) * gt_w / np.pi
        v_src = (theta + np.pi) * gt_h / (2.0 * np.pi)
        ui = np.floor(u_src + 0.5).astype(np.int64)
        vi = np.floor(v_src + 0.5).astype(np.int64) % gt_h
        ok = (ui >= 0) & (ui < gt_w)
        ui = np.clip(ui, 0, gt_w - 1)
        if gt_angular.mask is not None:
            ok &= gt_angular.mask[vi, ui]
        d_ang = np.asarray(gt_angular.data, dtype=np.float64)[vi, ui]
        # Convert at the source pixel's own elevation, matching its sample.
        phi_src = ui * np.pi / gt_w - np.pi / 2.0
        disp, conv_ok = angular_to_cylindrical_disparity(phi_src, d_ang, baseline, radius)
        ok &= conv_ok
        out[rows] = np.where(ok, disp, 0.0).astype(np.float32)
        mask[rows] = ok

    map_rows(work, h, workers)
    return Panorama(out_geom, out, mask)
