"""Disparity/depth relations for rectified panoramic stereo.

Rectified frame convention: the x axis runs along the baseline from the
right camera toward the left camera, so the right camera center sits at
``(-B, 0, 0)`` in the left camera's frame. Under the cylindrical pixel
mapping (``u = -x R / rho + W/2``) this makes the left-image pixel
disparity ``u_left - u_right = B R / rho`` nonnegative for every point off
the baseline axis.

Spherical angular disparity is frame-sensitive: the triangle identity
``rho = B [sin(phi+pi/2)/tan(d) - cos(phi+pi/2)]`` measures ``phi`` toward
the companion camera, which in the rectified frame above means negating
the left ray's elevation before applying it. The helpers below keep both
spellings straight.
"""

from __future__ import annotations

import numpy as np

from .geometry import PanoramaGeometry, Pose, Projection, project_to_pixel_masked, unproject_pixel
from .parallel import map_rows, worker_count
from .rasters import Panorama, sample


def depth_from_disparity_spherical(phi_left, disparity, baseline):
    """Euclidean distance from angular disparity on a spherical panorama.

    ``rho = B [sin(phi_l + pi/2) / tan(d) - cos(phi_l + pi/2)]`` with
    ``phi_left`` the left-ray elevation measured toward the companion
    camera and ``d = phi_l - phi_r`` in the same convention, radians, in
    (0, pi). Degenerate disparities raise ``ValueError``.
    """
    phi_left = np.asarray(phi_left, dtype=np.float64)
    d = np.asarray(disparity, dtype=np.float64)
    if np.any(d <= 0.0) or np.any(d >= np.pi):
        raise ValueError("angular disparity must lie in (0, pi)")
    shifted = phi_left + np.pi / 2.0
    rho = baseline * (np.sin(shifted) / np.tan(d) - np.cos(shifted))
    return rho if rho.ndim else float(rho)


def depth_from_disparity_cylindrical(disparity_px, baseline, radius):
    """Distance from the cylinder axis given pixel disparity: ``B R / d``."""
    d = np.asarray(disparity_px, dtype=np.float64)
    if np.any(d <= 0.0):
        raise ValueError("pixel disparity must be positive")
    rho = baseline * radius / d
    return rho if rho.ndim else float(rho)


def disparity_from_depth_cylindrical(rho_cyl, baseline, radius):
    """Inverse of :func:`depth_from_disparity_cylindrical`."""
    rho = np.asarray(rho_cyl, dtype=np.float64)
    if np.any(rho <= 0.0):
        raise ValueError("cylindrical distance must be positive")
    d = baseline * radius / rho
    return d if d.ndim else float(d)


def euclidean_from_cylindrical(rho_cyl, axial):
    """Euclidean distance of a point from its cylindrical radius and axial
    coordinate: ``sqrt(rho^2 + x^2)``."""
    rho = np.asarray(rho_cyl, dtype=np.float64)
    x = np.asarray(axial, dtype=np.float64)
    out = np.hypot(rho, x)
    return out if out.ndim else float(out)


def angular_to_cylindrical_disparity(phi_left, d_angular, baseline, radius):
    """Convert spherical angular disparity to cylindrical pixel disparity.

    ``phi_left`` is the left-ray elevation in the rectified frame (right
    camera toward -x); the triangle identity wants the elevation toward the
    companion camera, hence the negation. The Euclidean distance is reduced
    to the cylindrical radius by ``rho_cyl = rho_s cos(phi)`` before
    inverting the cylindrical relation.

    Returns ``(disparity_px, valid)``; conversions landing at nonpositive
    distance are flagged invalid.
    """
    phi = np.asarray(phi_left, dtype=np.float64)
    d_ang = np.asarray(d_angular, dtype=np.float64)
    ok = (d_ang > 0.0) & (d_ang < np.pi)
    safe_d = np.where(ok, d_ang, 0.1)
    rho_s = depth_from_disparity_spherical(-phi, safe_d, baseline)
    rho_cyl = np.asarray(rho_s) * np.cos(phi)
    ok = ok & (rho_cyl > 0.0)
    disp = np.where(ok, baseline * radius / np.where(ok, rho_cyl, 1.0), 0.0)
    return disp, ok


def cylindrical_disparity_to_cassini_depth(disp: Panorama, baseline, out_geom: PanoramaGeometry,
                                           workers=None) -> Panorama:
    """Resample a cylindrical disparity map into a Cassini Euclidean depth map.

    Both rasters describe the same camera; for each Cassini pixel the ray is
    projected into the cylindrical raster, disparity sampled bilinearly, and
    ``B R / d`` lifted from cylinder radius to Euclidean distance along the
    ray.
    """
    if disp.geometry.projection is not Projection.CYLINDRICAL:
        raise ValueError("disparity map must be cylindrical")
    if out_geom.projection is not Projection.CASSINI:
        raise ValueError("output geometry must be Cassini")
    if baseline <= 0.0:
        raise ValueError("baseline must be positive")
    h, w = out_geom.height, out_geom.width
    radius = disp.geometry.radius
    depth = np.zeros((h, w), dtype=np.float32)
    mask = np.zeros((h, w), dtype=bool)
    u = np.arange(w, dtype=np.float64)

    def work(rows):
        v = np.arange(rows.start, rows.stop, dtype=np.float64)
        uu, vv = np.meshgrid(u, v)
        rays = unproject_pixel(uu, vv, out_geom)
        us, vs, proj_ok = project_to_pixel_masked(rays, disp.geometry)
        values, samp_ok = sample(disp, us, vs, "bilinear")
        values = np.asarray(values, dtype=np.float64)
        ok = proj_ok & samp_ok & (values > 0.0)
        # Unit ray: distance from the x axis is hypot(ray_y, ray_z).
        cos_elev = np.hypot(rays[..., 1], rays[..., 2])
        ok &= cos_elev > 0.0
        rho_cyl = baseline * radius / np.where(values > 0.0, values, 1.0)
        dist = rho_cyl / np.where(cos_elev > 0.0, cos_elev, 1.0)
        depth[rows] = np.where(ok, dist, 0.0).astype(np.float32)
        mask[rows] = ok

    map_rows(work, h, workers)
    return Panorama(out_geom, depth, mask)


def forward_warp_depth(depth: Panorama, src_pose: Pose, ref_pose: Pose,
                       out_geom: PanoramaGeometry | None = None,
                       payload: np.ndarray | None = None, workers=None,
                       *, supersample: int = 1):
    """Forward-splat a depth map into a reference view's raster.

    Each valid source pixel is lifted to 3D, moved into the reference
    frame, and splatted onto its nearest destination pixel; the smallest
    distance wins (z-buffer). Destination pixels receiving no splat stay
    invalid: they are the invisible or occluded areas. ``payload`` rides
    along with the winning splat.

    ``supersample`` splats an s-by-s grid of sub-rays per source pixel, all
    carrying the pixel's center distance. Where the warp locally magnifies
    the source this closes the gaps single splats leave; 1 keeps the plain
    one-splat-per-pixel behaviour.

    Returns ``(warped_depth, warped_payload_or_None)``.
    """
    if out_geom is None:
        out_geom = depth.geometry
    if supersample < 1:
        raise ValueError("supersample must be a positive integer")
    rel = ref_pose.inverse().compose(src_pose)
    h_src, w_src = depth.geometry.height, depth.geometry.width
    src_mask = depth.valid_mask() & (np.asarray(depth.data) > 0.0)
    u = np.arange(w_src, dtype=np.float64)
    offsets = (np.arange(supersample, dtype=np.float64) + 0.5) / supersample - 0.5
    pay_full = None if payload is None else np.asarray(payload, dtype=np.float64)

    def work(rows):
        v = np.arange(rows.start, rows.stop, dtype=np.float64)
        uu, vv = np.meshgrid(u, v)
        d_chunk = np.asarray(depth.data, dtype=np.float64)[rows]
        m_chunk = src_mask[rows]
        base = (np.arange(rows.start, rows.stop)[:, None] * w_src
                + np.arange(w_src)[None, :])
        out = []
        for k, (dv, du) in enumerate(
                (dv, du) for dv in offsets for du in offsets):
            rays = unproject_pixel(uu + du, vv + dv, depth.geometry)
            pts_ref = rel.transform(rays * d_chunk[..., None])
            dist = np.linalg.norm(pts_ref, axis=-1)
            us, vs, proj_ok = project_to_pixel_masked(pts_ref, out_geom)
            ui = np.floor(us + 0.5).astype(np.int64)
            vi = np.floor(vs + 0.5).astype(np.int64)
            if out_geom.projection in (Projection.CASSINI, Projection.CYLINDRICAL):
                vi %= out_geom.height
                in_bounds = (ui >= 0) & (ui < out_geom.width)
            elif out_geom.projection is Projection.ERP:
                ui %= out_geom.width
                in_bounds = (vi >= 0) & (vi < out_geom.height)
            else:
                in_bounds = ((ui >= 0) & (ui < out_geom.width)
                             & (vi >= 0) & (vi < out_geom.height))
            ok = m_chunk & proj_ok & in_bounds & (dist > 0.0)
            flat = (vi * out_geom.width + ui)[ok]
            # Arrival key built from source coordinates, not enumeration
            # order, so z-buffer ties break the same way however the rows
            # were chunked across workers.
            arrival = (k * h_src * w_src + base)[ok]
            pay_vals = None if pay_full is None else pay_full[rows][ok]
            out.append((flat, dist[ok], arrival, pay_vals))
        return out

    results = [part for chunk in map_rows(work, h_src, workers) for part in chunk]
    flat = np.concatenate([r[0] for r in results])
    dist = np.concatenate([r[1] for r in results])
    arrival = np.concatenate([r[2] for r in results])
    if pay_full is not None:
        pay = np.concatenate([r[3] for r in results])
    order = np.lexsort((arrival, dist, flat))
    flat_s = flat[order]
    first = np.ones(flat_s.size, dtype=bool)
    first[1:] = flat_s[1:] != flat_s[:-1]
    winners = order[first]
    out_depth = np.zeros(out_geom.height * out_geom.width, dtype=np.float32)
    out_mask = np.zeros(out_geom.height * out_geom.width, dtype=bool)
    out_depth[flat[winners]] = dist[winners].astype(np.float32)
    out_mask[flat[winners]] = True
    warped = Panorama(out_geom, out_depth.reshape(out_geom.height, out_geom.width),
                      out_mask.reshape(out_geom.height, out_geom.width))
    if payload is None:
        return warped, None
    out_pay = np.zeros(out_geom.height * out_geom.width, dtype=np.float32)
    out_pay[flat[winners]] = pay[winners].astype(np.float32)
    return warped, out_pay.reshape(out_geom.height, out_geom.width)


def align_depth_to_reference(depth: Panorama, src_pose: Pose, ref_pose: Pose,
                             out_geom: PanoramaGeometry | None = None,
                             workers=None) -> Panorama:
    """Warp a depth map from its own camera into the reference camera's
    raster (values become distances from the reference center)."""
    warped, _ = forward_warp_depth(depth, src_pose, ref_pose, out_geom, None, workers)
    return warped
