"""Coordinate frames, panorama models, and rigid poses.

Conventions used throughout the package:

* Right-handed Cartesian frame. The ``x`` axis is the cylinder / baseline
  axis. ``theta`` is the azimuth in the y-z plane, measured from +z toward
  +y, normalized to [-pi, pi). ``phi`` is the elevation of a ray out of the
  y-z plane toward +x, in [-pi/2, pi/2].
* Spherical point: ``(rho, phi, theta)`` with ``rho`` the Euclidean distance.
* Cylindrical point: ``(rho, theta, x)`` with ``rho`` the distance from the
  x axis.
* Pixels have integer centers; the image spans ``[-0.5, W - 0.5)`` by
  ``[-0.5, H - 0.5)``. The vertical image axis carries the full 360 degrees
  of ``theta`` for panoramic kinds, so ``R = H / (2 pi)`` acts as the focal
  length.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

TWO_PI = 2.0 * np.pi

_ORTHONORMAL_TOL = 1e-9


def wrap_angle(theta):
    """Normalize angles to [-pi, pi)."""
    theta = np.asarray(theta, dtype=np.float64)
    out = theta - TWO_PI * np.floor((theta + np.pi) / TWO_PI)
    # Guard the half-ulp cases where the floor division rounds across the seam.
    out = np.where(out < -np.pi, out + TWO_PI, out)
    out = np.where(out >= np.pi, out - TWO_PI, out)
    return out if out.ndim else float(out)


def spherical_to_cartesian(rho, phi, theta):
    """Map spherical coordinates to Cartesian points of shape (..., 3)."""
    rho = np.asarray(rho, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    x = rho * np.sin(phi)
    y = rho * np.cos(phi) * np.sin(theta)
    z = rho * np.cos(phi) * np.cos(theta)
    return np.stack(np.broadcast_arrays(x, y, z), axis=-1)


def cartesian_to_spherical(points):
    """Inverse of :func:`spherical_to_cartesian`.

    Returns ``(rho, phi, theta)``. On the x axis (``cos phi == 0``) the
    azimuth is undefined and reported as 0. The origin raises ``ValueError``.
    """
    p = np.asarray(points, dtype=np.float64)
    rho = np.linalg.norm(p, axis=-1)
    if np.any(rho == 0.0):
        raise ValueError("spherical coordinates undefined at the origin")
    phi = np.arcsin(np.clip(p[..., 0] / rho, -1.0, 1.0))
    theta = wrap_angle(np.arctan2(p[..., 1], p[..., 2]))
    return rho, phi, theta


def cylindrical_to_cartesian(rho, theta, x):
    """Map cylindrical coordinates to Cartesian points of shape (..., 3)."""
    rho = np.asarray(rho, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    y = rho * np.sin(theta)
    z = rho * np.cos(theta)
    return np.stack(np.broadcast_arrays(x, y, z), axis=-1)


def cartesian_to_cylindrical(points):
    """Inverse of :func:`cylindrical_to_cartesian`.

    Returns ``(rho, theta, x)``. Points on the x axis have no azimuth and
    raise ``ValueError``.
    """
    p = np.asarray(points, dtype=np.float64)
    rho = np.hypot(p[..., 1], p[..., 2])
    if np.any(rho == 0.0):
        raise ValueError("cylindrical coordinates undefined on the x axis")
    theta = wrap_angle(np.arctan2(p[..., 1], p[..., 2]))
    return rho, theta, p[..., 0]


class Projection(Enum):
    CASSINI = "cassini"
    ERP = "erp"
    CYLINDRICAL = "cylindrical"
    PERSPECTIVE = "perspective"


@dataclass(frozen=True)
class PanoramaGeometry:
    """Projection kind plus raster dimensions (width, height in pixels)."""

    projection: Projection
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("panorama dimensions must be positive")

    @property
    def radius(self) -> float:
        """Cylinder radius / focal length R = H / (2 pi)."""
        return self.height / TWO_PI

    def __str__(self):
        return f"{self.projection.value} {self.width}x{self.height}"


def horizontal_fov(geom: PanoramaGeometry) -> float:
    """Horizontal field of view of a cylindrical panorama, in radians.

    ``hfov = 2 * arctan((W / 2) / R)``: the finite image width crops the
    cylinder to less than 180 degrees.
    """
    if geom.projection is not Projection.CYLINDRICAL:
        raise ValueError("horizontal_fov applies to cylindrical panoramas")
    return 2.0 * np.arctan((geom.width / 2.0) / geom.radius)


def _cassini_angles(p):
    rho = np.linalg.norm(p, axis=-1)
    phi = np.arcsin(np.clip(np.divide(p[..., 0], rho, where=rho > 0,
                                      out=np.zeros_like(rho)), -1.0, 1.0))
    theta = wrap_angle(np.arctan2(p[..., 1], p[..., 2]))
    return rho, phi, theta


def project_to_pixel(points, geom: PanoramaGeometry):
    """Project Cartesian camera-frame points to continuous pixel coords.

    Returns ``(u, v)``. Coordinates may fall outside the raster; bounds are
    the sampler's concern. Rays for which the projection is undefined (the
    origin, the x axis for cylindrical panoramas, z <= 0 for perspective)
    raise ``ValueError``.
    """
    u, v, valid = project_to_pixel_masked(points, geom)
    if not np.all(valid):
        raise ValueError(f"point not projectable under {geom.projection.value}")
    return u, v


def project_to_pixel_masked(points, geom: PanoramaGeometry):
    """Like :func:`project_to_pixel` but flags undefined rays instead of
    raising. Returns ``(u, v, valid)``; u/v are 0 where invalid."""
    p = np.asarray(points, dtype=np.float64)
    w, h = float(geom.width), float(geom.height)
    kind = geom.projection
    if kind is Projection.CASSINI:
        rho, phi, theta = _cassini_angles(p)
        u = (phi + np.pi / 2.0) * w / np.pi
        v = (theta + np.pi) * h / TWO_PI
        valid = rho > 0.0
    elif kind is Projection.ERP:
        # Transverse aspect of the Cassini mapping: swap the x/y point axes
        # and the role of the two image axes.
        q = p[..., (1, 0, 2)]
        rho, lat, lon = _cassini_angles(q)
        u = (lon + np.pi) * w / TWO_PI
        v = (lat + np.pi / 2.0) * h / np.pi
        valid = rho > 0.0
    elif kind is Projection.CYLINDRICAL:
        rho_cyl = np.hypot(p[..., 1], p[..., 2])
        valid = rho_cyl > 0.0
        safe = np.where(valid, rho_cyl, 1.0)
        u = -(p[..., 0] / safe) * geom.radius + w / 2.0
        theta = wrap_angle(np.arctan2(p[..., 1], p[..., 2]))
        v = (theta + np.pi) * h / TWO_PI
    elif kind is Projection.PERSPECTIVE:
        valid = p[..., 2] > 0.0
        safe = np.where(valid, p[..., 2], 1.0)
        f = geom.radius
        u = w / 2.0 - f * p[..., 0] / safe
        v = h / 2.0 + f * p[..., 1] / safe
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown projection {kind}")
    u = np.where(valid, u, 0.0)
    v = np.where(valid, v, 0.0)
    return u, v, valid


def unproject_pixel(u, v, geom: PanoramaGeometry):
    """Map pixel coordinates to unit ray directions of shape (..., 3).

    Coordinates must lie within the raster span ``[-0.5, W-0.5) x
    [-0.5, H-0.5)``; periodic axes are the caller's to wrap.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    w, h = float(geom.width), float(geom.height)
    if np.any(u < -0.5) or np.any(u >= w - 0.5) or np.any(v < -0.5) or np.any(v >= h - 0.5):
        raise ValueError("pixel coordinates outside the image span")
    kind = geom.projection
    if kind is Projection.CASSINI:
        phi = u * np.pi / w - np.pi / 2.0
        theta = v * TWO_PI / h - np.pi
        return spherical_to_cartesian(np.ones(np.broadcast(u, v).shape), phi, theta)
    if kind is Projection.ERP:
        lon = u * TWO_PI / w - np.pi
        lat = v * np.pi / h - np.pi / 2.0
        ray = spherical_to_cartesian(np.ones(np.broadcast(u, v).shape), lat, lon)
        return ray[..., (1, 0, 2)]
    if kind is Projection.CYLINDRICAL:
        axial = (w / 2.0 - u) / geom.radius
        theta = v * TWO_PI / h - np.pi
        d = np.stack(np.broadcast_arrays(axial, np.sin(theta), np.cos(theta)), axis=-1)
        return d / np.linalg.norm(d, axis=-1, keepdims=True)
    if kind is Projection.PERSPECTIVE:
        f = geom.radius
        d = np.stack(np.broadcast_arrays((w / 2.0 - u) / f, (v - h / 2.0) / f,
                                         np.ones(np.broadcast(u, v).shape)), axis=-1)
        return d / np.linalg.norm(d, axis=-1, keepdims=True)
    raise ValueError(f"unknown projection {kind}")  # pragma: no cover


def local_scale_factors(geom: PanoramaGeometry, theta, rho):
    """Pixel-per-length densities (horizontal, vertical) at azimuth ``theta``
    and radial distance ``rho``.

    Spherical panoramas (Cassini/ERP) stretch horizontally by ``1 / cos
    theta`` while cylindrical ones sample both axes uniformly, which is why
    the latter keep vertical structure undistorted.
    """
    theta = np.asarray(theta, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho <= 0.0):
        raise ValueError("rho must be positive")
    f = geom.radius
    if geom.projection in (Projection.CASSINI, Projection.ERP):
        if np.any(np.abs(theta) >= np.pi / 2.0):
            raise ValueError("spherical horizontal scale requires |theta| < pi/2")
        return f / (rho * np.cos(theta)), f / rho * np.ones_like(theta)
    if geom.projection is Projection.CYLINDRICAL:
        s = f / rho
        return s * np.ones_like(theta), s * np.ones_like(theta)
    raise ValueError("scale factors defined for panoramic projections only")


def rotation_about_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_about_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_about_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_from_rpy(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Compose roll (about x), pitch (about y), yaw (about z), applied in
    that order: ``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``."""
    return rotation_about_z(yaw) @ rotation_about_y(pitch) @ rotation_about_x(roll)


@dataclass(frozen=True)
class Pose:
    """Rigid camera-to-world transform: ``p_world = R @ p_cam + t``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if not np.allclose(r @ r.T, np.eye(3), atol=_ORTHONORMAL_TOL):
            raise ValueError("rotation is not orthonormal")
        if np.linalg.det(r) < 0.0:
            raise ValueError("rotation must be proper (det +1)")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    def transform(self, points):
        """Apply the pose to camera-frame points of shape (..., 3)."""
        p = np.asarray(points, dtype=np.float64)
        return p @ self.rotation.T + self.translation

    def inverse(self) -> "Pose":
        rt = self.rotation.T
        return Pose(rt, -rt @ self.translation)

    def compose(self, other: "Pose") -> "Pose":
        """Pose mapping ``x -> self(other(x))``."""
        return Pose(self.rotation @ other.rotation,
                    self.rotation @ other.translation + self.translation)
