"""Analytic scenes: closed-form ray casting for verifiable end-to-end runs.

Surfaces carry a procedural solid texture (a sum of plane waves evaluated at
the 3D hit point), so every view of a surface point sees the same value —
exactly what photometric stereo matching assumes. Depth, disparity, and
visibility all have closed forms, which makes the scenes usable as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PanoramaGeometry, Pose, unproject_pixel
from .rasters import Panorama

_EPS = 1e-9


def solid_texture(points):
    """Smooth, non-repeating scalar texture in [0, 1] over 3D space."""
    p = np.asarray(points, dtype=np.float64)
    waves = np.array([
        [7.1, 2.3, 0.9],
        [-1.7, 6.3, 3.1],
        [2.9, -3.9, 5.7],
        [11.0, 9.2, -7.4],
        [17.3, -4.1, 12.9],
        [-8.7, 14.6, -16.2],
        [5.3, -19.1, 9.7],
    ])
    phases = np.array([0.4, 1.9, 3.3, 5.1, 0.7, 2.6, 4.2])
    amps = np.array([0.12, 0.10, 0.08, 0.07, 0.06, 0.05, 0.04])
    acc = 0.5 + sum(a * np.sin(p @ k + c) for k, c, a in zip(waves, phases, amps))
    return np.clip(acc, 0.0, 1.0)


@dataclass(frozen=True)
class Plane:
    """Infinite textured plane through ``point`` with unit ``normal``."""

    point: np.ndarray
    normal: np.ndarray

    def intersect(self, origin, dirs):
        n = np.asarray(self.normal, dtype=np.float64)
        n = n / np.linalg.norm(n)
        p0 = np.asarray(self.point, dtype=np.float64)
        denom = np.asarray(dirs, dtype=np.float64) @ n
        num = (p0 - np.asarray(origin, dtype=np.float64)) @ n
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(np.abs(denom) > _EPS, num / denom, np.inf)
        return np.where(t > _EPS, t, np.inf)


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float

    def intersect(self, origin, dirs):
        d = np.asarray(dirs, dtype=np.float64)
        oc = np.asarray(origin, dtype=np.float64) - np.asarray(self.center, dtype=np.float64)
        b = d @ oc
        c = oc @ oc - self.radius ** 2
        disc = b * b - c
        sq = np.sqrt(np.maximum(disc, 0.0))
        t_near = -b - sq
        t_far = -b + sq
        t = np.where(t_near > _EPS, t_near, t_far)
        return np.where((disc > 0.0) & (t > _EPS), t, np.inf)


class Scene:
    """A list of primitives with a shared solid texture."""

    def __init__(self, primitives, texture=solid_texture):
        self.primitives = list(primitives)
        self.texture = texture

    def intersect(self, origin, dirs):
        """First-hit distances along unit rays; inf where nothing is hit."""
        t = np.full(np.asarray(dirs).shape[:-1], np.inf)
        for prim in self.primitives:
            t = np.minimum(t, prim.intersect(origin, dirs))
        return t

    def render(self, pose: Pose, geom: PanoramaGeometry):
        """Render the scene from a camera: returns (image, depth) panoramas.

        Depth values are Euclidean distances from the camera center; rays
        that escape the scene are invalid in both rasters.
        """
        u, v = np.meshgrid(np.arange(geom.width, dtype=np.float64),
                           np.arange(geom.height, dtype=np.float64))
        rays_cam = unproject_pixel(u, v, geom)
        rays = rays_cam @ pose.rotation.T
        t = self.intersect(pose.translation, rays)
        hit = np.isfinite(t)
        t_safe = np.where(hit, t, 1.0)
        points = pose.translation + rays * t_safe[..., None]
        tex = np.where(hit, self.texture(points), 0.0)
        image = Panorama(geom, tex.astype(np.float32), hit.copy())
        depth = Panorama(geom, np.where(hit, t_safe, 0.0).astype(np.float32), hit.copy())
        return image, depth

    def visible(self, points, camera_center, tol=1e-6):
        """Whether scene surface points are unoccluded from a camera."""
        p = np.asarray(points, dtype=np.float64)
        c = np.asarray(camera_center, dtype=np.float64)
        offsets = p - c
        dist = np.linalg.norm(offsets, axis=-1)
        safe = np.where(dist > 0, dist, 1.0)
        dirs = offsets / safe[..., None]
        t = self.intersect(c, dirs)
        return (dist > 0) & np.isfinite(t) & (t >= dist * (1.0 - tol) - tol)


def box_room(half_size: float, center=(0.0, 0.0, 0.0)) -> Scene:
    """Six inward-facing planes forming a cubic room."""
    c = np.asarray(center, dtype=np.float64)
    planes = []
    for axis in range(3):
        for sign in (-1.0, 1.0):
            n = np.zeros(3)
            n[axis] = sign
            planes.append(Plane(c + n * half_size, -n))
    return Scene(planes)


def room_with_sphere(half_size: float = 3.0, sphere_center=(0.4, 0.3, 2.0),
                     sphere_radius: float = 0.45) -> Scene:
    """The bundled demonstration scene: a cubic room plus one sphere."""
    prims = box_room(half_size).primitives + [
        Sphere(np.asarray(sphere_center, dtype=np.float64), sphere_radius)]
    return Scene(prims)


def square_rig_poses(side: float = 0.8):
    """Four identity-orientation cameras on a horizontal square (y up)."""
    return {
        "cam1": Pose(translation=np.array([0.0, 0.0, 0.0])),
        "cam2": Pose(translation=np.array([side, 0.0, 0.0])),
        "cam3": Pose(translation=np.array([side, 0.0, side])),
        "cam4": Pose(translation=np.array([0.0, 0.0, side])),
    }


def triangle_rig_poses(side: float = 0.5):
    """Three cameras on a vertical right triangle."""
    return {
        "cam1": Pose(translation=np.array([0.0, 0.0, 0.0])),
        "cam2": Pose(translation=np.array([0.0, side, 0.0])),
        "cam3": Pose(translation=np.array([0.0, 0.0, side])),
    }
