"""Raster container and sampling primitives shared by the pipeline stages.

A :class:`Panorama` couples a float raster with its projection geometry and
an optional validity mask. The same container carries imagery (values in
[0, 1]), disparity, depth, and confidence maps; the meaning of the values is
the operation's contract, not the container's.

Sampling respects each projection's periodic axis: the vertical axis wraps
for Cassini and cylindrical panoramas (it carries the full 360 degrees),
the horizontal axis wraps for ERP. Non-periodic axes mask out-of-range
samples instead of clamping, and any invalid contributing texel invalidates
the destination (conservative masking).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PanoramaGeometry, Projection


def periodic_axes(geom: PanoramaGeometry):
    """Whether (u, v) wrap for the given projection."""
    if geom.projection in (Projection.CASSINI, Projection.CYLINDRICAL):
        return False, True
    if geom.projection is Projection.ERP:
        return True, False
    return False, False


def polar_axes(geom: PanoramaGeometry):
    """Whether (u, v) end on the sphere's pole points.

    A polar axis does not wrap, but the raster continues across the pole
    onto the meridian half a turn away, so taps past its ends can be
    reflected instead of discarded.
    """
    if geom.projection is Projection.CASSINI:
        return True, False
    if geom.projection is Projection.ERP:
        return False, True
    return False, False


@dataclass
class Panorama:
    """Float raster plus geometry. ``data`` is (H, W) or (H, W, 3);
    ``mask`` is (H, W) boolean or None meaning fully valid."""

    geometry: PanoramaGeometry
    data: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.ndim not in (2, 3) or (d.ndim == 3 and d.shape[2] != 3):
            raise ValueError(f"raster must be (H, W) or (H, W, 3), got {d.shape}")
        if d.shape[:2] != (self.geometry.height, self.geometry.width):
            raise ValueError(
                f"raster shape {d.shape[:2]} does not match geometry {self.geometry}")
        self.data = d
        if self.mask is not None:
            m = np.asarray(self.mask, dtype=bool)
            if m.shape != d.shape[:2]:
                raise ValueError("mask shape must match the raster")
            self.mask = m

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else self.data.shape[2]

    def valid_mask(self) -> np.ndarray:
        """Mask as a concrete boolean array."""
        if self.mask is None:
            return np.ones(self.data.shape[:2], dtype=bool)
        return self.mask

    def valid_fraction(self) -> float:
        return float(np.mean(self.valid_mask()))


def _gather(data, vi, ui):
    return data[vi, ui]


def _index_valid(idx, size, wrap):
    if wrap:
        return idx % size, np.ones(idx.shape, dtype=bool)
    ok = (idx >= 0) & (idx < size)
    return np.clip(idx, 0, size - 1), ok


def _reflect_polar(idx, size):
    """Fold tap indices past a polar axis end back across the pole.

    The low pole sits on index 0 and the high pole on index ``size`` (half
    a pixel past the last row/column), so ``-i`` folds to ``i`` and ``i``
    to ``2*size - i``; the lone on-pole tap at ``size`` borrows the nearest
    grid line. Returns ``(index, crossed, ok)`` where ``crossed`` marks
    taps that must shift half a turn along the wrapping axis.
    """
    crossed = (idx < 0) | (idx >= size)
    out = np.where(idx < 0, -idx, idx)
    out = np.where(idx >= size, np.minimum(2 * size - idx, size - 1), out)
    ok = (out >= 0) & (out < size)
    return np.clip(out, 0, size - 1), crossed, ok


def sample_nearest(pano: Panorama, u, v):
    """Nearest-neighbor sample at continuous coordinates.

    Returns ``(values, valid)``. Halfway coordinates round up. On a polar
    axis, taps past the poles fold onto the meridian half a turn away.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    geom = pano.geometry
    wrap_u, wrap_v = periodic_axes(geom)
    polar_u, polar_v = polar_axes(geom)
    ui = np.floor(u + 0.5).astype(np.int64)
    vi = np.floor(v + 0.5).astype(np.int64)
    if polar_u:
        ui, crossed, ok_u = _reflect_polar(ui, geom.width)
        vi = vi + np.where(crossed, geom.height // 2, 0)
    else:
        ui, ok_u = _index_valid(ui, geom.width, wrap_u)
    if polar_v:
        vi, crossed, ok_v = _reflect_polar(vi, geom.height)
        ui = (ui + np.where(crossed, geom.width // 2, 0)) % geom.width
    else:
        vi, ok_v = _index_valid(vi, geom.height, wrap_v)
    valid = ok_u & ok_v
    if pano.mask is not None:
        valid = valid & pano.mask[vi, ui]
    values = _gather(pano.data, vi, ui)
    return values, valid


def sample_bilinear(pano: Panorama, u, v):
    """Bilinear sample at continuous coordinates.

    Returns ``(values, valid)``; a destination is valid only when all four
    contributing texels are in range and valid. On a polar axis, taps past
    the poles fold onto the meridian half a turn away, so interpolation
    continues smoothly across the pole.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    geom = pano.geometry
    wrap_u, wrap_v = periodic_axes(geom)
    polar_u, polar_v = polar_axes(geom)
    u0 = np.floor(u).astype(np.int64)
    v0 = np.floor(v).astype(np.int64)
    fu = u - u0
    fv = v - v0
    h, w = geom.height, geom.width
    if polar_u:
        u0c, crossed0, ok_u0 = _reflect_polar(u0, w)
        u1c, crossed1, ok_u1 = _reflect_polar(u0 + 1, w)
        off0 = np.where(crossed0, h // 2, 0)
        off1 = np.where(crossed1, h // 2, 0)
        v0c = (v0 % h)
        v1c = ((v0 + 1) % h)
        taps = ((v0c + off0) % h, u0c), ((v0c + off1) % h, u1c), \
               ((v1c + off0) % h, u0c), ((v1c + off1) % h, u1c)
        valid = ok_u0 & ok_u1
    elif polar_v:
        v0c, crossed0, ok_v0 = _reflect_polar(v0, h)
        v1c, crossed1, ok_v1 = _reflect_polar(v0 + 1, h)
        off0 = np.where(crossed0, w // 2, 0)
        off1 = np.where(crossed1, w // 2, 0)
        u0c = (u0 % w)
        u1c = ((u0 + 1) % w)
        taps = (v0c, (u0c + off0) % w), (v0c, (u1c + off0) % w), \
               (v1c, (u0c + off1) % w), (v1c, (u1c + off1) % w)
        valid = ok_v0 & ok_v1
    else:
        u0c, ok_u0 = _index_valid(u0, w, wrap_u)
        u1c, ok_u1 = _index_valid(u0 + 1, w, wrap_u)
        v0c, ok_v0 = _index_valid(v0, h, wrap_v)
        v1c, ok_v1 = _index_valid(v0 + 1, h, wrap_v)
        taps = (v0c, u0c), (v0c, u1c), (v1c, u0c), (v1c, u1c)
        valid = ok_u0 & ok_u1 & ok_v0 & ok_v1
    if pano.mask is not None:
        m = pano.mask
        for vi, ui in taps:
            valid = valid & m[vi, ui]
    if pano.data.ndim == 3:
        fu = fu[..., None]
        fv = fv[..., None]
    (t00, t01, t10, t11) = [_gather(pano.data, vi, ui) for vi, ui in taps]
    top = t00 * (1.0 - fu) + t01 * fu
    bot = t10 * (1.0 - fu) + t11 * fu
    values = top * (1.0 - fv) + bot * fv
    return values, valid


def sample(pano: Panorama, u, v, interp: str):
    if interp == "nearest":
        return sample_nearest(pano, u, v)
    if interp == "bilinear":
        return sample_bilinear(pano, u, v)
    raise ValueError(f"unknown interpolation {interp!r}")
