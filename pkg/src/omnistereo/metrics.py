"""Disparity and depth evaluation metrics.

Error rates are percentages in [0, 100]; counts report how many pixels the
statistics were computed over. Depth metrics involving ratios or logs
silently exclude pixels where either map is nonpositive, which keeps
hole-coded zeros from poisoning the averages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import PanoramaGeometry, Projection

# Widest horizontal field a square cylindrical panorama can cover; used as
# the default evaluation band for panoramic depth.
DEFAULT_EVAL_HFOV = 2.0 * math.atan(math.pi / 2.0)


@dataclass(frozen=True)
class DisparityMetrics:
    """Pixel-space error summary; ``bad*`` are strict ``> k`` px rates and
    ``d1`` flags errors above 3 px that also exceed 5 % of the truth."""

    mae: float
    rmse: float
    bad1: float
    bad3: float
    bad5: float
    d1: float
    count: int

    def as_dict(self):
        return {"mae": self.mae, "rmse": self.rmse, "bad1": self.bad1,
                "bad3": self.bad3, "bad5": self.bad5, "d1": self.d1,
                "count": self.count}


@dataclass(frozen=True)
class DepthMetrics:
    """Metric-space error summary with scale-sensitive and scale-free terms."""

    mae: float
    rmse: float
    abs_rel: float
    sq_rel: float
    silog: float
    delta1: float
    delta2: float
    delta3: float
    count: int

    def as_dict(self):
        return {"mae": self.mae, "rmse": self.rmse, "abs_rel": self.abs_rel,
                "sq_rel": self.sq_rel, "silog": self.silog,
                "delta1": self.delta1, "delta2": self.delta2,
                "delta3": self.delta3, "count": self.count}


def _select(pred, gt, mask):
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ValueError("prediction and ground truth must share a shape")
    if mask is None:
        keep = np.ones(pred.shape, dtype=bool)
    else:
        keep = np.asarray(mask, dtype=bool)
        if keep.shape != pred.shape:
            raise ValueError("mask shape must match the maps")
    return pred[keep], gt[keep]


def disparity_metrics(pred, gt, mask=None) -> DisparityMetrics:
    """Compare disparity maps over the (optionally masked) shared support."""
    p, g = _select(pred, gt, mask)
    if p.size == 0:
        raise ValueError("no pixels to evaluate")
    err = np.abs(p - g)
    d1_bad = (err > 3.0) & (err > 0.05 * np.abs(g))
    return DisparityMetrics(
        mae=float(err.mean()),
        rmse=float(np.sqrt((err ** 2).mean())),
        bad1=float((err > 1.0).mean() * 100.0),
        bad3=float((err > 3.0).mean() * 100.0),
        bad5=float((err > 5.0).mean() * 100.0),
        d1=float(d1_bad.mean() * 100.0),
        count=int(p.size),
    )


def depth_metrics(pred, gt, mask=None) -> DepthMetrics:
    """Compare depth maps over the masked support, positives only."""
    p, g = _select(pred, gt, mask)
    positive = (p > 0.0) & (g > 0.0)
    p, g = p[positive], g[positive]
    if p.size == 0:
        raise ValueError("no pixels to evaluate")
    err = np.abs(p - g)
    log_err = np.log(p) - np.log(g)
    ratio = np.maximum(p / g, g / p)
    return DepthMetrics(
        mae=float(err.mean()),
        rmse=float(np.sqrt((err ** 2).mean())),
        abs_rel=float((err / g).mean()),
        sq_rel=float(((p - g) ** 2 / g).mean()),
        silog=float((log_err ** 2).mean() - log_err.mean() ** 2),
        delta1=float((ratio < 1.25).mean() * 100.0),
        delta2=float((ratio < 1.25 ** 2).mean() * 100.0),
        delta3=float((ratio < 1.25 ** 3).mean() * 100.0),
        count=int(p.size),
    )


def central_band_mask(geom: PanoramaGeometry,
                      hfov: float = DEFAULT_EVAL_HFOV) -> np.ndarray:
    """Pixels whose elevation stays within ``hfov`` of the equator.

    Panoramic depth quality is usually reported over the band both stereo
    projections resolve well; columns outside it see the baseline axis at
    grazing angles.
    """
    if not 0.0 < hfov < np.pi:
        raise ValueError("hfov must be in (0, pi)")
    half = hfov / 2.0
    u = np.arange(geom.width, dtype=np.float64)
    if geom.projection is Projection.CASSINI:
        elev = u * np.pi / geom.width - np.pi / 2.0
    elif geom.projection is Projection.CYLINDRICAL:
        elev = np.arctan((geom.width / 2.0 - u) / geom.radius)
    else:
        raise ValueError(f"no central band defined for {geom.projection.value}")
    cols = np.abs(elev) <= half
    return np.broadcast_to(cols[None, :], (geom.height, geom.width)).copy()
