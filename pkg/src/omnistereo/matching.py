"""Block matching for rectified panorama pairs.

The epipolar direction in a rectified pair runs along columns (``u``), so a
disparity ``d`` matches left pixel ``(v, u)`` against right pixel
``(v, u - d)``. Rows (``v``) sweep the periodic azimuth, so every windowed
operation wraps vertically and clamps horizontally.

The matcher scores candidates with a census transform (Hamming distance of
local rank codes) or summed absolute differences, turns costs into a
per-pixel probability distribution with a softmax, and regresses a subpixel
disparity as the distribution's mean. Confidence is the probability mass
within one pixel of the regressed value.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .parallel import map_rows
from .rasters import Panorama

INVALID_COST = np.float32(1.0e4)

_METHODS = ("census", "sad")


def default_max_disparity(width: int) -> int:
    """Search range that covers the bundled rigs at any resolution.

    Scales a 272-candidate budget (tuned for 512-column panoramas)
    proportionally with image width, never below 16 candidates and never
    beyond the image width itself.
    """
    if width < 1:
        raise ValueError(f"width must be positive, got {width}")
    return min(max(16, (272 * width) // 512), width)


@dataclass(frozen=True)
class MatchParams:
    """Knobs for :func:`match_pair`.

    ``max_disparity`` of ``None`` defers to :func:`default_max_disparity`.
    ``agg_window`` of 0 skips cost aggregation.
    """

    max_disparity: int | None = None
    method: str = "census"
    window: int = 7
    agg_window: int = 5
    temperature: float = 1.0
    lr_check: bool = True
    lr_tolerance: float = 1.0

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValueError(f"unknown matching method {self.method!r}")
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("window must be an odd integer >= 3")
        if self.window > 8:
            # 8x8-1 neighbours would overflow the 64-bit census code.
            raise ValueError("window must be <= 7 for census codes")
        if self.agg_window and (self.agg_window < 3 or self.agg_window % 2 == 0):
            raise ValueError("agg_window must be 0 or an odd integer >= 3")
        if self.temperature <= 0.0:
            raise ValueError("temperature must be positive")
        if self.lr_tolerance < 0.0:
            raise ValueError("lr_tolerance must be non-negative")


@dataclass(frozen=True)
class MatchResult:
    """Left-view disparity plus the matcher's per-pixel confidence."""

    disparity: Panorama
    confidence: np.ndarray
    probabilities: np.ndarray | None = None


def to_grayscale(data: np.ndarray) -> np.ndarray:
    """Channel-mean intensity; single-channel input passes through."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 3:
        return arr.mean(axis=2)
    return arr


def _window_offsets(window: int):
    r = window // 2
    return [(dv, du) for dv in range(-r, r + 1) for du in range(-r, r + 1)]


def census_transform(image: np.ndarray, window: int = 7) -> np.ndarray:
    """Pack neighbour-vs-center rank bits into a uint64 per pixel.

    The window wraps vertically (periodic azimuth) and clamps to the edge
    horizontally; bits are ordered row-major over the window, center
    excluded.
    """
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape
    r = window // 2
    padded = np.pad(img, ((0, 0), (r, r)), mode="edge")
    code = np.zeros((h, w), dtype=np.uint64)
    one = np.uint64(1)
    for dv, du in _window_offsets(window):
        if dv == 0 and du == 0:
            continue
        neighbor = np.roll(padded, -dv, axis=0)[:, r + du:r + du + w]
        code = (code << one) | (neighbor < img).astype(np.uint64)
    return code


def _box_sum(image: np.ndarray, window: int) -> np.ndarray:
    """Windowed sum with vertical wrap and horizontal edge clamp, accumulated
    in a fixed offset order for bit-reproducibility."""
    h, w = image.shape
    r = window // 2
    padded = np.pad(image, ((0, 0), (r, r)), mode="edge")
    acc = np.zeros((h, w), dtype=np.float64)
    for dv, du in _window_offsets(window):
        acc += np.roll(padded, -dv, axis=0)[:, r + du:r + du + w]
    return acc


def cost_volume(left: np.ndarray, right: np.ndarray, max_disparity: int,
                method: str = "census", window: int = 7,
                left_mask: np.ndarray | None = None,
                right_mask: np.ndarray | None = None,
                workers=None) -> np.ndarray:
    """Matching cost for every (row, column, candidate) triple.

    ``cost[v, u, d]`` scores left pixel ``(v, u)`` against right pixel
    ``(v, u - d)``; entries whose right pixel falls off the raster or whose
    either center is invalid hold :data:`INVALID_COST`.
    """
    gl = to_grayscale(left)
    gr = to_grayscale(right)
    if gl.shape != gr.shape:
        raise ValueError("left and right images must share a shape")
    h, w = gl.shape
    if not 1 <= max_disparity <= w:
        raise ValueError(f"max_disparity must be in [1, {w}], got {max_disparity}")
    ml = np.ones((h, w), dtype=bool) if left_mask is None else np.asarray(left_mask, bool)
    mr = np.ones((h, w), dtype=bool) if right_mask is None else np.asarray(right_mask, bool)

    if method == "census":
        cl = census_transform(gl, window)
        cr = census_transform(gr, window)
    elif method != "sad":
        raise ValueError(f"unknown matching method {method!r}")

    vol = np.full((h, w, max_disparity), INVALID_COST, dtype=np.float32)

    def fill(d_slice):
        for d in range(d_slice.start, d_slice.stop):
            valid = ml[:, d:] & mr[:, :w - d]
            if method == "census":
                ham = np.bitwise_count(cl[:, d:] ^ cr[:, :w - d]).astype(np.float32)
                vol[:, d:, d] = np.where(valid, ham, INVALID_COST)
            else:
                shifted = gr[:, np.clip(np.arange(w) - d, 0, w - 1)]
                sad = _box_sum(np.abs(gl - shifted), window)[:, d:].astype(np.float32)
                vol[:, d:, d] = np.where(valid, sad, INVALID_COST)

    map_rows(fill, max_disparity, workers)
    return vol


def aggregate_costs(vol: np.ndarray, window: int = 5) -> np.ndarray:
    """Average costs over a window, ignoring invalid entries.

    A pixel with an invalid center stays invalid; a valid center whose
    window holds no other valid entries keeps its own cost.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError("window must be an odd integer >= 3")
    h, w, n_d = vol.shape
    valid = vol < INVALID_COST / 2
    r = window // 2
    out = np.full_like(vol, INVALID_COST)
    # float32 keeps the temporaries at volume size; the fixed offset order
    # makes the rounding reproducible.
    contrib = np.where(valid, vol, np.float32(0.0))
    pad_c = np.pad(contrib, ((0, 0), (r, r), (0, 0)), mode="edge")
    pad_v = np.pad(valid, ((0, 0), (r, r), (0, 0)), mode="edge")
    total = np.zeros((h, w, n_d), dtype=np.float32)
    count = np.zeros((h, w, n_d), dtype=np.float32)
    for dv, du in _window_offsets(window):
        total += np.roll(pad_c, -dv, axis=0)[:, r + du:r + du + w]
        count += np.roll(pad_v, -dv, axis=0)[:, r + du:r + du + w]
    keep = valid & (count > 0)
    out[keep] = total[keep] / count[keep]
    return out


def cost_probabilities(vol: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """Per-pixel softmax over disparity candidates: ``exp(-cost / t)``,
    normalized along the last axis in double precision."""
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    c = np.asarray(vol, dtype=np.float64)
    shifted = c - c.min(axis=-1, keepdims=True)
    ex = np.exp(-shifted / temperature)
    return ex / ex.sum(axis=-1, keepdims=True)


def regress_disparity(prob: np.ndarray) -> np.ndarray:
    """Mean of the disparity distribution (subpixel estimate)."""
    d = np.arange(prob.shape[-1], dtype=np.float64)
    return prob @ d


def confidence_from_probabilities(prob: np.ndarray, disparity: np.ndarray) -> np.ndarray:
    """Probability mass within one candidate of the regressed disparity."""
    n_d = prob.shape[-1]
    r = np.floor(np.asarray(disparity) + 0.5).astype(np.int64)
    r = np.clip(r, 0, n_d - 1)
    conf = np.zeros(prob.shape[:-1], dtype=np.float64)
    for off in (-1, 0, 1):
        idx = r + off
        ok = (idx >= 0) & (idx < n_d)
        vals = np.take_along_axis(prob, np.clip(idx, 0, n_d - 1)[..., None], axis=-1)
        conf += np.where(ok, vals[..., 0], 0.0)
    return conf


def left_right_consistent(disp_left: np.ndarray, disp_right: np.ndarray,
                          tolerance: float = 1.0) -> np.ndarray:
    """Flag left pixels whose match, viewed from the right image, points
    back within ``tolerance`` pixels."""
    h, w = disp_left.shape
    u = np.arange(w)[None, :]
    target = u - np.floor(disp_left + 0.5).astype(np.int64)
    inside = (target >= 0) & (target < w)
    echo = np.take_along_axis(disp_right, np.clip(target, 0, w - 1), axis=1)
    return inside & (np.abs(disp_left - echo) <= tolerance)


def match_pair(left: Panorama, right: Panorama,
               params: MatchParams | None = None, workers=None,
               keep_probabilities: bool = False) -> MatchResult:
    """Estimate left-view disparity for a rectified panorama pair."""
    if params is None:
        params = MatchParams()
    if left.geometry != right.geometry:
        raise ValueError("rectified views must share a geometry")
    n_d = params.max_disparity
    if n_d is None:
        n_d = default_max_disparity(left.geometry.width)

    vol = cost_volume(left.data, right.data, n_d, params.method, params.window,
                      left.valid_mask(), right.valid_mask(), workers)
    if params.agg_window:
        vol = aggregate_costs(vol, params.agg_window)
    prob = cost_probabilities(vol, params.temperature)
    disp = regress_disparity(prob)
    conf = confidence_from_probabilities(prob, disp)
    matched = vol.min(axis=-1) < INVALID_COST / 2

    if params.lr_check:
        vol_r = _right_cost_volume(left, right, n_d, params, workers)
        if params.agg_window:
            vol_r = aggregate_costs(vol_r, params.agg_window)
        disp_r = regress_disparity(cost_probabilities(vol_r, params.temperature))
        matched &= left_right_consistent(disp, disp_r, params.lr_tolerance)

    out = Panorama(left.geometry, disp.astype(np.float32), matched)
    return MatchResult(out, conf, prob if keep_probabilities else None)


def _right_cost_volume(left: Panorama, right: Panorama, n_d: int,
                       params: MatchParams, workers=None) -> np.ndarray:
    """Cost volume for the right view: ``cost[v, u, d]`` scores right pixel
    ``(v, u)`` against left pixel ``(v, u + d)``. Mirroring both images
    reduces this to the left-view builder."""
    vol = cost_volume(np.asarray(right.data)[:, ::-1],
                      np.asarray(left.data)[:, ::-1], n_d,
                      params.method, params.window,
                      right.valid_mask()[:, ::-1], left.valid_mask()[:, ::-1],
                      workers)
    return vol[:, ::-1, :]
