"""Multi-camera depth estimation: pair enumeration, per-pair matching, and
confidence-weighted fusion in a shared reference frame.

Every unordered camera pair contributes one depth hypothesis. A pair is
rectified into a baseline-aligned cylindrical frame, block-matched, and its
disparity converted to Euclidean depth on a Cassini grid in the pair's own
frame. All hypotheses are then forward-warped to the rig reference camera,
where a confidence-weighted average fuses them; pixels no pair can see stay
invalid rather than being invented.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .disparity import cylindrical_disparity_to_cassini_depth, forward_warp_depth
from .geometry import PanoramaGeometry, Pose, Projection
from .matching import MatchParams, match_pair
from .rasters import Panorama
from .resample import rectify_pair, reproject_panorama
from .rig import RigConfig


def enumerate_pairs(rig: RigConfig) -> list[tuple[str, str]]:
    """All unordered camera pairs, in id order, with the rig reference
    camera always placed on the left side of its pairs."""
    ids = rig.ordered_ids()
    if len(ids) < 2:
        raise ValueError("pair enumeration needs at least two cameras")
    pairs = []
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            a, b = ids[i], ids[j]
            if b == rig.reference:
                a, b = b, a
            pairs.append((a, b))
    return pairs


def pixels_per_radian(geom: PanoramaGeometry) -> float:
    """Angular sampling density along the full-turn axis."""
    if geom.projection in (Projection.CASSINI, Projection.CYLINDRICAL):
        return geom.height / (2.0 * np.pi)
    if geom.projection is Projection.ERP:
        return geom.width / (2.0 * np.pi)
    raise ValueError(f"no full-turn axis in {geom.projection.value}")


def match_geometry(geom: PanoramaGeometry) -> PanoramaGeometry:
    """Cylindrical grid for stereo matching at the input's resolution."""
    h = int(round(2.0 * np.pi * pixels_per_radian(geom)))
    return PanoramaGeometry(Projection.CYLINDRICAL, h // 2, h)


def depth_geometry(geom: PanoramaGeometry) -> PanoramaGeometry:
    """Cassini grid for depth maps at the input's resolution."""
    ppr = pixels_per_radian(geom)
    return PanoramaGeometry(Projection.CASSINI,
                            int(round(np.pi * ppr)),
                            int(round(2.0 * np.pi * ppr)))


def output_geometry(geom: PanoramaGeometry,
                    projection: Projection) -> PanoramaGeometry:
    """Panoramic grid of the requested projection at matched resolution."""
    ppr = pixels_per_radian(geom)
    if projection is Projection.CASSINI:
        return depth_geometry(geom)
    if projection is Projection.CYLINDRICAL:
        return match_geometry(geom)
    if projection is Projection.ERP:
        return PanoramaGeometry(Projection.ERP,
                                int(round(2.0 * np.pi * ppr)),
                                int(round(np.pi * ppr)))
    raise ValueError(f"unsupported output projection {projection.value}")


def fuse_depths(depths: list[Panorama], weights: list[np.ndarray]
                ) -> tuple[Panorama, np.ndarray]:
    """Weighted per-pixel average of depth hypotheses.

    A pixel fuses only contributions that are valid and positively
    weighted; with none, it stays invalid. Returns the fused panorama and
    the per-pixel total weight.
    """
    if not depths:
        raise ValueError("nothing to fuse")
    if len(depths) != len(weights):
        raise ValueError("one weight map per depth map required")
    geom = depths[0].geometry
    for d in depths[1:]:
        if d.geometry != geom:
            raise ValueError("all depth maps must share a geometry")
    num = np.zeros((geom.height, geom.width), dtype=np.float64)
    den = np.zeros((geom.height, geom.width), dtype=np.float64)
    for depth, weight in zip(depths, weights):
        w = np.asarray(weight, dtype=np.float64)
        if w.shape != num.shape:
            raise ValueError("weight shape must match the geometry")
        use = depth.valid_mask() & (w > 0.0)
        num += np.where(use, w * np.asarray(depth.data, np.float64), 0.0)
        den += np.where(use, w, 0.0)
    ok = den > 0.0
    fused = np.where(ok, num / np.where(ok, den, 1.0), 0.0)
    return Panorama(geom, fused.astype(np.float32), ok), den


def _consolidate_pole_columns(fused: Panorama, total: np.ndarray
                              ) -> tuple[Panorama, np.ndarray]:
    """Share one fused value across each near-pole Cassini column.

    The rows of a column whose ring sits within one pixel pitch of the
    raster's pole axis all view (nearly) the same direction, so individual
    rows cannot be filled independently: a forward splat offers only a
    handful of source pixels for hundreds of destination cells. Fusing the
    column's valid entries into a single hypothesis and broadcasting it
    treats the column as what it is, one measurement.
    """
    geom = fused.geometry
    if geom.projection is not Projection.CASSINI:
        return fused, total
    data = np.array(fused.data, dtype=np.float32)
    mask = np.array(fused.valid_mask())
    out_total = np.array(total, dtype=np.float64)
    h, w = geom.height, geom.width
    for col in [c for c in range(w) if min(c, w - c) <= 1]:
        rows = mask[:, col]
        wt = out_total[:, col]
        norm = np.where(rows, wt, 0.0).sum()
        if norm <= 0.0:
            continue
        value = np.where(rows, wt * np.asarray(data[:, col], np.float64),
                         0.0).sum() / norm
        data[:, col] = np.float32(value)
        mask[:, col] = True
        out_total[:, col] = norm / h
    return Panorama(geom, data, mask), out_total


@dataclass(frozen=True)
class PairProduct:
    """Everything one camera pair contributes to the fusion."""

    pair: tuple[str, str]
    baseline: float
    rect_pose: Pose
    disparity: Panorama
    confidence: np.ndarray
    aligned_depth: Panorama
    aligned_weight: np.ndarray


@dataclass(frozen=True)
class PipelineResult:
    """Fused depth in the reference frame plus per-pair diagnostics."""

    depth: Panorama
    weight: np.ndarray
    reference_pose: Pose
    pairs: list[PairProduct]


def run_pipeline(rig: RigConfig, images: dict[str, Panorama],
                 params: MatchParams | None = None,
                 out_projection: Projection = Projection.CASSINI,
                 min_disparity: float = 1.0,
                 workers=None) -> PipelineResult:
    """Estimate fused depth for a rig from one panorama per camera.

    ``images`` maps camera ids to panoramas sharing the rig's geometry.
    The result lives at the reference camera, oriented along the reference
    camera's first baseline; choose the raster with ``out_projection``.
    Matches below ``min_disparity`` pixels are discarded: depth scales with
    the reciprocal of disparity, so below about a pixel the triangulation
    is all quantization noise.
    """
    ids = rig.ordered_ids()
    if len(ids) < 3:
        raise ValueError("multi-view fusion needs at least three cameras")
    if params is None:
        # Clean renders reward absolute-difference costs over census bits,
        # and a sharp temperature keeps the soft argmin on the cost minimum
        # instead of letting far candidates drag it off; both cut the number
        # of pixels the left-right check has to discard.
        params = MatchParams(method="sad", temperature=0.1)
    missing = [i for i in ids if i not in images]
    if missing:
        raise ValueError(f"missing images for cameras: {', '.join(missing)}")
    for cam_id in ids:
        if images[cam_id].geometry != rig.geometry:
            raise ValueError(f"image for {cam_id} does not match the rig geometry")

    pairs = enumerate_pairs(rig)
    cyl_geom = match_geometry(rig.geometry)
    cas_geom = depth_geometry(rig.geometry)
    ref_pair = next(p for p in pairs if p[0] == rig.reference)

    products = []
    ref_pose = None
    for pair in pairs:
        left_id, right_id = pair
        rect = rectify_pair(images[left_id], rig.camera(left_id).pose,
                            images[right_id], rig.camera(right_id).pose,
                            cyl_geom, workers=workers)
        if pair == ref_pair:
            ref_pose = rect.pose
        products.append((pair, rect))

    assert ref_pose is not None
    fused_inputs = []
    fused_weights = []
    finished = []
    for pair, rect in products:
        match = match_pair(rect.left, rect.right, params, workers)
        keep = match.disparity.valid_mask() & (match.disparity.data >= min_disparity)
        disparity = Panorama(cyl_geom, match.disparity.data, keep)
        depth = cylindrical_disparity_to_cassini_depth(
            disparity, rect.baseline, cas_geom, workers)
        conf = Panorama(cyl_geom, match.confidence.astype(np.float32), keep)
        conf_cas = reproject_panorama(conf, cas_geom, workers=workers)
        payload = np.where(conf_cas.valid_mask(),
                           np.clip(np.asarray(conf_cas.data, np.float64), 0.0, 1.0),
                           0.0)
        if np.linalg.norm(rect.pose.translation - ref_pose.translation) < 1e-12:
            # Shares the reference center: aligning is a pure rotation, and
            # center distances are rotation-invariant, so a backward nearest
            # resample is exact and leaves none of the splat gaps a forward
            # warp would.
            rot = rect.pose.rotation.T @ ref_pose.rotation
            aligned = reproject_panorama(depth, cas_geom, rotation=rot,
                                         interp="nearest", workers=workers)
            w_src = Panorama(cas_geom, payload.astype(np.float32),
                             depth.valid_mask())
            w_pano = reproject_panorama(w_src, cas_geom, rotation=rot,
                                        interp="nearest", workers=workers)
            weight = np.where(aligned.valid_mask(),
                              np.asarray(w_pano.data, np.float64), 0.0)
        else:
            aligned, weight = forward_warp_depth(depth, rect.pose, ref_pose,
                                                 payload=payload, supersample=2,
                                                 workers=workers)
            weight = np.where(aligned.valid_mask(), weight, 0.0)
        fused_inputs.append(aligned)
        fused_weights.append(weight)
        finished.append(PairProduct(pair, rect.baseline, rect.pose,
                                    disparity, match.confidence,
                                    aligned, weight))

    fused, total = fuse_depths(fused_inputs, fused_weights)
    fused, total = _consolidate_pole_columns(fused, total)
    if out_projection is not Projection.CASSINI:
        out_geom = output_geometry(rig.geometry, out_projection)
        fused = reproject_panorama(fused, out_geom, interp="nearest",
                                   workers=workers)
        total_pano = reproject_panorama(
            Panorama(cas_geom, total.astype(np.float32)), out_geom,
            interp="nearest", workers=workers)
        total = np.asarray(total_pano.data, dtype=np.float64)
    return PipelineResult(fused, total, ref_pose, finished)
