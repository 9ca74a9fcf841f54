"""Command-line front end.

One executable, ``omnistereo``, with a subcommand per pipeline stage, so
every capability is scriptable on files: panorama reprojection, pair
rectification, ground-truth conversion, block matching, disparity-to-depth,
depth alignment, multi-view fusion, evaluation, circular attention, and
colorized previews.

Conventions shared by all subcommands:

* float maps travel as PFM (invalid pixels encoded as NaN), images as PNG;
* ``--threads`` (or the ``OMNISTEREO_THREADS`` variable) sets the worker
  count without changing any output bit;
* exit codes: 0 success, 2 usage errors, 3 unreadable or malformed files,
  4 numerically invalid requests; failures print one ``ERROR: ...`` line
  to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .attention import AttentionParams, circular_attention, circular_attention_reference
from .disparity import cylindrical_disparity_to_cassini_depth, forward_warp_depth
from .fusion import match_geometry, output_geometry, run_pipeline
from .geometry import PanoramaGeometry, Pose, Projection, rotation_from_rpy
from .matching import MatchParams, match_pair
from .metrics import central_band_mask, depth_metrics, disparity_metrics
from .pfm import FormatError, mask_to_raster, raster_to_mask, read_pfm, write_pfm
from .rasters import Panorama
from .resample import convert_gt_disparity, rectify_pair, reproject_panorama
from .rig import load_rig
from .viz import colorize, read_png, write_png

EXIT_FORMAT = 3
EXIT_NUMERIC = 4


def _parse_projection(name: str) -> Projection:
    try:
        return Projection(name)
    except ValueError:
        raise ValueError(f"unknown projection {name!r}") from None


def _parse_rpy(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError("rotation must be roll,pitch,yaw in degrees")
    roll, pitch, yaw = (np.deg2rad(float(p)) for p in parts)
    return rotation_from_rpy(roll, pitch, yaw)


def _parse_pose(text: str) -> Pose:
    parts = [float(p) for p in text.split(",")]
    if len(parts) == 3:
        return Pose(translation=np.array(parts))
    if len(parts) == 6:
        rot = rotation_from_rpy(*np.deg2rad(parts[3:]))
        return Pose(rot, np.array(parts[:3]))
    raise ValueError("pose must be x,y,z or x,y,z,roll,pitch,yaw (degrees)")


def _read_map(path: str):
    """Load a raster: PFM keeps NaN holes, PNG is always fully valid."""
    if path.endswith(".pfm"):
        return raster_to_mask(read_pfm(path))
    data, _ = read_png(path)
    return data, None


def _write_map(path: str, data: np.ndarray, mask=None) -> None:
    if path.endswith(".pfm"):
        write_pfm(path, mask_to_raster(np.asarray(data, np.float32), mask))
        return
    out = np.asarray(data, dtype=np.float64)
    if mask is not None:
        out = np.where(mask if out.ndim == 2 else mask[..., None], out, 0.0)
    write_png(path, np.clip(out, 0.0, 1.0))


def _as_panorama(path: str, projection: Projection) -> Panorama:
    data, mask = _read_map(path)
    geom = PanoramaGeometry(projection, data.shape[1], data.shape[0])
    return Panorama(geom, data, mask)


def _threads(args):
    return args.threads


def _add_threads(parser):
    parser.add_argument("--threads", type=int, default=None,
                        help="worker count (default: OMNISTEREO_THREADS or 1)")


def _match_params(args) -> MatchParams:
    return MatchParams(max_disparity=args.max_disp, method=args.method,
                       window=args.window, agg_window=args.agg,
                       temperature=args.tau, lr_check=not args.no_lr_check,
                       lr_tolerance=args.lr_tol)


def _add_match_options(parser):
    parser.add_argument("--max-disp", type=int, default=None,
                        help="disparity candidates (default from width)")
    parser.add_argument("--method", choices=["census", "sad"], default="census")
    parser.add_argument("--window", type=int, default=7)
    parser.add_argument("--agg", type=int, default=5,
                        help="cost aggregation window (0 disables)")
    parser.add_argument("--tau", type=float, default=1.0,
                        help="softmax temperature")
    parser.add_argument("--no-lr-check", action="store_true")
    parser.add_argument("--lr-tol", type=float, default=1.0)


def cmd_convert(args) -> int:
    src = _as_panorama(args.input, _parse_projection(args.in_proj))
    out_proj = _parse_projection(args.out_proj)
    if args.out_width and args.out_height:
        out_geom = PanoramaGeometry(out_proj, args.out_width, args.out_height)
    else:
        out_geom = output_geometry(src.geometry, out_proj)
    rot = _parse_rpy(args.rot) if args.rot else None
    out = reproject_panorama(src, out_geom, rotation=rot, interp=args.interp,
                             workers=_threads(args))
    _write_map(args.output, out.data, out.mask)
    return 0


def cmd_rectify(args) -> int:
    rig = load_rig(args.rig)
    left_id, right_id = _parse_pair(args.pair)
    known = rig.ordered_ids()
    for cam_id in (left_id, right_id):
        if cam_id not in known:
            raise ValueError(f"camera {cam_id!r} not in rig")
    if left_id == right_id:
        raise ValueError("pair needs two distinct cameras")
    paths = _image_paths(rig, args.images, (left_id, right_id))
    left = _as_panorama(paths[left_id], rig.geometry.projection)
    right = _as_panorama(paths[right_id], rig.geometry.projection)
    pair = rectify_pair(left, rig.camera(left_id).pose,
                        right, rig.camera(right_id).pose,
                        match_geometry(rig.geometry), workers=_threads(args))
    _write_map(args.out_left, pair.left.data, pair.left.mask)
    _write_map(args.out_right, pair.right.data, pair.right.mask)
    print(f"baseline {pair.baseline:.17g}")
    return 0


def cmd_gt_convert(args) -> int:
    data, mask = _read_map(args.input)
    geom = PanoramaGeometry(Projection.CASSINI, data.shape[1], data.shape[0])
    gt = Panorama(geom, data, mask)
    out = convert_gt_disparity(gt, args.baseline, match_geometry(geom),
                               workers=_threads(args))
    _write_map(args.output, out.data, out.mask)
    return 0


def cmd_match(args) -> int:
    proj = _parse_projection(args.proj)
    left = _as_panorama(args.left, proj)
    right = _as_panorama(args.right, proj)
    result = match_pair(left, right, _match_params(args), workers=_threads(args))
    _write_map(args.output, result.disparity.data, result.disparity.mask)
    if args.out_conf:
        _write_map(args.out_conf, result.confidence.astype(np.float32),
                   result.disparity.mask)
    return 0


def cmd_to_depth(args) -> int:
    data, mask = _read_map(args.input)
    geom = PanoramaGeometry(Projection.CYLINDRICAL, data.shape[1], data.shape[0])
    disp = Panorama(geom, data, mask)
    out_geom = PanoramaGeometry(Projection.CASSINI, geom.height // 2, geom.height)
    depth = cylindrical_disparity_to_cassini_depth(disp, args.baseline, out_geom,
                                                   workers=_threads(args))
    _write_map(args.output, depth.data, depth.mask)
    return 0


def cmd_reproject_depth(args) -> int:
    data, mask = _read_map(args.input)
    proj = _parse_projection(args.proj)
    geom = PanoramaGeometry(proj, data.shape[1], data.shape[0])
    depth = Panorama(geom, data, mask)
    src_pose = _parse_pose(args.src_pose)
    ref_pose = _parse_pose(args.ref_pose)
    warped, _ = forward_warp_depth(depth, src_pose, ref_pose,
                                   workers=_threads(args))
    _write_map(args.output, warped.data, warped.mask)
    return 0


def cmd_fuse(args) -> int:
    rig = load_rig(args.rig)
    paths = _image_paths(rig, args.images, rig.ordered_ids())
    images = {cam_id: _as_panorama(path, rig.geometry.projection)
              for cam_id, path in paths.items()}
    result = run_pipeline(rig, images, _match_params(args),
                          out_projection=_parse_projection(args.out_proj),
                          workers=_threads(args))
    _write_map(args.output, result.depth.data, result.depth.mask)
    if args.out_conf:
        _write_map(args.out_conf, result.weight.astype(np.float32),
                   result.depth.mask)
    return 0


def cmd_eval(args) -> int:
    pred, pred_mask = _read_map(args.prediction)
    gt, gt_mask = _read_map(args.truth)
    if pred.shape != gt.shape:
        raise ValueError("prediction and ground truth sizes differ")
    mask = np.ones(pred.shape, dtype=bool)
    if pred_mask is not None:
        mask &= pred_mask
    if gt_mask is not None:
        mask &= gt_mask
    if args.band:
        geom = PanoramaGeometry(_parse_projection(args.proj),
                                pred.shape[1], pred.shape[0])
        mask &= central_band_mask(geom)
    if args.kind == "depth":
        metrics = depth_metrics(pred, gt, mask)
    else:
        metrics = disparity_metrics(pred, gt, mask)
    stats = metrics.as_dict()
    if args.json:
        print(json.dumps(stats, sort_keys=True))
    else:
        for key, value in stats.items():
            print(f"{key} {value:.6f}" if key != "count" else f"{key} {value}")
    return 0


def cmd_attn(args) -> int:
    data, mask = _read_map(args.input)
    params = _load_attention_params(args.params)
    features = np.asarray(data, dtype=np.float64)
    if features.ndim == 2:
        features = features[..., None]
    if features.shape[2] != params.d_in:
        raise ValueError(
            f"input has {features.shape[2]} channels, layer expects {params.d_in}")
    if args.oracle:
        out = circular_attention_reference(features, params)
    else:
        out = circular_attention(features, params, workers=_threads(args))
    out = out[..., 0] if (out.shape[2] == 1 and data.ndim == 2) else out
    _write_map(args.output, out.astype(np.float32), mask)
    return 0


def cmd_viz(args) -> int:
    data, mask = _read_map(args.input)
    if data.ndim != 2:
        raise ValueError("viz expects a single-channel map")
    rgb = colorize(data, mask, cmap=args.cmap, vmin=args.vmin, vmax=args.vmax)
    write_png(args.output, rgb)
    return 0


def _parse_pair(text: str) -> tuple[str, str]:
    parts = text.split(",")
    if len(parts) != 2 or not all(parts):
        raise ValueError("pair must be two camera ids, comma separated")
    return parts[0], parts[1]


def _image_paths(rig, overrides, needed) -> dict[str, str]:
    paths = {cam.cam_id: cam.image for cam in rig.cameras if cam.image}
    if overrides:
        for item in overrides.split(","):
            key, _, value = item.partition("=")
            if not value:
                raise ValueError("--images entries must look like id=path")
            paths[key] = value
    missing = [cam_id for cam_id in needed if cam_id not in paths]
    if missing:
        raise ValueError(f"no image given for cameras: {', '.join(missing)}")
    return {cam_id: paths[cam_id] for cam_id in needed}


def _load_attention_params(path: str) -> AttentionParams:
    try:
        return AttentionParams.load(path)
    except (OSError, KeyError, ValueError) as e:
        raise FormatError(f"bad attention parameter file: {e}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omnistereo",
        description="Panoramic multi-view stereo toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="reproject a panorama")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--in-proj", default="cassini")
    p.add_argument("--out-proj", required=True)
    p.add_argument("--out-width", type=int, default=None)
    p.add_argument("--out-height", type=int, default=None)
    p.add_argument("--rot", default=None, help="roll,pitch,yaw in degrees")
    p.add_argument("--interp", choices=["nearest", "bilinear"],
                   default="bilinear")
    _add_threads(p)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("rectify", help="rectify one camera pair")
    p.add_argument("--rig", required=True)
    p.add_argument("--pair", required=True, help="leftId,rightId")
    p.add_argument("--images", default=None, help="id=path[,id=path...]")
    p.add_argument("--out-left", required=True)
    p.add_argument("--out-right", required=True)
    _add_threads(p)
    p.set_defaults(func=cmd_rectify)

    p = sub.add_parser("gt-convert",
                       help="angular ground truth to pixel disparity")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--baseline", type=float, required=True)
    _add_threads(p)
    p.set_defaults(func=cmd_gt_convert)

    p = sub.add_parser("match", help="block-match a rectified pair")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("output")
    p.add_argument("--out-conf", default=None)
    p.add_argument("--proj", default="cylindrical")
    _add_match_options(p)
    _add_threads(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("to-depth", help="cylindrical disparity to depth")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--baseline", type=float, required=True)
    _add_threads(p)
    p.set_defaults(func=cmd_to_depth)

    p = sub.add_parser("reproject-depth",
                       help="move a depth map to another camera")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--src-pose", required=True,
                   help="x,y,z[,roll,pitch,yaw degrees]")
    p.add_argument("--ref-pose", required=True)
    p.add_argument("--proj", default="cassini")
    _add_threads(p)
    p.set_defaults(func=cmd_reproject_depth)

    p = sub.add_parser("fuse", help="full multi-view depth pipeline")
    p.add_argument("--rig", required=True)
    p.add_argument("--images", default=None, help="id=path[,id=path...]")
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--out-conf", default=None)
    p.add_argument("--out-proj", default="cassini")
    _add_match_options(p)
    _add_threads(p)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("eval", help="score a map against ground truth")
    p.add_argument("prediction")
    p.add_argument("truth")
    p.add_argument("--kind", choices=["depth", "disparity"], default="depth")
    p.add_argument("--band", action="store_true",
                   help="restrict to the central evaluation band")
    p.add_argument("--proj", default="cassini")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("attn", help="apply a circular attention layer")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--params", required=True, help="weights in .npz form")
    p.add_argument("--oracle", action="store_true",
                   help="use the slow reference implementation")
    _add_threads(p)
    p.set_defaults(func=cmd_attn)

    p = sub.add_parser("viz", help="colorize a float map as PNG")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--cmap", default="turbo")
    p.add_argument("--vmin", type=float, default=None)
    p.add_argument("--vmax", type=float, default=None)
    p.set_defaults(func=cmd_viz)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_FORMAT
    except KeyError as e:
        print(f"ERROR: unknown key {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, ZeroDivisionError, FloatingPointError) as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
