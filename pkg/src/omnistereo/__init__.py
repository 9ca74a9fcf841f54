"""Multi-view panoramic depth estimation on cylindrical stereo pairs."""

from .attention import (
    AttentionParams,
    MultiplyCounter,
    circular_attention,
    circular_attention_backward,
    circular_attention_reference,
    global_self_attention,
)
from .disparity import (
    align_depth_to_reference,
    angular_to_cylindrical_disparity,
    depth_from_disparity_cylindrical,
    depth_from_disparity_spherical,
    disparity_from_depth_cylindrical,
    euclidean_from_cylindrical,
    forward_warp_depth,
)
from .fusion import (
    PairProduct,
    PipelineResult,
    enumerate_pairs,
    fuse_depths,
    match_geometry,
    output_geometry,
    run_pipeline,
)
from .geometry import (
    PanoramaGeometry,
    Pose,
    Projection,
    cartesian_to_cylindrical,
    cartesian_to_spherical,
    cylindrical_to_cartesian,
    horizontal_fov,
    local_scale_factors,
    project_to_pixel,
    project_to_pixel_masked,
    rotation_about_x,
    rotation_about_y,
    rotation_about_z,
    rotation_from_rpy,
    spherical_to_cartesian,
    unproject_pixel,
    wrap_angle,
)
from .matching import (
    MatchParams,
    MatchResult,
    census_transform,
    cost_probabilities,
    cost_volume,
    default_max_disparity,
    match_pair,
    regress_disparity,
)
from .metrics import (
    DepthMetrics,
    DisparityMetrics,
    central_band_mask,
    depth_metrics,
    disparity_metrics,
)
from .pfm import mask_to_raster, raster_to_mask, read_pfm, write_pfm
from .rasters import Panorama
from .resample import (
    RectifiedPair,
    convert_gt_disparity,
    rectification_rotation,
    rectify_pair,
    reproject_panorama,
)
from .rig import Camera, RigConfig, load_rig, save_rig

__version__ = "0.1.0"

__all__ = [
    "AttentionParams",
    "Camera",
    "DepthMetrics",
    "DisparityMetrics",
    "MatchParams",
    "MatchResult",
    "MultiplyCounter",
    "PairProduct",
    "Panorama",
    "PanoramaGeometry",
    "PipelineResult",
    "Pose",
    "Projection",
    "RectifiedPair",
    "RigConfig",
    "align_depth_to_reference",
    "angular_to_cylindrical_disparity",
    "cartesian_to_cylindrical",
    "cartesian_to_spherical",
    "census_transform",
    "central_band_mask",
    "circular_attention",
    "circular_attention_backward",
    "circular_attention_reference",
    "convert_gt_disparity",
    "cost_probabilities",
    "cost_volume",
    "cylindrical_to_cartesian",
    "default_max_disparity",
    "depth_from_disparity_cylindrical",
    "depth_from_disparity_spherical",
    "depth_metrics",
    "disparity_from_depth_cylindrical",
    "disparity_metrics",
    "enumerate_pairs",
    "euclidean_from_cylindrical",
    "forward_warp_depth",
    "fuse_depths",
    "global_self_attention",
    "horizontal_fov",
    "load_rig",
    "local_scale_factors",
    "mask_to_raster",
    "match_geometry",
    "match_pair",
    "output_geometry",
    "project_to_pixel",
    "project_to_pixel_masked",
    "raster_to_mask",
    "read_pfm",
    "rectification_rotation",
    "rectify_pair",
    "regress_disparity",
    "reproject_panorama",
    "rotation_about_x",
    "rotation_about_y",
    "rotation_about_z",
    "rotation_from_rpy",
    "run_pipeline",
    "save_rig",
    "spherical_to_cartesian",
    "unproject_pixel",
    "wrap_angle",
    "write_pfm",
]
