"""Camera rig configuration: a versioned JSON schema and bundled samples.

Schema (version 1)::

    {
      "version": 1,
      "projection": "cassini",    # input panorama kind
      "width": 512, "height": 1024,
      "reference": "cam1",        # view the fused output aligns to
      "layout": "square",         # free-form tag
      "cameras": [
        {"id": "cam1",
         "rotation": [[...], [...], [...]],   # optional, 3x3, default identity
         "translation": [x, y, z],
         "image": "cam1.pfm"}                 # optional panorama path
      ]
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .geometry import PanoramaGeometry, Pose, Projection
from .pfm import FormatError


@dataclass(frozen=True)
class Camera:
    cam_id: str
    pose: Pose
    image: str | None = None


@dataclass(frozen=True)
class RigConfig:
    geometry: PanoramaGeometry
    cameras: tuple
    reference: str
    layout: str = ""

    def __post_init__(self):
        ids = [c.cam_id for c in self.cameras]
        if len(ids) != len(set(ids)):
            raise ValueError("camera ids must be unique")
        if len(ids) < 2:
            raise ValueError("a rig needs at least two cameras")
        if self.reference not in ids:
            raise ValueError(f"reference camera {self.reference!r} not in rig")

    def camera(self, cam_id: str) -> Camera:
        for c in self.cameras:
            if c.cam_id == cam_id:
                return c
        raise KeyError(cam_id)

    def ordered_ids(self):
        return sorted(c.cam_id for c in self.cameras)


def _require(obj, key, kind, ctx):
    if key not in obj:
        raise FormatError(f"rig config missing {key!r} in {ctx}")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise FormatError(f"rig config field {key!r} in {ctx} has wrong type")
    return value


def load_rig(path) -> RigConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(f"rig config is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise FormatError("rig config must be a JSON object")
    version = _require(doc, "version", int, "root")
    if version != 1:
        raise FormatError(f"unsupported rig config version {version}")
    try:
        projection = Projection(_require(doc, "projection", str, "root"))
    except ValueError:
        raise FormatError(f"unknown projection {doc['projection']!r}") from None
    geom = PanoramaGeometry(projection,
                            _require(doc, "width", int, "root"),
                            _require(doc, "height", int, "root"))
    cams = []
    entries = _require(doc, "cameras", list, "root")
    for i, entry in enumerate(entries):
        ctx = f"cameras[{i}]"
        cam_id = _require(entry, "id", str, ctx)
        t = _require(entry, "translation", list, ctx)
        r = entry.get("rotation", np.eye(3).tolist())
        try:
            pose = Pose(np.asarray(r, dtype=np.float64),
                        np.asarray(t, dtype=np.float64))
        except ValueError as e:
            raise FormatError(f"bad pose in {ctx}: {e}") from None
        cams.append(Camera(cam_id, pose, entry.get("image")))
    try:
        return RigConfig(geom, tuple(cams),
                         _require(doc, "reference", str, "root"),
                         doc.get("layout", ""))
    except ValueError as e:
        raise FormatError(str(e)) from None


def save_rig(rig: RigConfig, path) -> None:
    doc = {
        "version": 1,
        "projection": rig.geometry.projection.value,
        "width": rig.geometry.width,
        "height": rig.geometry.height,
        "reference": rig.reference,
        "layout": rig.layout,
        "cameras": [
            {
                "id": c.cam_id,
                "rotation": c.pose.rotation.tolist(),
                "translation": c.pose.translation.tolist(),
                **({"image": c.image} if c.image else {}),
            }
            for c in rig.cameras
        ],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def sample_rig_path(name: str):
    """Path to a bundled sample rig (``square4`` or ``triangle3``).

    The baselines are placeholders for demonstration, not dataset values.
    """
    ref = resources.files("omnistereo").joinpath(f"data/{name}.json")
    if not ref.is_file():
        raise KeyError(f"no bundled rig named {name!r}")
    return ref
