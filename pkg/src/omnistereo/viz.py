"""PNG import/export and float-map visualization.

Float maps written to 16-bit PNG are scaled linearly; the (min, max) range
is recorded in tEXt metadata so the values survive a round trip up to
quantization. Visualization applies a matplotlib colormap LUT; invalid
pixels render black.
"""

from __future__ import annotations

import numpy as np
from PIL import Image, PngImagePlugin

from .pfm import FormatError

RANGE_MIN_KEY = "omnistereo:min"
RANGE_MAX_KEY = "omnistereo:max"


def read_png(path):
    """Read an 8- or 16-bit PNG as float in [0, 1] (plus recorded range).

    Returns ``(array, value_range)`` where ``value_range`` is the (min, max)
    tuple from metadata, or None when absent.
    """
    try:
        img = Image.open(path)
        img.load()
    except Exception as e:
        raise FormatError(f"not a readable PNG: {e}") from None
    info = img.text if hasattr(img, "text") else {}
    if img.mode == "I;16":
        arr = np.asarray(img, dtype=np.uint16).astype(np.float32) / 65535.0
    elif img.mode in ("L", "RGB"):
        arr = np.asarray(img, dtype=np.uint8).astype(np.float32) / 255.0
    else:
        img = img.convert("RGB")
        arr = np.asarray(img, dtype=np.uint8).astype(np.float32) / 255.0
    rng = None
    if RANGE_MIN_KEY in info and RANGE_MAX_KEY in info:
        rng = (float(info[RANGE_MIN_KEY]), float(info[RANGE_MAX_KEY]))
    return arr, rng


def write_png(path, data, bit_depth: int = 8, value_range=None) -> None:
    """Write float data to PNG.

    With ``value_range`` the data is normalized by that (min, max) and the
    range is stored in metadata; otherwise data must already be in [0, 1].
    """
    arr = np.asarray(data, dtype=np.float64)
    meta = PngImagePlugin.PngInfo()
    if value_range is not None:
        lo, hi = float(value_range[0]), float(value_range[1])
        if hi <= lo:
            raise ValueError("value_range must have max > min")
        arr = (arr - lo) / (hi - lo)
        meta.add_text(RANGE_MIN_KEY, repr(lo))
        meta.add_text(RANGE_MAX_KEY, repr(hi))
    arr = np.clip(arr, 0.0, 1.0)
    if bit_depth == 8:
        q = np.round(arr * 255.0).astype(np.uint8)
        mode = "L" if q.ndim == 2 else "RGB"
    elif bit_depth == 16:
        if arr.ndim != 2:
            raise ValueError("16-bit PNG output is single channel")
        q = np.round(arr * 65535.0).astype(np.uint16)
        mode = "I;16"
    else:
        raise ValueError("bit_depth must be 8 or 16")
    Image.fromarray(q, mode=mode).save(path, pnginfo=meta)


def colorize(values, mask=None, cmap: str = "turbo", vmin=None, vmax=None):
    """Map a float raster to RGB in [0, 1]; invalid pixels become black."""
    from matplotlib import colormaps

    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 2:
        raise ValueError("colorize expects a single-channel map")
    valid = np.isfinite(v)
    if mask is not None:
        valid &= np.asarray(mask, dtype=bool)
    if vmin is None:
        vmin = float(v[valid].min()) if valid.any() else 0.0
    if vmax is None:
        vmax = float(v[valid].max()) if valid.any() else 1.0
    if vmax <= vmin:
        vmax = vmin + 1.0
    norm = np.clip((v - vmin) / (vmax - vmin), 0.0, 1.0)
    try:
        lut = colormaps[cmap]
    except KeyError:
        raise ValueError(f"unknown colormap {cmap!r}") from None
    rgb = lut(norm)[..., :3]
    rgb[~valid] = 0.0
    return rgb
