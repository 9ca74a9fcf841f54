"""PFM float-raster reader/writer.

Layout: a magic line (``Pf`` grayscale, ``PF`` RGB), a ``width height``
line, a scale line whose sign encodes endianness (negative = little endian),
then raw 32-bit floats stored bottom-to-top. Reads and writes round-trip
bit for bit, including NaN payloads; invalid-pixel conventions on top of
NaN/inf live in :func:`mask_to_raster` / :func:`raster_to_mask`.
"""

from __future__ import annotations

import numpy as np


class FormatError(Exception):
    """Raised when a file does not parse as its declared format."""


_WHITESPACE = b" \t\r\n"


def write_pfm(path, data, little_endian: bool = True) -> None:
    data = np.asarray(data, dtype=np.float32)
    if data.ndim == 2:
        magic = b"Pf"
    elif data.ndim == 3 and data.shape[2] == 3:
        magic = b"PF"
    else:
        raise ValueError(f"PFM stores (H, W) or (H, W, 3) rasters, got {data.shape}")
    h, w = data.shape[:2]
    scale = -1.0 if little_endian else 1.0
    rows = np.flipud(data)
    payload = rows.astype("<f4" if little_endian else ">f4", copy=False).tobytes()
    with open(path, "wb") as f:
        f.write(magic + b"\n")
        f.write(f"{w} {h}\n".encode("ascii"))
        f.write(f"{scale:.6g}\n".encode("ascii"))
        f.write(payload)


def read_pfm(path):
    """Read a PFM file into a native-endian float32 array."""
    with open(path, "rb") as f:
        buf = f.read()
    pos = 0

    def next_token():
        nonlocal pos
        while pos < len(buf) and buf[pos] in _WHITESPACE:
            pos += 1
        start = pos
        while pos < len(buf) and buf[pos] not in _WHITESPACE:
            pos += 1
        if start == pos:
            raise FormatError(f"unexpected end of header at byte {start}")
        return buf[start:pos], start

    magic, off = next_token()
    if magic not in (b"Pf", b"PF"):
        raise FormatError(f"bad magic {magic!r} at byte {off}")
    channels = 1 if magic == b"Pf" else 3

    def next_number(parse, name):
        tok, off = next_token()
        try:
            return parse(tok)
        except ValueError:
            raise FormatError(f"bad {name} {tok!r} at byte {off}") from None

    w = next_number(int, "width")
    h = next_number(int, "height")
    if w < 1 or h < 1:
        raise FormatError(f"non-positive dimensions {w}x{h}")
    scale = next_number(float, "scale")
    if scale == 0.0:
        raise FormatError("scale must be non-zero")
    # Exactly one whitespace byte separates the header from the payload.
    if pos >= len(buf) or buf[pos] not in _WHITESPACE:
        raise FormatError(f"missing header terminator at byte {pos}")
    pos += 1
    count = w * h * channels
    if len(buf) - pos < count * 4:
        raise FormatError(
            f"truncated payload: need {count * 4} bytes at byte {pos}, have {len(buf) - pos}")
    dtype = "<f4" if scale < 0 else ">f4"
    arr = np.frombuffer(buf, dtype=dtype, count=count, offset=pos)
    arr = arr.reshape((h, w) if channels == 1 else (h, w, 3))
    out = np.flipud(arr)
    return np.ascontiguousarray(out).astype(np.float32, copy=False)


def mask_to_raster(values, mask):
    """Bake a validity mask into a raster: invalid pixels become NaN."""
    out = np.array(values, dtype=np.float32, copy=True)
    if mask is not None:
        invalid = ~np.asarray(mask, dtype=bool)
        if out.ndim == 3:
            out[invalid, :] = np.nan
        else:
            out[invalid] = np.nan
    return out


def raster_to_mask(raster):
    """Split a raster into finite values and a validity mask."""
    r = np.asarray(raster)
    finite = np.isfinite(r)
    mask = finite if r.ndim == 2 else finite.all(axis=2)
    values = np.where(finite, r, 0.0).astype(r.dtype, copy=False)
    return values, mask
