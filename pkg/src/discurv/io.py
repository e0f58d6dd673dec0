"""Image, mask and raw-grid file IO.

PNG goes through Pillow.  Binary PGM (P5) and PPM (P6) are parsed here so
that malformed files report the byte offset where parsing failed.  Images are
always float64 in memory; quantisation to 8 bits happens only in
:func:`save_image`.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

__all__ = ["ImageFormatError", "load_image", "save_image", "load_mask", "save_raw", "load_raw", "to_uint8"]

_FORMATS = {".png": "png", ".pgm": "pgm", ".ppm": "ppm", ".pnm": "pnm"}


class ImageFormatError(ValueError):
    pass


def _format_of(path, fmt=None):
    if fmt:
        return fmt.lower()
    ext = Path(path).suffix.lower()
    if ext not in _FORMATS:
        raise ImageFormatError(f"unsupported image format {ext!r} for {path}")
    return _FORMATS[ext]


def _read_pnm(data: bytes, path) -> np.ndarray:
    pos = 0

    def token():
        nonlocal pos
        while True:
            while pos < len(data) and data[pos:pos + 1].isspace():
                pos += 1
            if pos < len(data) and data[pos:pos + 1] == b"#":
                while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                    pos += 1
                continue
            break
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ImageFormatError(f"{path}: unexpected end of header at byte {start}")
        return data[start:pos], start

    magic, _ = token()
    if magic not in (b"P5", b"P6"):
        raise ImageFormatError(f"{path}: not a binary PGM/PPM file (magic {magic!r} at byte 0)")
    fields = []
    for _ in range(3):
        tok, at = token()
        try:
            fields.append(int(tok))
        except ValueError:
            raise ImageFormatError(f"{path}: bad header field {tok!r} at byte {at}") from None
    width, height, maxval = fields
    if maxval != 255:
        raise ImageFormatError(f"{path}: only 8-bit files are supported (maxval {maxval})")
    pos += 1  # single whitespace byte before the raster
    channels = 1 if magic == b"P5" else 3
    need = width * height * channels
    have = len(data) - pos
    if have < need:
        raise ImageFormatError(
            f"{path}: truncated raster, expected {need} bytes from byte {pos} but file ends at byte {len(data)}"
        )
    arr = np.frombuffer(data, dtype=np.uint8, count=need, offset=pos)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return arr.reshape(shape).astype(np.float64)


def load_image(path, fmt=None) -> np.ndarray:
    """Read an 8-bit gray or RGB image as a float64 array on 0-255."""
    kind = _format_of(path, fmt)
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    if kind in ("pgm", "ppm", "pnm"):
        with open(path, "rb") as fh:
            return _read_pnm(fh.read(), path)
    try:
        with PILImage.open(path) as im:
            im.load()
            if im.mode in ("I", "I;16", "I;16B", "I;16L", "F"):
                raise ImageFormatError(f"{path}: only 8-bit images are supported (mode {im.mode})")
            gray = im.mode in ("1", "L", "LA")
            arr = np.asarray(im.convert("L" if gray else "RGB"), dtype=np.float64)
    except (OSError, SyntaxError) as exc:
        raise ImageFormatError(f"{path}: cannot parse PNG ({exc}; file is {os.path.getsize(path)} bytes)") from exc
    return arr


def to_uint8(img) -> np.ndarray:
    """Clamp to [0, 255] and round half to even."""
    arr = np.asarray(img, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("cannot quantise an image with non-finite values")
    return np.rint(np.clip(arr, 0.0, 255.0)).astype(np.uint8)


def save_image(img, path, fmt=None) -> None:
    kind = _format_of(path, fmt)
    q = to_uint8(img)
    if q.ndim not in (2, 3) or (q.ndim == 3 and q.shape[2] != 3):
        raise ValueError(f"cannot save array of shape {q.shape} as an image")
    if kind in ("pgm", "ppm", "pnm"):
        magic = b"P5" if q.ndim == 2 else b"P6"
        header = b"%s\n%d %d\n255\n" % (magic, q.shape[1], q.shape[0])
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(q).tobytes())
        return
    PILImage.fromarray(q).save(path, format="PNG")


def load_mask(path, threshold: float = 128.0) -> np.ndarray:
    """Load an inpainting mask: pixels >= ``threshold`` are known."""
    img = load_image(path)
    if img.ndim != 2:
        raise ImageFormatError(f"{path}: mask must be a grayscale image")
    known = img >= threshold
    if not known.any():
        raise ValueError(f"{path}: mask has no known pixels")
    return known


def save_raw(grid, path, delimiter: str = ",") -> None:
    """Write a numeric grid as ``.npy`` or delimited text, chosen by suffix."""
    arr = np.asarray(grid, dtype=np.float64)
    if Path(path).suffix.lower() == ".npy":
        np.save(path, arr)
    else:
        np.savetxt(path, arr, delimiter=delimiter, fmt="%.17g")


def load_raw(path, delimiter: str = ",") -> np.ndarray:
    if Path(path).suffix.lower() == ".npy":
        return np.load(path)
    return np.loadtxt(path, delimiter=delimiter, ndmin=2)
