"""Image and mask carriers, PNG/JPEG I/O and overlay rendering.

Images are plain numpy arrays:

* RGB image: float64, shape ``(H, W, 3)``, channels in ``[0, 1]``
* converted image: float64, shape ``(H, W, 3)``, unbounded
* gray image: float64, shape ``(H, W)``, values in ``[0, 1]``
* binary mask: bool, shape ``(H, W)``, ``True`` marks fire
"""
from __future__ import annotations

import io
import os

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DimensionMismatch, EncodeFailure, MalformedImage, UnsupportedFormat

FORMATS = {"png": "PNG", "jpeg": "JPEG", "jpg": "JPEG"}

# 8-bit gray masks: anything above this level counts as fire
MASK_LEVEL = 127


def as_rgb(image) -> np.ndarray:
    """Validate and return ``image`` as a float64 ``(H, W, 3)`` array in [0, 1]."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {arr.shape}")
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0 or not np.isfinite(arr).all()):
        raise ValueError("RGB channels must lie in [0, 1]")
    return arr


def as_mask(mask) -> np.ndarray:
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ValueError(f"expected an (H, W) mask, got shape {arr.shape}")
    return arr.astype(bool, copy=False)


def _open(data: bytes, format: str | None) -> Image.Image:
    if format is not None and format.lower() not in FORMATS:
        raise UnsupportedFormat(f"unsupported image format {format!r}")
    try:
        im = Image.open(io.BytesIO(data))
        im.load()
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise MalformedImage(f"cannot decode image: {exc}") from exc
    if im.format not in ("PNG", "JPEG"):
        raise UnsupportedFormat(f"unsupported image format {im.format!r}")
    if format is not None and FORMATS[format.lower()] != im.format:
        raise UnsupportedFormat(f"expected {format} data, found {im.format}")
    return im


def decode_image(data: bytes, format: str | None = None) -> np.ndarray:
    """Decode PNG or JPEG bytes into a normalized RGB array.

    8-bit channels are divided by 255. Alpha is dropped and single-channel
    sources are replicated to three channels. ``format`` ("png" or "jpeg")
    is checked against the actual stream when given.
    """
    im = _open(data, format)
    if im.mode in ("I", "I;16", "I;16B", "I;16L", "F"):
        raise UnsupportedFormat(f"only 8-bit images are supported, got mode {im.mode}")
    if im.mode != "RGB":
        im = im.convert("RGB")
    return np.asarray(im, dtype=np.float64) / 255.0


def read_image(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    return decode_image(data)


def decode_mask(data: bytes, format: str | None = None) -> np.ndarray:
    """Decode a mask image; a pixel is fire where its 8-bit gray level exceeds 127."""
    im = _open(data, format)
    if im.mode not in ("L", "1"):
        im = im.convert("L")
    return np.asarray(im.convert("L"), dtype=np.uint8) > MASK_LEVEL


def read_mask(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    return decode_mask(data)


def _png_bytes(arr: np.ndarray, mode: str) -> bytes:
    buf = io.BytesIO()
    try:
        Image.fromarray(arr, mode=mode).save(buf, format="PNG")
    except (OSError, ValueError) as exc:
        raise EncodeFailure(str(exc)) from exc
    return buf.getvalue()


def encode_mask(mask) -> bytes:
    """Encode a mask as a single-channel 8-bit PNG (fire = 255)."""
    m = as_mask(mask)
    return _png_bytes(np.where(m, 255, 0).astype(np.uint8), "L")


def encode_rgb(image) -> bytes:
    """Encode a normalized RGB image as an 8-bit RGB PNG."""
    arr = np.rint(as_rgb(image) * 255.0).astype(np.uint8)
    return _png_bytes(np.ascontiguousarray(arr), "RGB")


def _write(path, data: bytes) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise EncodeFailure(f"cannot write {path}: {exc}") from exc


def write_mask(path: str | os.PathLike, mask) -> None:
    _write(path, encode_mask(mask))


def write_rgb(path: str | os.PathLike, image) -> None:
    _write(path, encode_rgb(image))


def overlay(image, mask, highlight=(1.0, 0.0, 0.0)) -> np.ndarray:
    """Paint ``highlight`` over every masked pixel of ``image``."""
    img = as_rgb(image)
    m = as_mask(mask)
    if img.shape[:2] != m.shape:
        raise DimensionMismatch(f"image {img.shape[:2]} vs mask {m.shape}")
    colour = np.asarray(highlight, dtype=np.float64)
    if colour.shape != (3,) or colour.min() < 0.0 or colour.max() > 1.0:
        raise ValueError("highlight must be an RGB triple in [0, 1]")
    out = img.copy()
    out[m] = colour
    return out


def clamp_to_gray(converted) -> np.ndarray:
    """Clamp each converted channel to [0, 1] and average the three channels."""
    c = np.asarray(converted, dtype=np.float64)
    if c.ndim < 1 or c.shape[-1] != 3:
        raise ValueError(f"expected trailing channel axis of 3, got shape {c.shape}")
    return np.clip(c, 0.0, 1.0).sum(axis=-1) / 3.0
