"""Grayscale image carrier, file I/O and basic statistics.

Images are plain 2-D ``float64`` numpy arrays indexed ``[row, col]``
(height x width). Quantization to 8 bits happens only in :func:`save_image`.
Masks are 2-D boolean arrays.

Supported on-disk formats are binary PGM (P5, maxval 255) and 8-bit PNG.
A separate raw format stores real-valued planes exactly::

    uint32 width | uint32 height | width*height float64   (all little-endian)
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image


class ImageError(Exception):
    """Base class for image I/O failures."""


class ImageReadError(ImageError):
    """File missing or not readable."""


class MalformedHeaderError(ImageError):
    """PGM header could not be parsed."""


class UnsupportedBitDepthError(ImageError):
    """Anything other than 8 bits per sample."""


class EmptyImageError(ImageError):
    """Image with zero width or height."""


class ImageWriteError(ImageError):
    """Output path not writable."""


@dataclass(frozen=True)
class ImageStats:
    mean: float
    variance: float


def as_image(data) -> np.ndarray:
    """Validate and convert ``data`` to a finite 2-D float64 array."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {arr.shape}")
    if arr.size == 0:
        raise EmptyImageError("zero-dimension image")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains NaN or Inf")
    return arr


def _read_pgm(raw: bytes) -> np.ndarray:
    # header: magic, width, height, maxval separated by whitespace, '#' comments allowed
    tokens = []
    pos = 0
    n = len(raw)
    while len(tokens) < 4:
        while pos < n and raw[pos:pos + 1].isspace():
            pos += 1
        if pos < n and raw[pos:pos + 1] == b"#":
            while pos < n and raw[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not raw[pos:pos + 1].isspace() and raw[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise MalformedHeaderError("malformed header")
        tokens.append(raw[start:pos])
    if pos >= n or not raw[pos:pos + 1].isspace():
        raise MalformedHeaderError("malformed header")
    pos += 1  # single whitespace byte before raster

    if tokens[0] != b"P5":
        raise MalformedHeaderError("malformed header")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise MalformedHeaderError("malformed header") from exc
    if width <= 0 or height <= 0:
        raise EmptyImageError("zero-dimension image")
    if maxval != 255:
        raise UnsupportedBitDepthError(f"unsupported maxval {maxval} (need 255)")
    body = raw[pos:pos + width * height]
    if len(body) < width * height:
        raise MalformedHeaderError("malformed header: raster shorter than declared size")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width).astype(np.float64)


def _read_png(path: Path) -> np.ndarray:
    with Image.open(path) as im:
        if im.mode in ("I", "I;16", "I;16B", "I;16L", "F", "1"):
            raise UnsupportedBitDepthError(f"unsupported PNG mode {im.mode!r}")
        if im.mode == "P":
            im = im.convert("RGB")
        arr = np.asarray(im, dtype=np.float64)
    if arr.ndim == 3:
        # unweighted channel average, alpha dropped
        channels = arr.shape[2]
        if channels in (2, 4):
            arr = arr[..., :channels - 1]
        arr = arr.mean(axis=2)
    if arr.size == 0:
        raise EmptyImageError("zero-dimension image")
    return arr


def load_image(path) -> np.ndarray:
    """Read an 8-bit PGM (P5) or PNG file into a float64 array in [0, 255]."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ImageReadError(f"cannot read {path}: {exc.strerror}") from exc
    if raw.startswith(b"\x89PNG"):
        try:
            return _read_png(path)
        except ImageError:
            raise
        except Exception as exc:  # Pillow raises assorted types
            raise ImageReadError(f"cannot decode PNG {path}: {exc}") from exc
    if raw[:1] == b"P":
        return _read_pgm(raw)
    raise MalformedHeaderError(f"malformed header: {path} is neither PGM nor PNG")


def quantize(image) -> np.ndarray:
    """Clamp to [0, 255] and round half-up to uint8."""
    arr = np.asarray(image, dtype=np.float64)
    return np.floor(np.clip(arr, 0.0, 255.0) + 0.5).astype(np.uint8)


def save_image(image, path) -> None:
    """Write an 8-bit grayscale file; PNG if the suffix is ``.png``, else PGM."""
    path = Path(path)
    data = quantize(as_image(image))
    height, width = data.shape
    try:
        if path.suffix.lower() == ".png":
            Image.fromarray(data, mode="L").save(path, format="PNG")
        else:
            with open(path, "wb") as fh:
                fh.write(b"P5\n%d %d\n255\n" % (width, height))
                fh.write(data.tobytes())
    except OSError as exc:
        raise ImageWriteError(f"cannot write {path}: {exc.strerror}") from exc


def save_mask(mask, path) -> None:
    save_image(np.where(np.asarray(mask, dtype=bool), 255.0, 0.0), path)


def load_mask(path) -> np.ndarray:
    return load_image(path) > 127


def save_raw(plane, path) -> None:
    """Write a real-valued plane in the exact little-endian raw format."""
    plane = as_image(plane)
    height, width = plane.shape
    try:
        with open(path, "wb") as fh:
            fh.write(struct.pack("<II", width, height))
            fh.write(plane.astype("<f8").tobytes())
    except OSError as exc:
        raise ImageWriteError(f"cannot write {path}: {exc.strerror}") from exc


def load_raw(path) -> np.ndarray:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ImageReadError(f"cannot read {path}: {exc.strerror}") from exc
    if len(raw) < 8:
        raise MalformedHeaderError("malformed header")
    width, height = struct.unpack("<II", raw[:8])
    if width == 0 or height == 0:
        raise EmptyImageError("zero-dimension image")
    if len(raw) != 8 + 8 * width * height:
        raise MalformedHeaderError("malformed header: size mismatch")
    return np.frombuffer(raw[8:], dtype="<f8").reshape(height, width).astype(np.float64)


def compute_stats(image) -> ImageStats:
    """Population mean and variance (divide by N)."""
    arr = as_image(image)
    mean = float(arr.mean())
    variance = float(np.mean((arr - mean) ** 2))
    return ImageStats(mean=mean, variance=variance)


def rescale_to_range(image, lo: float, hi: float) -> np.ndarray:
    """Affinely map [min, max] of ``image`` onto [lo, hi]; constant images map to lo."""
    if not hi > lo:
        raise ValueError("rescale_to_range requires hi > lo")
    arr = as_image(image)
    vmin, vmax = float(arr.min()), float(arr.max())
    if vmax == vmin:
        return np.full_like(arr, lo)
    out = lo + (arr - vmin) * ((hi - lo) / (vmax - vmin))
    return np.clip(out, lo, hi)
