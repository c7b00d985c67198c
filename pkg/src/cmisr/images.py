"""Image tensors and raster file I/O.

An image is a float64 numpy array of shape (height, width, channels) with
channels 1 (gray) or 3 (RGB), values finite, nominally in [0, 1] but allowed
outside that range while an iteration is in flight. Quantization to 8 bits
happens only at file boundaries, with peak value 1.0 mapping to 255.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image as _PILImage
from PIL import UnidentifiedImageError

from .errors import FormatError, ImageIOError, ShapeError, ValidationError

PEAK = 1.0

_SUPPORTED_MODES = {"L": 1, "RGB": 3}


def image(data, copy: bool = True) -> np.ndarray:
    """Coerce ``data`` to a validated (H, W, C) float64 image.

    2-D input is promoted to a single channel. The returned array is a
    read-only view so shared image values cannot be mutated in place.
    """
    arr = np.array(data, dtype=np.float64, copy=copy)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    validate_image(arr)
    arr.flags.writeable = False
    return arr


def validate_image(arr: np.ndarray) -> None:
    if not isinstance(arr, np.ndarray) or arr.ndim != 3:
        raise ShapeError(f"image must be a (H, W, C) array, got {getattr(arr, 'shape', None)}")
    h, w, c = arr.shape
    if h < 1 or w < 1:
        raise ShapeError(f"image sides must be >= 1, got {h}x{w}")
    if c not in (1, 3):
        raise ShapeError(f"channels must be 1 or 3, got {c}")
    if arr.dtype != np.float64:
        raise ValidationError(f"image dtype must be float64, got {arr.dtype}")
    if not np.isfinite(arr).all():
        raise ValidationError("image contains non-finite values")


def axpy(alpha: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Return alpha * x + y for images of identical shape."""
    if x.shape != y.shape:
        raise ShapeError(f"axpy shape mismatch: {x.shape} vs {y.shape}")
    return alpha * x + y


def norm2(x: np.ndarray) -> float:
    """Euclidean norm of the flattened image."""
    return float(np.linalg.norm(np.asarray(x).ravel()))


def rms(x: np.ndarray) -> float:
    """Root mean square over all samples; the loop's stopping statistic."""
    v = np.asarray(x).ravel()
    return float(np.sqrt(np.mean(v * v)))


def clamp01(x: np.ndarray) -> np.ndarray:
    return np.clip(x, 0.0, PEAK)


def quantize(x: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1] and snap to the 8-bit grid k/255 (ties to even)."""
    return np.rint(clamp01(x) * 255.0) / 255.0


def to_uint8(x: np.ndarray) -> np.ndarray:
    return np.rint(clamp01(x) * 255.0).astype(np.uint8)


def load_image(path, replicate: bool = False) -> np.ndarray:
    """Load an 8-bit PNG / binary PGM / binary PPM as a float image in [0, 1].

    replicate=True copies a single gray channel to 3 channels (useful when a
    downstream operator expects RGB). Unsupported modes (palette, alpha,
    16-bit) raise FormatError; unreadable files raise ImageIOError.
    """
    try:
        with _PILImage.open(path) as im:
            mode = im.mode
            if mode not in _SUPPORTED_MODES:
                raise FormatError(f"{path}: unsupported image mode {mode!r} "
                                  "(expected 8-bit L or RGB)")
            arr = np.asarray(im, dtype=np.float64)
    except FormatError:
        raise
    except UnidentifiedImageError as exc:
        raise FormatError(f"{path}: not a recognized image format") from exc
    except (OSError, ValueError) as exc:
        raise ImageIOError(f"{path}: cannot read image: {exc}") from exc
    if arr.ndim == 2:
        arr = arr[:, :, None]
    arr /= 255.0
    if replicate and arr.shape[2] == 1:
        arr = np.repeat(arr, 3, axis=2)
    return image(arr, copy=False)


def save_image(img: np.ndarray, path) -> None:
    """Write an image as 8-bit PNG (.png), PGM (.pgm) or PPM (.ppm).

    Values are clamped to [0, 1] and rounded to round(v * 255). PGM accepts
    one channel, PPM three; PNG accepts either.
    """
    validate_image(img)
    ext = os.path.splitext(str(path))[1].lower()
    c = img.shape[2]
    if ext == ".pgm" and c != 1:
        raise FormatError(f"{path}: PGM stores a single channel, image has {c}")
    if ext == ".ppm" and c != 3:
        raise FormatError(f"{path}: PPM stores three channels, image has {c}")
    if ext not in (".png", ".pgm", ".ppm"):
        raise FormatError(f"{path}: unsupported output extension {ext!r}")
    data = to_uint8(img)
    pil = _PILImage.fromarray(data[:, :, 0] if c == 1 else data, mode="L" if c == 1 else "RGB")
    try:
        pil.save(path)
    except (OSError, ValueError) as exc:
        raise ImageIOError(f"{path}: cannot write image: {exc}") from exc


def center_crop_multiple(img: np.ndarray, s: int) -> np.ndarray:
    """Center-crop so both sides are divisible by s. Never pads."""
    h, w, _ = img.shape
    nh, nw = (h // s) * s, (w // s) * s
    if nh == 0 or nw == 0:
        raise ShapeError(f"image {h}x{w} too small to crop to a multiple of {s}")
    if (nh, nw) == (h, w):
        return img
    top = (h - nh) // 2
    left = (w - nw) // 2
    return img[top:top + nh, left:left + nw, :]
