"""Separable resampling on the pixel-center grid.

Both directions share one convention: output index i samples the input at
coordinate u = (i + 0.5) * (n_in / n_out) - 0.5, so image centers stay
aligned for any integer scale. Borders clamp to the edge sample, which keeps
every weight row summing to exactly 1 and therefore preserves constants.

Methods:
  nearest   round-half-up to the nearer sample (ties toward the later one)
  bilinear  two-tap triangle
  bicubic   four-tap Keys cubic with a = -0.5
  area      exact s x s block mean (downsampling only)
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError, ValidationError
from .images import validate_image

SCALES = (1, 2, 3, 4)
DOWN_METHODS = ("nearest", "bilinear", "bicubic", "area")
UP_METHODS = ("nearest", "bilinear", "bicubic")

CUBIC_A = -0.5


def validate_scale(s: int) -> int:
    if not isinstance(s, (int, np.integer)) or s not in SCALES:
        raise ValidationError(f"scale must be an integer in {SCALES}, got {s!r}")
    return int(s)


def cubic_weight(t: float, a: float = CUBIC_A) -> float:
    """Keys cubic kernel value at offset t."""
    t = abs(t)
    if t <= 1.0:
        return (a + 2.0) * t**3 - (a + 3.0) * t**2 + 1.0
    if t < 2.0:
        return a * t**3 - 5.0 * a * t**2 + 8.0 * a * t - 4.0 * a
    return 0.0


def axis_weights(n_in: int, n_out: int, method: str) -> np.ndarray:
    """Dense (n_out, n_in) one-axis resampling matrix.

    Out-of-range taps accumulate onto the clamped edge index, so each row
    sums to 1 regardless of phase.
    """
    if n_in < 1 or n_out < 1:
        raise ShapeError(f"axis sizes must be >= 1, got {n_in} -> {n_out}")
    W = np.zeros((n_out, n_in))
    ratio = n_in / n_out
    if method == "area":
        if n_in % n_out != 0:
            raise ShapeError(f"area resampling needs n_out | n_in, got {n_in} -> {n_out}")
        s = n_in // n_out
        for i in range(n_out):
            W[i, i * s:(i + 1) * s] = 1.0 / s
        return W
    for i in range(n_out):
        u = (i + 0.5) * ratio - 0.5
        if method == "nearest":
            j = int(np.floor(u + 0.5))
            W[i, min(max(j, 0), n_in - 1)] = 1.0
        elif method == "bilinear":
            j = int(np.floor(u))
            f = u - j
            for tap, w in ((j, 1.0 - f), (j + 1, f)):
                if w != 0.0:
                    W[i, min(max(tap, 0), n_in - 1)] += w
        elif method == "bicubic":
            j = int(np.floor(u))
            for tap in range(j - 1, j + 3):
                w = cubic_weight(u - tap)
                if w != 0.0:
                    W[i, min(max(tap, 0), n_in - 1)] += w
        else:
            raise ValidationError(f"unknown resampling method {method!r}")
    return W


def apply_separable(img: np.ndarray, w_rows: np.ndarray, w_cols: np.ndarray) -> np.ndarray:
    """Apply per-axis weight matrices to every channel of (H, W, C) data."""
    out = np.einsum("ij,jkc->ikc", w_rows, img, optimize=True)
    return np.einsum("kl,ilc->ikc", w_cols, out, optimize=True)


def downsample(img: np.ndarray, s: int, method: str = "area") -> np.ndarray:
    """Reduce (H, W, C) to (H/s, W/s, C). H and W must be divisible by s."""
    validate_image(img)
    s = validate_scale(s)
    if method not in DOWN_METHODS:
        raise ValidationError(f"downsample method must be one of {DOWN_METHODS}, got {method!r}")
    h, w, _ = img.shape
    if h % s or w % s:
        raise ShapeError(f"image {h}x{w} not divisible by scale {s}")
    if s == 1:
        return np.array(img)
    if method == "area":
        # exact block mean, no weight matrix round-off
        c = img.shape[2]
        return img.reshape(h // s, s, w // s, s, c).mean(axis=(1, 3))
    return apply_separable(img, axis_weights(h, h // s, method), axis_weights(w, w // s, method))


def upsample(img: np.ndarray, s: int, method: str) -> np.ndarray:
    """Enlarge (H, W, C) to (H*s, W*s, C) with the same grid convention."""
    validate_image(img)
    s = validate_scale(s)
    if method not in UP_METHODS:
        raise ValidationError(f"upsample method must be one of {UP_METHODS}, got {method!r}")
    h, w, _ = img.shape
    if s == 1:
        return np.array(img)
    return apply_separable(img, axis_weights(h, h * s, method), axis_weights(w, w * s, method))
