"""Low-quality observation models: plain downsampling or blur + noise.

degrade() implements both factorization orders of the classic acquisition
model, y = (x conv k) down s + n and y = (x down s) conv k + n, with a
clamp-to-edge convolution and seeded noise so repeated calls are bit
identical. Noise is drawn at the low-resolution size in either order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ShapeError, ValidationError
from .images import validate_image
from .resampling import downsample, validate_scale

ORDERS = ("blur_then_downsample", "downsample_then_blur")
NOISE_KINDS = ("none", "gaussian", "uniform")

KERNEL_SUM_TOL = 1e-12


def gaussian_kernel(side: int, sigma: float) -> np.ndarray:
    """Normalized 2-D Gaussian tap grid with odd side length."""
    if side < 1 or side % 2 == 0:
        raise ValidationError(f"kernel side must be odd and >= 1, got {side}")
    if sigma <= 0:
        raise ValidationError(f"sigma must be > 0, got {sigma}")
    ax = np.arange(side, dtype=np.float64) - (side - 1) / 2.0
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2.0 * sigma**2))
    return g / g.sum()


@dataclass(frozen=True)
class DegradationSpec:
    """Frozen description of one degradation: kernel, noise, order, seed."""

    kernel: np.ndarray
    noise_kind: str = "none"
    noise_sigma: float = 0.0
    order: str = "blur_then_downsample"
    seed: int = 0

    def __post_init__(self):
        k = np.asarray(self.kernel, dtype=np.float64)
        if k.ndim != 2 or k.shape[0] % 2 == 0 or k.shape[1] % 2 == 0:
            raise ValidationError(f"kernel must be 2-D with odd sides, got shape {k.shape}")
        if not np.isfinite(k).all():
            raise ValidationError("kernel contains non-finite values")
        if abs(k.sum() - 1.0) > KERNEL_SUM_TOL:
            raise ValidationError(f"kernel must sum to 1 within {KERNEL_SUM_TOL}, "
                                  f"got {k.sum()!r}")
        object.__setattr__(self, "kernel", k)
        if self.noise_kind not in NOISE_KINDS:
            raise ValidationError(f"noise_kind must be one of {NOISE_KINDS}, "
                                  f"got {self.noise_kind!r}")
        if self.noise_sigma < 0:
            raise ValidationError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.order not in ORDERS:
            raise ValidationError(f"order must be one of {ORDERS}, got {self.order!r}")


def convolve2d_clamp(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """True 2-D convolution per channel with clamp-to-edge borders."""
    validate_image(img)
    # ndimage.convolve correlates with the flipped kernel internally; flipping
    # here once more yields convolution proper. Symmetric kernels are unaffected.
    flipped = kernel[::-1, ::-1]
    out = np.empty_like(img)
    for c in range(img.shape[2]):
        out[:, :, c] = ndimage.correlate(img[:, :, c], flipped, mode="nearest")
    return out


def _noise(spec: DegradationSpec, shape) -> np.ndarray | None:
    if spec.noise_kind == "none" or spec.noise_sigma == 0.0:
        return None
    rng = np.random.default_rng(spec.seed)
    if spec.noise_kind == "gaussian":
        return rng.normal(0.0, spec.noise_sigma, size=shape)
    # uniform with the same variance: half-width sigma * sqrt(3)
    half = spec.noise_sigma * np.sqrt(3.0)
    return rng.uniform(-half, half, size=shape)


def degrade(img: np.ndarray, spec: DegradationSpec, s: int) -> np.ndarray:
    """Apply the configured degradation at scale s; output is (H/s, W/s, C)."""
    validate_image(img)
    s = validate_scale(s)
    h, w, _ = img.shape
    if h % s or w % s:
        raise ShapeError(f"image {h}x{w} not divisible by scale {s}")
    if spec.order == "blur_then_downsample":
        out = downsample(convolve2d_clamp(img, spec.kernel), s, "area")
    else:
        out = convolve2d_clamp(downsample(img, s, "area"), spec.kernel)
    n = _noise(spec, out.shape)
    if n is not None:
        out = out + n
    return out
