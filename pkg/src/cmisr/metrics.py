"""Fidelity metrics: PSNR and single-scale SSIM.

Both operate on (H, W, C) float images against a fixed peak of 1.0. SSIM
uses the standard 11x11 Gaussian window with sigma 1.5, stability constants
C1 = (0.01*peak)^2 and C2 = (0.03*peak)^2, statistics over the valid
(unpadded) window positions, averaged over channels.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ShapeError
from .images import PEAK, validate_image

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def psnr(a: np.ndarray, b: np.ndarray, peak: float = PEAK) -> float:
    """Peak signal-to-noise ratio in dB; +inf for identical inputs."""
    validate_image(a)
    validate_image(b)
    if a.shape != b.shape:
        raise ShapeError(f"psnr shape mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _gaussian_window(side: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    ax = np.arange(side, dtype=np.float64) - (side - 1) / 2.0
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2.0 * sigma**2))
    return g / g.sum()


def _windowed_mean(x: np.ndarray, win: np.ndarray) -> np.ndarray:
    """Valid-region weighted local means via explicit sliding windows."""
    side = win.shape[0]
    view = np.lib.stride_tricks.sliding_window_view(x, (side, side))
    return np.einsum("ijkl,kl->ij", view, win, optimize=True)


def ssim(a: np.ndarray, b: np.ndarray, peak: float = PEAK) -> float:
    """Mean structural similarity over valid window positions and channels."""
    validate_image(a)
    validate_image(b)
    if a.shape != b.shape:
        raise ShapeError(f"ssim shape mismatch: {a.shape} vs {b.shape}")
    h, w, channels = a.shape
    if h < SSIM_WINDOW or w < SSIM_WINDOW:
        raise ShapeError(f"ssim needs images at least {SSIM_WINDOW}x{SSIM_WINDOW}, "
                         f"got {h}x{w}")
    win = _gaussian_window()
    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2
    per_channel = np.empty(channels)
    for c in range(channels):
        x = a[:, :, c]
        y = b[:, :, c]
        mx = _windowed_mean(x, win)
        my = _windowed_mean(y, win)
        sxx = _windowed_mean(x * x, win) - mx * mx
        syy = _windowed_mean(y * y, win) - my * my
        sxy = _windowed_mean(x * y, win) - mx * my
        num = (2.0 * mx * my + c1) * (2.0 * sxy + c2)
        den = (mx * mx + my * my + c1) * (sxx + syy + c2)
        per_channel[c] = np.mean(num / den)
    return float(np.mean(per_channel))


def difference_image(a: np.ndarray, b: np.ndarray, gain: float = 1.0) -> np.ndarray:
    """Absolute difference scaled for display; callers clamp when saving."""
    if a.shape != b.shape:
        raise ShapeError(f"difference shape mismatch: {a.shape} vs {b.shape}")
    return gain * np.abs(a - b)
