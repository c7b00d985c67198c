"""Classical upscalers served by the reference plugin.

Both modes sample on the pixel-center grid: output index i reads the input
at u = (i + 0.5) * (n_in / n_out) - 0.5, with out-of-range taps clamped to
the edge sample so every output is a convex-ish combination whose weights
sum to exactly 1 (constants pass through unchanged).

  nearest   round-half-up gather, which for integer scales is plain
            pixel replication
  bicubic   four-tap Keys cubic with a = -0.5

Extension point: UPSCALERS maps a mode name to a callable
(x, scale) -> y taking a float64 array of shape (h, w, c) and returning
(h*scale, w*scale, c). A learned model slots in by registering its forward
pass here (load weights once at process start, convert to and from the
model's tensor layout inside the callable); the server and the wire
protocol need no changes. This reference ships only the two classical
entries above; it bundles no weights and manages no accelerator.
"""

from __future__ import annotations

import numpy as np

CUBIC_A = -0.5
TAP_OFFSETS = (-1, 0, 1, 2)


def cubic_kernel(t: np.ndarray, a: float = CUBIC_A) -> np.ndarray:
    """Keys cubic kernel evaluated elementwise (Horner form)."""
    t = np.abs(np.asarray(t, dtype=np.float64))
    near = ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0
    far = a * (((t - 5.0) * t + 8.0) * t - 4.0)
    return np.where(t <= 1.0, near, np.where(t < 2.0, far, 0.0))


def nearest_axis_indices(n_in: int, n_out: int) -> np.ndarray:
    """Input index gathered by each output position along one axis."""
    # floor(u + 0.5) with u = (i + 0.5) * n_in / n_out - 0.5
    centers = (np.arange(n_out) + 0.5) * (n_in / n_out)
    return np.clip(np.floor(centers).astype(np.intp), 0, n_in - 1)


def bicubic_axis_matrix(n_in: int, n_out: int) -> np.ndarray:
    """Dense (n_out, n_in) one-axis bicubic matrix, edge taps accumulated."""
    u = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    base = np.floor(u).astype(np.intp)
    rows = np.arange(n_out)
    W = np.zeros((n_out, n_in))
    for off in TAP_OFFSETS:
        tap = base + off
        np.add.at(W, (rows, np.clip(tap, 0, n_in - 1)), cubic_kernel(u - tap))
    return W


def nearest_upscale(x: np.ndarray, scale: int) -> np.ndarray:
    h, w, _ = x.shape
    return x[nearest_axis_indices(h, h * scale)][:, nearest_axis_indices(w, w * scale)]


def bicubic_upscale(x: np.ndarray, scale: int) -> np.ndarray:
    h, w, _ = x.shape
    tmp = np.tensordot(bicubic_axis_matrix(h, h * scale), x, axes=(1, 0))
    return np.tensordot(bicubic_axis_matrix(w, w * scale), tmp, axes=(1, 1)).transpose(1, 0, 2)


UPSCALERS = {
    "nearest": nearest_upscale,
    "bicubic": bicubic_upscale,
}


def upscale(x: np.ndarray, scale: int, mode: str) -> np.ndarray:
    """Enlarge (h, w, c) data by an integer factor with the named mode."""
    if mode not in UPSCALERS:
        raise ValueError(f"mode must be one of {tuple(UPSCALERS)}, got {mode!r}")
    if scale < 1:
        raise ValueError(f"scale must be >= 1, got {scale}")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3 or min(x.shape) < 1:
        raise ValueError(f"expected nonempty (h, w, c) data, got shape {x.shape}")
    if scale == 1:
        return x.copy()
    return UPSCALERS[mode](x, scale)
