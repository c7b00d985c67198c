"""The round-trip system: degrade/downsample then upscale.

NfSystem bundles a configured low-quality operator (any callable that maps an
image to its (H/s, W/s, C) observation) with an upscaler at the same scale,
giving the square map the feedback loop iterates on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ShapeError
from .images import validate_image
from .resampling import validate_scale
from .sr import SrOperator, sr_apply


@dataclass
class NfSystem:
    """ur: observation operator, sr: upscaler, scale: shared integer factor."""

    ur: Callable[[np.ndarray], np.ndarray]
    sr: SrOperator
    scale: int

    def __post_init__(self):
        self.scale = validate_scale(self.scale)
        if self.sr.scale != self.scale:
            raise ShapeError(f"sr operator scale {self.sr.scale} != system scale {self.scale}")


def nf_apply(sys: NfSystem, x: np.ndarray) -> np.ndarray:
    """Round trip x through ur then sr; output shape equals input shape."""
    validate_image(x)
    h, w, c = x.shape
    s = sys.scale
    if h % s or w % s:
        raise ShapeError(f"image {h}x{w} not divisible by scale {s}")
    lq = sys.ur(x)
    if lq.shape != (h // s, w // s, c):
        raise ShapeError(f"ur produced {lq.shape}, expected {(h // s, w // s, c)}")
    out = sr_apply(sys.sr, lq)
    if out.shape != x.shape:
        raise ShapeError(f"sr produced {out.shape}, expected {x.shape}")
    return out


def run_open_loop(sys: NfSystem, x_lq: np.ndarray) -> np.ndarray:
    """One-shot upscale of a low-quality input; the feed-forward baseline."""
    validate_image(x_lq)
    return sr_apply(sys.sr, x_lq)
