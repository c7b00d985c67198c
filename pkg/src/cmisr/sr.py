"""Upscaling operators: built-in resamplers plus the external plugin route.

sr_linear_matrix materializes any operator as a dense matrix by probing with
basis images, which is the ground truth the test oracles compare against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError, ValidationError
from .images import image, validate_image
from .plugin_client import PluginSession
from .resampling import upsample, validate_scale

SR_KINDS = ("nearest", "bilinear", "bicubic", "plugin")

MATRIX_DIM_CAP = 4096  # h * w * c cap for dense materialization


@dataclass
class SrOperator:
    """An upscaler: one of the built-in kernels or an external plugin.

    plugin_command is the shell command line used to launch the plugin and is
    required exactly when kind == "plugin". The subprocess session is spawned
    lazily on first use and owned by this operator instance; concurrent runs
    must each build their own operator.
    """

    kind: str
    scale: int
    plugin_command: str | None = None
    _session: PluginSession | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in SR_KINDS:
            raise ValidationError(f"sr kind must be one of {SR_KINDS}, got {self.kind!r}")
        self.scale = validate_scale(self.scale)
        if (self.kind == "plugin") != (self.plugin_command is not None):
            raise ValidationError("plugin_command is required for kind='plugin' "
                                  "and forbidden otherwise")

    def session(self) -> PluginSession:
        if self._session is None:
            self._session = PluginSession(self.plugin_command)
        return self._session

    def close(self) -> None:
        if self._session is not None:
            self._session.close()
            self._session = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def nearest_up(scale: int) -> SrOperator:
    return SrOperator("nearest", scale)


def bilinear_up(scale: int) -> SrOperator:
    return SrOperator("bilinear", scale)


def bicubic_up(scale: int) -> SrOperator:
    return SrOperator("bicubic", scale)


def plugin_up(scale: int, command: str) -> SrOperator:
    return SrOperator("plugin", scale, plugin_command=command)


def sr_apply(op: SrOperator, img: np.ndarray) -> np.ndarray:
    """Upscale (H, W, C) to (H*s, W*s, C) through the configured route."""
    validate_image(img)
    if op.kind == "plugin":
        return op.session().apply(img, op.scale)
    return upsample(img, op.scale, op.kind)


def sr_linear_matrix(op: SrOperator, h: int, w: int, c: int = 1) -> np.ndarray:
    """Dense (h*w*c*s^2, h*w*c) matrix of the operator's action.

    Built by probing with basis images, so it is exact for any linear
    operator including plugins. Guarded to small inputs.
    """
    d_in = h * w * c
    if d_in > MATRIX_DIM_CAP:
        raise ValidationError(f"input dimension {d_in} exceeds the "
                              f"{MATRIX_DIM_CAP} materialization cap")
    if h < 1 or w < 1 or c not in (1, 3):
        raise ShapeError(f"bad probe shape {h}x{w}x{c}")
    s = op.scale
    d_out = d_in * s * s
    M = np.empty((d_out, d_in))
    probe = np.zeros((h, w, c))
    for j in range(d_in):
        probe.flat[j] = 1.0
        M[:, j] = sr_apply(op, image(probe)).ravel()
        probe.flat[j] = 0.0
    return M
