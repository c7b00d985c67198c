"""Reference external upscaler for the cmisr plugin wire protocol.

A minimal, dependency-light subprocess that upsamples float32 tensors with
classical resampling (nearest or Keys bicubic) behind the same byte protocol
a neural model plugin would use. See resample.UPSCALERS for the extension
point where a learned forward pass slots in.
"""

from .protocol import (
    APPLY_HEADER,
    HANDSHAKE,
    LENGTH,
    MAGIC,
    MAX_FRAME,
    RESULT_HEADER,
    TYPE_ERROR,
    TYPE_SHUTDOWN,
    TYPE_SR_APPLY,
    TYPE_SR_RESULT,
    VERSION,
    TruncatedStreamError,
    encode_error,
    encode_frame,
    read_exact,
)
from .resample import (
    CUBIC_A,
    UPSCALERS,
    bicubic_axis_matrix,
    bicubic_upscale,
    cubic_kernel,
    nearest_axis_indices,
    nearest_upscale,
    upscale,
)
from .server import handle_apply, main, serve

__version__ = "0.1.0"

__all__ = [
    "APPLY_HEADER",
    "CUBIC_A",
    "HANDSHAKE",
    "LENGTH",
    "MAGIC",
    "MAX_FRAME",
    "RESULT_HEADER",
    "TYPE_ERROR",
    "TYPE_SHUTDOWN",
    "TYPE_SR_APPLY",
    "TYPE_SR_RESULT",
    "TruncatedStreamError",
    "UPSCALERS",
    "VERSION",
    "__version__",
    "bicubic_axis_matrix",
    "bicubic_upscale",
    "cubic_kernel",
    "encode_error",
    "encode_frame",
    "handle_apply",
    "main",
    "nearest_axis_indices",
    "nearest_upscale",
    "read_exact",
    "serve",
    "upscale",
]
