"""Closed-loop super-resolution for degraded images.

The package wraps any pair of operators (a downsampling observation UR and
an upsampling reconstruction SR) in a feedback iteration

    x_{k+1} = x_k + dt * lam * (x_s0 - SR(UR(x_k)))

whose fixed points reproduce the anchor x_s0 = SR(UR(x_0)) through the
round trip. Gains are chosen from probe-based estimates of the round-trip
Jacobian so the iteration contracts.
"""

from .corpus import gen_corpus, make_image
from .degradation import DegradationSpec, degrade, gaussian_kernel
from .errors import (CmisrError, DivergenceError, FormatError, ImageIOError,
                     PluginError, ProtocolError, ShapeError,
                     SingularGainError, ValidationError)
from .gain import (ContractionFactors, LambdaBounds, MuEstimate,
                   contraction_factors, estimate_gain, estimate_mu,
                   lambda_bounds)
from .harness import (DatasetResult, RunSpec, analyze_dataset, build_system,
                      emit_difference_figures, run_dataset)
from .images import (center_crop_multiple, clamp01, image, load_image,
                     quantize, save_image, to_uint8)
from .loop import LoopConfig, LoopResult, LoopTrace, TraceRecord, run_circular, step
from .metrics import difference_image, psnr, ssim
from .plugin_client import PluginSession
from .resampling import axis_weights, downsample, upsample
from .sr import (SrOperator, bicubic_up, bilinear_up, nearest_up, plugin_up,
                 sr_apply, sr_linear_matrix)
from .system import NfSystem, nf_apply, run_open_loop

__version__ = "0.1.0"

__all__ = [
    "CmisrError", "ValidationError", "ShapeError", "SingularGainError",
    "DivergenceError", "ImageIOError", "FormatError", "PluginError",
    "ProtocolError",
    "image", "load_image", "save_image", "clamp01", "quantize", "to_uint8",
    "center_crop_multiple",
    "axis_weights", "downsample", "upsample",
    "DegradationSpec", "degrade", "gaussian_kernel",
    "PluginSession",
    "SrOperator", "nearest_up", "bilinear_up", "bicubic_up", "plugin_up",
    "sr_apply", "sr_linear_matrix",
    "NfSystem", "nf_apply", "run_open_loop",
    "MuEstimate", "estimate_mu", "estimate_gain", "LambdaBounds",
    "lambda_bounds", "ContractionFactors", "contraction_factors",
    "LoopConfig", "LoopResult", "LoopTrace", "TraceRecord", "run_circular",
    "step",
    "psnr", "ssim", "difference_image",
    "make_image", "gen_corpus",
    "RunSpec", "DatasetResult", "run_dataset", "analyze_dataset",
    "build_system", "emit_difference_figures",
    "__version__",
]
