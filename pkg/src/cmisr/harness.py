"""Batch evaluation: run a directory of images through the loop and report.

run_dataset produces one row per image with open-loop and closed-loop
quality, writes per-image iteration traces, a report (CSV or JSON) with a
pinned column order, and a summary of aggregate means. Reports are
byte-identical across repeated runs with the same RunSpec.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .degradation import DegradationSpec, degrade
from .errors import ImageIOError, ValidationError
from .gain import contraction_factors, estimate_gain, estimate_mu, lambda_bounds
from .images import center_crop_multiple, clamp01, image, load_image, save_image
from .loop import LoopConfig, run_circular
from .metrics import difference_image, psnr, ssim
from .resampling import downsample, validate_scale
from .sr import SrOperator
from .system import NfSystem, run_open_loop

UR_CHOICES = ("area", "nearest", "bilinear", "bicubic", "degrade")
SR_CHOICES = ("nearest", "bilinear", "bicubic", "plugin")
IMAGE_EXTENSIONS = (".png", ".pgm", ".ppm")

REPORT_FIELDS = ("image", "scale", "psnr_open_db", "psnr_circ_db", "ssim_open",
                 "ssim_circ", "iters", "stop_reason", "mu", "lambda", "residual_final")

ANALYZE_FIELDS = ("image", "scale", "mu", "mu_stderr", "gain", "lambda_lo",
                  "lambda_hi", "lambda_mid", "lambda_auto", "spectral_auto",
                  "frobenius_auto")


@dataclass(frozen=True)
class RunSpec:
    """Everything one batch run depends on; equal specs give equal reports."""

    input_path: str
    out_dir: str
    mode: str = "eval"
    scale: int = 2
    ur: str = "area"
    kernel: np.ndarray | None = None
    noise_sigma: float = 0.0
    noise_kind: str = "none"
    ur_order: str = "blur_then_downsample"
    sr: str = "bicubic"
    plugin_command: str | None = None
    lambda_mode: str = "auto"
    lambda_value: float | None = None
    dt: float = 1.0
    iters: int = 200
    tol: float = 1e-6
    init: str = "sr"
    seed: int = 0
    jobs: int = 1
    report_format: str = "csv"
    replicate: bool = False

    def __post_init__(self):
        if self.mode not in ("eval", "deploy"):
            raise ValidationError(f"mode must be eval or deploy, got {self.mode!r}")
        validate_scale(self.scale)
        if self.ur not in UR_CHOICES:
            raise ValidationError(f"ur must be one of {UR_CHOICES}, got {self.ur!r}")
        if self.sr not in SR_CHOICES:
            raise ValidationError(f"sr must be one of {SR_CHOICES}, got {self.sr!r}")
        if self.ur == "degrade" and self.kernel is None:
            raise ValidationError("ur='degrade' requires a kernel")
        if self.report_format not in ("csv", "json"):
            raise ValidationError(f"report must be csv or json, got {self.report_format!r}")
        if self.jobs < 1:
            raise ValidationError(f"jobs must be >= 1, got {self.jobs}")


def build_ur(spec: RunSpec, seed_offset: int = 0):
    """Bind the observation operator described by the spec to a callable."""
    if spec.ur == "degrade":
        dspec = DegradationSpec(kernel=spec.kernel, noise_kind=spec.noise_kind,
                                noise_sigma=spec.noise_sigma, order=spec.ur_order,
                                seed=spec.seed + seed_offset)
        return partial(degrade, spec=dspec, s=spec.scale)
    return partial(downsample, s=spec.scale, method=spec.ur)


def build_system(spec: RunSpec, seed_offset: int = 0) -> NfSystem:
    sr_op = SrOperator(spec.sr, spec.scale, plugin_command=spec.plugin_command)
    return NfSystem(ur=build_ur(spec, seed_offset), sr=sr_op, scale=spec.scale)


def _loop_config(spec: RunSpec, seed_offset: int = 0) -> LoopConfig:
    return LoopConfig(lambda_mode=spec.lambda_mode, lambda_value=spec.lambda_value,
                      dt=spec.dt, max_iters=spec.iters, tol=spec.tol,
                      init_mode=spec.init, seed=spec.seed + seed_offset)


def list_input_images(path) -> list[str]:
    if os.path.isfile(path):
        return [str(path)]
    if not os.path.isdir(path):
        raise ImageIOError(f"{path}: no such file or directory")
    names = sorted(n for n in os.listdir(path)
                   if os.path.splitext(n)[1].lower() in IMAGE_EXTENSIONS)
    if not names:
        raise ImageIOError(f"{path}: contains no {'/'.join(IMAGE_EXTENSIONS)} images")
    return [os.path.join(path, n) for n in names]


def _process_one(spec: RunSpec, index: int, path: str, trace_dir: str) -> dict:
    img = load_image(path, replicate=spec.replicate)
    sys = build_system(spec, seed_offset=index)
    cfg = _loop_config(spec, seed_offset=index)
    stem = os.path.splitext(os.path.basename(path))[0]
    try:
        if spec.mode == "eval":
            x0 = center_crop_multiple(img, spec.scale)
            result = run_circular(sys, x0, mode="evaluation", cfg=cfg)
            open_c = clamp01(result.x_open)
            circ_c = clamp01(result.x_final)
            row = {
                "image": stem, "scale": spec.scale,
                "psnr_open_db": psnr(open_c, x0), "psnr_circ_db": psnr(circ_c, x0),
                "ssim_open": ssim(open_c, x0), "ssim_circ": ssim(circ_c, x0),
            }
        else:
            result = run_circular(sys, img, mode="deployment", cfg=cfg)
            row = {
                "image": stem, "scale": spec.scale,
                "psnr_open_db": None, "psnr_circ_db": None,
                "ssim_open": None, "ssim_circ": None,
            }
        row.update({
            "iters": result.iters, "stop_reason": result.stop_reason,
            "mu": result.mu_used.mu, "lambda": result.lambda_used,
            "residual_final": result.trace[-1].rms_residual,
        })
        result.trace.write_csv(os.path.join(trace_dir, f"{stem}_s{spec.scale}.csv"))
        save_image(clamp01(result.x_final),
                   os.path.join(trace_dir, os.pardir, "outputs", f"{stem}_s{spec.scale}.png"))
    finally:
        sys.sr.close()
    return row


@dataclass
class DatasetResult:
    rows: list[dict]
    summary: dict
    report_path: str
    summary_path: str
    out_dir: str = ""
    trace_dir: str = ""


def run_dataset(spec: RunSpec) -> DatasetResult:
    """Process every image under the spec; write report, summary, traces."""
    paths = list_input_images(spec.input_path)
    os.makedirs(spec.out_dir, exist_ok=True)
    trace_dir = os.path.join(spec.out_dir, "traces")
    os.makedirs(trace_dir, exist_ok=True)
    os.makedirs(os.path.join(spec.out_dir, "outputs"), exist_ok=True)

    if spec.jobs == 1:
        rows = [_process_one(spec, i, p, trace_dir) for i, p in enumerate(paths)]
    else:
        with ThreadPoolExecutor(max_workers=spec.jobs) as pool:
            futures = [pool.submit(_process_one, spec, i, p, trace_dir)
                       for i, p in enumerate(paths)]
            rows = [f.result() for f in futures]  # input order, not completion order

    summary = _aggregate(rows)
    if spec.report_format == "csv":
        report_path = os.path.join(spec.out_dir, "report.csv")
        _write_report_csv(report_path, rows)
    else:
        report_path = os.path.join(spec.out_dir, "report.json")
        _write_report_json(report_path, rows)
    summary_path = os.path.join(spec.out_dir, "summary.json")
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=_json_safe)
        fh.write("\n")
    return DatasetResult(rows=rows, summary=summary, report_path=report_path,
                         summary_path=summary_path, out_dir=spec.out_dir,
                         trace_dir=trace_dir)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "inf" if np.isinf(v) else repr(v)
    return str(v)


def _json_safe(v):
    if isinstance(v, float) and np.isinf(v):
        return "inf"
    raise TypeError(f"not JSON serializable: {type(v)}")


def _write_report_csv(path: str, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_FIELDS)
        for row in rows:
            w.writerow([_cell(row[f]) for f in REPORT_FIELDS])


def _write_report_json(path: str, rows: list[dict]) -> None:
    out = []
    for row in rows:
        out.append({k: (("inf" if isinstance(v, float) and np.isinf(v) else v))
                    for k, v in row.items() if v is not None})
    with open(path, "w") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _aggregate(rows: list[dict]) -> dict:
    numeric = ("psnr_open_db", "psnr_circ_db", "ssim_open", "ssim_circ",
               "iters", "mu", "lambda", "residual_final")
    summary: dict = {"images": len(rows)}
    for key in numeric:
        vals = [row[key] for row in rows if row.get(key) is not None]
        summary[f"mean_{key}"] = float(np.mean(vals)) if vals else None
    gains = [row["psnr_circ_db"] - row["psnr_open_db"] for row in rows
             if row.get("psnr_open_db") is not None
             and np.isfinite(row["psnr_open_db"]) and np.isfinite(row["psnr_circ_db"])]
    summary["mean_psnr_gain_db"] = float(np.mean(gains)) if gains else None
    return summary


def emit_difference_figures(x0: np.ndarray, x_open: np.ndarray, x_circ: np.ndarray,
                            block: tuple[int, int, int, int], out_dir,
                            gain: float = 1.0) -> dict:
    """Crop one block from truth/open/closed images, write it plus the two
    amplified absolute-difference images, and a manifest of their errors.

    Manifest MAE values describe the difference data exactly as written
    (quantized to the 8-bit grid, divided back by the display gain), so
    recomputing the mean from the saved files reproduces them; the float MAE
    before quantization is included alongside.
    """
    y, x, h, w = block
    H, W, _ = x0.shape
    if not (0 <= y and 0 <= x and h > 0 and w > 0 and y + h <= H and x + w <= W):
        raise ValidationError(f"block {block} outside image {H}x{W}")
    if x_open.shape != x0.shape or x_circ.shape != x0.shape:
        raise ValidationError("difference figures need equally shaped images")
    if gain <= 0:
        raise ValidationError(f"gain must be > 0, got {gain}")
    os.makedirs(out_dir, exist_ok=True)
    crops = {
        "hq_block.png": x0[y:y + h, x:x + w, :],
        "open_block.png": clamp01(x_open[y:y + h, x:x + w, :]),
        "circ_block.png": clamp01(x_circ[y:y + h, x:x + w, :]),
    }
    manifest = {"block": [y, x, h, w], "gain": gain, "files": sorted(crops) +
                ["diff_open.png", "diff_circ.png"]}
    for name, variant in (("open", x_open), ("circ", x_circ)):
        diff = difference_image(x0[y:y + h, x:x + w, :],
                                clamp01(variant[y:y + h, x:x + w, :]), gain=gain)
        written = np.rint(np.clip(diff, 0.0, 1.0) * 255.0) / 255.0
        crops[f"diff_{name}.png"] = written
        manifest[f"mae_{name}"] = float(np.mean(written)) / gain
        manifest[f"mae_{name}_float"] = float(np.mean(diff)) / gain
    for name, data in crops.items():
        save_image(image(data, copy=False), os.path.join(out_dir, name))
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def analyze_dataset(spec: RunSpec, probes: int = 8, epsilon: float = 1e-3) -> list[dict]:
    """Gain analysis per image: mu, dominant gain, admissible interval,
    model factors at the auto gain. No loop is run."""
    paths = list_input_images(spec.input_path)
    rows = []
    for index, path in enumerate(paths):
        img = load_image(path, replicate=spec.replicate)
        sys = build_system(spec, seed_offset=index)
        stem = os.path.splitext(os.path.basename(path))[0]
        try:
            if spec.mode == "eval":
                x0 = center_crop_multiple(img, spec.scale)
                basepoint = run_open_loop(sys, sys.ur(x0))
            else:
                basepoint = run_open_loop(sys, img)
            mu_est = estimate_mu(sys, basepoint, probes=probes, epsilon=epsilon,
                                 seed=spec.seed + index)
            gamma = estimate_gain(sys, basepoint, epsilon=epsilon,
                                  seed=spec.seed + index + 1)
            D = basepoint.size
            try:
                bounds = lambda_bounds(mu_est.mu, spec.dt, D)
                lo, hi, mid = bounds.lo, bounds.hi, bounds.midpoint
            except ValidationError:
                lo = hi = mid = None
            lam_auto = (1.0 / (spec.dt * gamma)) if abs(gamma) > 1e-12 else None
            if lam_auto is not None:
                fac = contraction_factors(lam_auto, gamma, spec.dt, D)
                spectral, frob = fac.spectral, fac.frobenius
            else:
                spectral = frob = None
            rows.append({"image": stem, "scale": spec.scale, "mu": mu_est.mu,
                         "mu_stderr": mu_est.stderr, "gain": gamma,
                         "lambda_lo": lo, "lambda_hi": hi, "lambda_mid": mid,
                         "lambda_auto": lam_auto, "spectral_auto": spectral,
                         "frobenius_auto": frob})
        finally:
            sys.sr.close()
    return rows


def write_analyze_csv(path: str, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ANALYZE_FIELDS)
        for row in rows:
            w.writerow([_cell(row[f]) for f in ANALYZE_FIELDS])
