"""Command line front end.

Subcommands:
  run         batch-process images through the closed loop and report
  analyze     estimate gains and admissible step sizes without iterating
  gen-corpus  write the synthetic evaluation corpus

Exit codes: 0 success, 2 argument or data validation, 3 file I/O,
4 plugin or protocol failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .corpus import gen_corpus
from .errors import (CmisrError, DivergenceError, ImageIOError, PluginError,
                     ValidationError)
from .harness import (RunSpec, SR_CHOICES, UR_CHOICES, analyze_dataset,
                      run_dataset, write_analyze_csv)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_PLUGIN = 4

KERNEL_SUM_SLACK = 1e-6


def load_kernel_file(path: str) -> np.ndarray:
    """Read a whitespace-separated kernel matrix and renormalize its sum to
    one. A sum more than 1e-6 away from one is treated as a data error
    rather than silently rescaled."""
    try:
        k = np.loadtxt(path, dtype=np.float64, ndmin=2)
    except OSError as exc:
        raise ImageIOError(f"{path}: {exc}") from exc
    except ValueError as exc:
        raise ValidationError(f"{path}: not a numeric matrix ({exc})") from exc
    total = float(k.sum())
    if abs(total - 1.0) > KERNEL_SUM_SLACK:
        raise ValidationError(f"{path}: kernel sums to {total!r}, expected 1 "
                              f"within {KERNEL_SUM_SLACK}")
    return k / total


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="image file or directory")
    p.add_argument("--mode", choices=("eval", "deploy"), default="eval")
    p.add_argument("--scale", type=int, choices=(2, 3, 4), default=2)
    p.add_argument("--ur", choices=UR_CHOICES, default="area",
                   help="observation operator (downsampler or blur+downsample)")
    p.add_argument("--kernel", default=None, help="blur kernel file for --ur degrade")
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--noise-kind", choices=("none", "gaussian", "uniform"),
                   default="none")
    p.add_argument("--ur-order", choices=("blur_then_downsample",
                                          "downsample_then_blur"),
                   default="blur_then_downsample")
    p.add_argument("--sr", choices=SR_CHOICES, default="bicubic",
                   help="reconstruction operator")
    p.add_argument("--plugin", default=None, metavar="CMD",
                   help="subprocess command for --sr plugin")
    p.add_argument("--lambda", dest="lambda_arg", default="auto",
                   help="'auto', 'midpoint', or a fixed numeric gain")
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--init", choices=("sr", "zero", "random"), default="sr")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--replicate", action="store_true",
                   help="load grayscale input as 3 identical channels")


def _parse_lambda(text: str) -> tuple[str, float | None]:
    if text in ("auto", "midpoint"):
        return text, None
    try:
        return "fixed", float(text)
    except ValueError:
        raise ValidationError(
            f"--lambda must be 'auto', 'midpoint', or a number, got {text!r}")


def _spec_from_args(args: argparse.Namespace) -> RunSpec:
    lambda_mode, lambda_value = _parse_lambda(args.lambda_arg)
    kernel = load_kernel_file(args.kernel) if args.kernel else None
    return RunSpec(
        input_path=args.input, out_dir=args.out, mode=args.mode,
        scale=args.scale, ur=args.ur, kernel=kernel,
        noise_sigma=args.noise_sigma, noise_kind=args.noise_kind,
        ur_order=args.ur_order, sr=args.sr, plugin_command=args.plugin,
        lambda_mode=lambda_mode, lambda_value=lambda_value, dt=args.dt,
        iters=args.iters, tol=args.tol, init=args.init, seed=args.seed,
        jobs=args.jobs, report_format=getattr(args, "report", "csv"),
        replicate=args.replicate)


def cmd_run(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    result = run_dataset(spec)
    done = sum(1 for r in result.rows if r["stop_reason"] != "diverged")
    print(f"processed {len(result.rows)} image(s), {done} converged or "
          f"iteration-capped; report: {result.report_path}")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    rows = analyze_dataset(spec)
    if getattr(args, "analyze_out", None):
        write_analyze_csv(args.analyze_out, rows)
        print(f"wrote {args.analyze_out}")
    for row in rows:
        print(f"{row['image']} s={row['scale']}: mu={row['mu']:.6g} "
              f"(stderr {row['mu_stderr']:.2g}), gain={row['gain']:.6g}, "
              f"lambda_auto={row['lambda_auto']}")
    return EXIT_OK


def cmd_gen_corpus(args: argparse.Namespace) -> int:
    paths = gen_corpus(args.out, count=args.count,
                       size=(args.size[0], args.size[1]), seed=args.seed)
    print(f"wrote {len(paths)} images to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmisr",
        description="Closed-loop super-resolution runner and analysis tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the loop over a dataset")
    _add_run_args(p_run)
    p_run.add_argument("--report", choices=("csv", "json"), default="csv")
    p_run.set_defaults(func=cmd_run)

    p_an = sub.add_parser("analyze", help="estimate gains without iterating")
    _add_run_args(p_an)
    p_an.add_argument("--analyze-out", default=None,
                      help="optional CSV path for the analysis table")
    p_an.set_defaults(func=cmd_analyze)

    p_gen = sub.add_parser("gen-corpus", help="generate the synthetic corpus")
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--count", type=int, default=12)
    p_gen.add_argument("--size", type=int, nargs=2, default=(48, 48),
                       metavar=("H", "W"))
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.set_defaults(func=cmd_gen_corpus)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PluginError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PLUGIN
    except ImageIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, DivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CmisrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
