"""Command-line surface: degrade, deblur, sr, demosaic, psnr, sweep."""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import time

import numpy as np

from . import __version__, degrade, diagnostics, solver
from .degrade import (CfaPattern, DegradationSpec, apply_degradation,
                      load_kernel)
from .denoise import ExternalDenoiserError, make_denoiser
from .image import CodecError, psnr, read_png, write_png
from .schedule import DEFAULT_LAMBDA, SIGMA_DATA_FLOOR, build_schedule
from .solver import RestorationJob, trace_to_csv

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_EXTERNAL = 4
EXIT_NUMERICAL = 5


class UsageError(ValueError):
    pass


def _add_restore_flags(p: argparse.ArgumentParser):
    p.add_argument("--input", required=True, help="degraded PNG")
    p.add_argument("--output", required=True, help="restored PNG")
    p.add_argument("--ref", help="ground-truth PNG for PSNR reporting")
    p.add_argument("--denoiser", default="tv",
                   help="identity|tv|dct|median or extern:<command>")
    p.add_argument("--sigma", type=float, default=0.0, help="data noise level (0-255)")
    p.add_argument("--iters", type=int, help="outer iteration count K")
    p.add_argument("--sigma1", type=float, default=49.0)
    p.add_argument("--sigmaK", type=float, help="final denoiser level (task default)")
    p.add_argument("--lam", type=float, default=DEFAULT_LAMBDA)
    p.add_argument("--no-ensemble", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="JSON report path (default: <output>.json)")
    p.add_argument("--trace", help="per-iteration trace CSV path")
    p.add_argument("--dump-iters", help="comma-separated iterations to dump as PNGs")
    p.add_argument("--dump-dir", default=".", help="directory for iterate dumps")
    p.add_argument("--border", type=int, default=0, help="PSNR border crop")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pnpir",
                                 description="plug-and-play HQS image restoration")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("deblur", help="non-blind deconvolution")
    _add_restore_flags(p)
    p.add_argument("--kernel", required=True, help="blur kernel text file")

    p = sub.add_parser("sr", help="single-image super-resolution")
    _add_restore_flags(p)
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--kernel", help="blur kernel file (classical model); "
                                    "omit for the bicubic model")
    p.add_argument("--solver", choices=("closed", "ibp"), default="closed")

    p = sub.add_parser("demosaic", help="Bayer CFA interpolation")
    _add_restore_flags(p)
    p.add_argument("--pattern", default="RGGB")

    p = sub.add_parser("degrade", help="synthesize a degraded image")
    p.add_argument("--task", required=True,
                   choices=("deblur", "sr", "sr-bicubic", "demosaic"))
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--kernel")
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pattern", default="RGGB")

    p = sub.add_parser("psnr", help="compare two PNGs")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--border", type=int, default=0)

    p = sub.add_parser("sweep", help="final-PSNR grid over (K, sigma1)")
    _add_restore_flags(p)
    p.add_argument("--kernel", required=True)
    p.add_argument("--K-values", required=True, help="e.g. 4,8,24")
    p.add_argument("--sigma1-values", required=True, help="e.g. 9,29,49")

    return ap


def _make_spec(args) -> DegradationSpec:
    if args.command == "deblur":
        return DegradationSpec("deblur", sigma255=args.sigma,
                               kernel=load_kernel(args.kernel))
    if args.command in ("sr", "sweep") and getattr(args, "scale", None) is not None:
        pass
    if args.command == "sr":
        if args.kernel:
            return DegradationSpec("sisr", sigma255=args.sigma,
                                   kernel=load_kernel(args.kernel), scale=args.scale)
        return DegradationSpec("sisr-bicubic", sigma255=args.sigma, scale=args.scale)
    if args.command == "demosaic":
        return DegradationSpec("demosaic", sigma255=args.sigma,
                               pattern=CfaPattern.from_string(args.pattern))
    return DegradationSpec("deblur", sigma255=args.sigma,
                           kernel=load_kernel(args.kernel))


def _task_defaults(command: str, args) -> tuple[int, float]:
    """Resolved (K, sigmaK) with explicit flags taking precedence."""
    if command == "sr":
        k, sK = 24, max(args.sigma, float(args.scale))
    elif command == "demosaic":
        k, sK = 40, 0.6
    else:
        k, sK = 8, args.sigma
    if args.iters is not None:
        k = args.iters
    if args.sigmaK is not None:
        sK = args.sigmaK
    sK = max(sK, SIGMA_DATA_FLOOR)
    return k, min(sK, args.sigma1)


def _cmd_restore(args) -> int:
    spec = _make_spec(args)
    y = read_png(args.input)
    gt = read_png(args.ref) if args.ref else None
    K, sigmaK = _task_defaults(args.command, args)
    sched = build_schedule(K, args.sigma1, sigmaK, args.lam, args.sigma)
    handle = make_denoiser(args.denoiser)
    job = RestorationJob(
        spec=spec, y=y, schedule=sched, denoiser=handle,
        solver=getattr(args, "solver", "closed"),
        ensemble=not args.no_ensemble, ground_truth=gt,
    )
    t0 = time.perf_counter()
    try:
        if args.dump_iters:
            k_set = {int(tok) for tok in args.dump_iters.split(",")}
            diagnostics.dump_intermediates(job, k_set, args.dump_dir)
        out, traces = solver.run(job)
    finally:
        handle.close()
    wall = time.perf_counter() - t0
    if not np.all(np.isfinite(out.data)):
        raise FloatingPointError("non-finite values in restored image")
    write_png(args.output, out)

    final_psnr = psnr(gt, out, border=args.border) if gt is not None else None
    report = {
        "task": spec.task,
        "input": args.input,
        "output": args.output,
        "ref": args.ref,
        "schedule": {"K": sched.K, "sigma1": sched.sigma1, "sigmaK": sched.sigmaK,
                     "lambda": sched.lam, "sigma_data": sched.sigma_data,
                     "sigmas": list(sched.sigmas), "alphas": list(sched.alphas)},
        "denoiser": args.denoiser,
        "solver": job.solver,
        "ensemble": job.ensemble,
        "seed": args.seed,
        "final_psnr_db": final_psnr,
        "trace": [dataclasses.asdict(t) for t in traces],
        "total_wall_time_s": wall,
        "engine_version": __version__,
    }
    report_path = args.report or args.output + ".json"
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(trace_to_csv(traces))
    if final_psnr is not None:
        print(f"PSNR: {final_psnr:.2f} dB")
    return EXIT_OK


def _cmd_degrade(args) -> int:
    img = read_png(args.input)
    task_map = {"deblur": "deblur", "sr": "sisr", "sr-bicubic": "sisr-bicubic",
                "demosaic": "demosaic"}
    task = task_map[args.task]
    kernel = load_kernel(args.kernel) if args.kernel else None
    if task in ("deblur", "sisr") and kernel is None:
        raise UsageError(f"--kernel is required for task {args.task}")
    spec = DegradationSpec(task, sigma255=args.sigma, kernel=kernel,
                           scale=args.scale,
                           pattern=CfaPattern.from_string(args.pattern))
    out = apply_degradation(img, spec, seed=args.seed)
    write_png(args.output, out)
    sidecar = {
        "task": args.task,
        "input": args.input,
        "output": args.output,
        "sigma": args.sigma,
        "seed": args.seed,
        "scale": args.scale,
        "pattern": args.pattern,
        "kernel_sha256": hashlib.sha256(kernel.tobytes()).hexdigest() if kernel is not None else None,
        "engine_version": __version__,
    }
    with open(args.output + ".json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2)
    return EXIT_OK


def _cmd_psnr(args) -> int:
    a = read_png(args.a)
    b = read_png(args.b)
    value = psnr(a, b, border=args.border)
    print("inf" if value == float("inf") else f"{value:.2f}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = _make_spec(args)
    y = read_png(args.input)
    if not args.ref:
        raise UsageError("sweep requires --ref")
    gt = read_png(args.ref)
    K_values = [int(t) for t in args.K_values.split(",")]
    sigma1_values = [float(t) for t in args.sigma1_values.split(",")]
    _, sigmaK = _task_defaults("deblur", args)
    sched = build_schedule(max(K_values), args.sigma1, sigmaK, args.lam, args.sigma)
    handle = make_denoiser(args.denoiser)
    job = RestorationJob(spec=spec, y=y, schedule=sched, denoiser=handle,
                         ensemble=not args.no_ensemble, ground_truth=gt)
    try:
        table = diagnostics.sweep(job, K_values, sigma1_values)
    finally:
        handle.close()
    csv = diagnostics.sweep_to_csv(table, K_values, sigma1_values)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(csv)
    print(csv, end="")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "degrade":
            return _cmd_degrade(args)
        if args.command == "psnr":
            return _cmd_psnr(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_restore(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (degrade.KernelFormatError, ValueError) as exc:
        if "non-finite" in str(exc):
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ExternalDenoiserError as exc:
        print(f"external denoiser failure: {exc}", file=sys.stderr)
        return EXIT_EXTERNAL
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, CodecError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
