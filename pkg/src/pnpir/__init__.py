"""Plug-and-play image restoration by half-quadratic splitting.

Deblurring, super-resolution and demosaicing share one alternation: a
closed-form data-proximal step followed by a pluggable Gaussian denoiser.
"""

__version__ = "0.1.0"

from .degrade import (CfaPattern, DegradationSpec, add_awgn, apply_degradation,
                      bicubic_resize, cfa_mask, delta_kernel, gaussian_kernel,
                      load_kernel, mosaic, save_kernel, sfold_downsample,
                      zerofill_upsample)
from .denoise import DenoiserHandle, denoise, make_denoiser, tv_prox
from .diagnostics import residual_histogram, sweep, sweep_to_csv
from .image import (ImageTensor, apply_dihedral, decode_png, dihedral_compose,
                    dihedral_inverse, encode_png, psnr, read_png, write_png)
from .schedule import HqsSchedule, build_schedule
from .solver import RestorationJob, initialize, malvar_demosaic, run

__all__ = [
    "CfaPattern", "DegradationSpec", "DenoiserHandle", "HqsSchedule",
    "ImageTensor", "RestorationJob", "add_awgn", "apply_degradation",
    "apply_dihedral", "bicubic_resize", "build_schedule", "cfa_mask",
    "decode_png", "delta_kernel", "denoise", "dihedral_compose",
    "dihedral_inverse", "encode_png", "gaussian_kernel", "initialize",
    "load_kernel", "make_denoiser", "malvar_demosaic", "mosaic", "psnr",
    "read_png", "residual_histogram", "run", "save_kernel",
    "sfold_downsample", "sweep", "sweep_to_csv", "tv_prox", "write_png",
    "zerofill_upsample",
]
