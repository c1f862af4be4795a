"""Closed-form and iterative solvers for the data subproblem of each task.

Every solver minimizes ||y - T(x)||^2 + alpha * ||x - z||^2 for its task's
forward operator T, either exactly (FFT / element-wise closed forms) or by a
few back-projection steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import degrade
from .degrade import DegradationSpec, bicubic_resize, sfold_downsample, zerofill_upsample
from .freq import block_downsample_spectrum, circular_convolve, psf2otf
from .image import ImageTensor


@dataclass
class DataProxContext:
    """Caches kernel spectra and mask planes reused across HQS iterations."""

    spec: DegradationSpec
    _cache: dict = field(default_factory=dict)

    def otf(self, height: int, width: int) -> np.ndarray:
        key = ("otf", height, width)
        if key not in self._cache:
            self._cache[key] = psf2otf(self.spec.kernel, height, width)
        return self._cache[key]

    def mask(self, height: int, width: int) -> np.ndarray:
        key = ("mask", height, width)
        if key not in self._cache:
            self._cache[key] = degrade.cfa_mask(self.spec.pattern, height, width).data
        return self._cache[key]


def deblur_prox(ctx: DataProxContext, y: ImageTensor, z: ImageTensor, alpha: float) -> ImageTensor:
    """Exact minimizer for circular-convolution deblurring, per channel in FFT space."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if y.shape != z.shape:
        raise ValueError("y/z shape mismatch")
    otf = ctx.otf(y.height, y.width)
    denom = np.abs(otf) ** 2 + alpha
    out = np.empty_like(y.data)
    for c in range(y.channels):
        num = np.conj(otf) * np.fft.fft2(y.data[c]) + alpha * np.fft.fft2(z.data[c])
        out[c] = np.fft.ifft2(num / denom).real
    return ImageTensor(out)


def sisr_prox_closed(ctx: DataProxContext, y: ImageTensor, z: ImageTensor,
                     alpha: float, s: int) -> ImageTensor:
    """Exact minimizer for blur + s-fold decimation, via distinct-block spectra."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    hh, ww = z.height, z.width
    if (hh, ww) != (y.height * s, y.width * s):
        raise ValueError(f"z {z.shape} must be the x{s} frame of y {y.shape}")
    if hh % s or ww % s:
        raise ValueError("high-resolution dims must be divisible by s")
    otf = ctx.otf(hh, ww)
    otf_conj = np.conj(otf)
    denom = block_downsample_spectrum(np.abs(otf) ** 2, s) + alpha
    y_up = zerofill_upsample(y, s)
    out = np.empty_like(z.data)
    for c in range(y.channels):
        d = otf_conj * np.fft.fft2(y_up.data[c]) + alpha * np.fft.fft2(z.data[c])
        ratio = block_downsample_spectrum(otf * d, s) / denom
        x_hat = (d - otf_conj * np.tile(ratio, (s, s))) / alpha
        out[c] = np.fft.ifft2(x_hat).real
    return ImageTensor(out)


def sisr_prox_ibp(y: ImageTensor, z: ImageTensor, s: int,
                  kernel: Optional[np.ndarray] = None,
                  gamma: float = 1.75, inner_iters: int = 5) -> ImageTensor:
    """Iterative back-projection data update.

    With a kernel, the residual is zero-filled and convolved with the
    180-degree-rotated kernel (the adjoint of the forward model); without
    one, bicubic downsampling/upsampling is used.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if inner_iters < 1:
        raise ValueError("inner_iters must be >= 1")
    x = z
    for _ in range(inner_iters):
        if kernel is not None:
            residual = ImageTensor(
                y.data - sfold_downsample(circular_convolve(x, kernel), s).data
            )
            step = circular_convolve(zerofill_upsample(residual, s), kernel[::-1, ::-1])
        else:
            residual = ImageTensor(y.data - bicubic_resize(x, 1.0 / s).data)
            step = bicubic_resize(residual, float(s))
        x = ImageTensor(x.data + gamma * step.data)
    return x


def demosaic_prox(mask: np.ndarray, y: ImageTensor, z: ImageTensor, alpha: float) -> ImageTensor:
    """Element-wise minimizer for masked observation: (M*y + alpha*z)/(M + alpha)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return ImageTensor((mask * y.data + alpha * z.data) / (mask + alpha))


def data_prox(ctx: DataProxContext, y: ImageTensor, z: ImageTensor, alpha: float,
              solver: str = "closed") -> ImageTensor:
    """Dispatch the data-subproblem update for the context's task."""
    task = ctx.spec.task
    if task == degrade.TASK_DEBLUR:
        return deblur_prox(ctx, y, z, alpha)
    if task == degrade.TASK_SISR:
        if solver == "ibp":
            return sisr_prox_ibp(y, z, ctx.spec.scale, kernel=ctx.spec.kernel)
        return sisr_prox_closed(ctx, y, z, alpha, ctx.spec.scale)
    if task == degrade.TASK_SISR_BICUBIC:
        return sisr_prox_ibp(y, z, ctx.spec.scale, kernel=None)
    return demosaic_prox(ctx.mask(y.height, y.width), y, z, alpha)
