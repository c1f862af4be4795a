"""2-D FFT utilities: OTFs, circular convolution and distinct-block spectral ops.

Convention: unnormalized forward transform, 1/N inverse (numpy default).
Spectra are plain complex 2-D arrays, one per channel.
"""

from __future__ import annotations

import numpy as np

from .image import ImageTensor


def fft2(plane: np.ndarray) -> np.ndarray:
    return np.fft.fft2(plane)


def ifft2(spec: np.ndarray) -> np.ndarray:
    return np.fft.ifft2(spec)


def psf2otf(kernel: np.ndarray, height: int, width: int) -> np.ndarray:
    """Optical transfer function of a small PSF on a height x width grid.

    The kernel is zero-embedded and circularly shifted so its center tap
    (floor(kh/2), floor(kw/2)) lands at the origin before the transform.
    """
    k = np.asarray(kernel, dtype=np.float64)
    kh, kw = k.shape
    if kh > height or kw > width:
        raise ValueError(f"kernel {k.shape} larger than plane {(height, width)}")
    plane = np.zeros((height, width), dtype=np.float64)
    plane[:kh, :kw] = k
    plane = np.roll(plane, (-(kh // 2), -(kw // 2)), axis=(0, 1))
    return np.fft.fft2(plane)


def circular_convolve(img: ImageTensor, kernel: np.ndarray) -> ImageTensor:
    """Per-channel circular convolution with a centered kernel."""
    otf = psf2otf(kernel, img.height, img.width)
    out = np.empty_like(img.data)
    for c in range(img.channels):
        out[c] = np.fft.ifft2(otf * np.fft.fft2(img.data[c])).real
    return ImageTensor(out)


def block_downsample_spectrum(spec: np.ndarray, factor: int) -> np.ndarray:
    """Average the factor x factor distinct (strided) sub-grids of a spectrum."""
    h, w = spec.shape
    if h % factor or w % factor:
        raise ValueError(f"spectrum {spec.shape} not divisible by {factor}")
    return spec.reshape(factor, h // factor, factor, w // factor).mean(axis=(0, 2))


def block_multiply_spectrum(a: np.ndarray, b: np.ndarray, factor: int) -> np.ndarray:
    """Multiply each distinct sub-grid block of ``a`` element-wise by ``b``."""
    h, w = a.shape
    bh, bw = b.shape
    if bh * factor != h or bw * factor != w:
        raise ValueError(f"block shape mismatch: {a.shape} vs {b.shape} x{factor}")
    return a * np.tile(b, (factor, factor))
