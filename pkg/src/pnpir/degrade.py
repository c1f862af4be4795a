"""Forward degradation operators, blur-kernel handling and seeded noise."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .freq import circular_convolve
from .image import ImageTensor

KERNEL_SUM_TOL = 1e-3


class KernelFormatError(ValueError):
    """Raised for invalid kernel payloads or files."""


def normalize_kernel(weights) -> np.ndarray:
    """Validate a blur kernel: 2-D, nonnegative, renormalized to sum 1."""
    k = np.asarray(weights, dtype=np.float64)
    if k.ndim != 2:
        raise KernelFormatError(f"kernel must be 2-D, got shape {k.shape}")
    if np.any(k < 0):
        raise KernelFormatError("kernel has negative taps")
    total = float(k.sum())
    if abs(total - 1.0) > KERNEL_SUM_TOL:
        raise KernelFormatError(f"kernel sum {total:.6f} too far from 1")
    return k / total


def delta_kernel(size: int = 1) -> np.ndarray:
    k = np.zeros((size, size))
    k[size // 2, size // 2] = 1.0
    return k


def gaussian_kernel(sigma_x: float, sigma_y: float, theta: float, size: int) -> np.ndarray:
    """Anisotropic Gaussian kernel sampled at integer offsets, normalized to sum 1."""
    if size % 2 == 0:
        raise ValueError("kernel size must be odd")
    if sigma_x <= 0 or sigma_y <= 0:
        raise ValueError("sigmas must be positive")
    half = size // 2
    yy, xx = np.mgrid[-half : half + 1, -half : half + 1].astype(np.float64)
    c, s = np.cos(theta), np.sin(theta)
    # rotate offsets into the kernel's principal axes
    u = c * xx + s * yy
    v = -s * xx + c * yy
    k = np.exp(-0.5 * ((u / sigma_x) ** 2 + (v / sigma_y) ** 2))
    return k / k.sum()


def load_kernel_text(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise KernelFormatError("empty kernel file")
    try:
        kh, kw = (int(tok) for tok in lines[0].split())
    except ValueError as exc:
        raise KernelFormatError(f"bad kernel header {lines[0]!r}") from exc
    if len(lines) != 1 + kh:
        raise KernelFormatError(f"expected {kh} kernel rows, got {len(lines) - 1}")
    rows = []
    for ln in lines[1:]:
        vals = [float(tok) for tok in ln.split()]
        if len(vals) != kw:
            raise KernelFormatError(f"expected {kw} taps per row, got {len(vals)}")
        rows.append(vals)
    return normalize_kernel(np.array(rows))


def save_kernel_text(k: np.ndarray) -> str:
    kh, kw = k.shape
    rows = [" ".join(f"{v:.17g}" for v in row) for row in k]
    return "\n".join([f"{kh} {kw}"] + rows) + "\n"


def load_kernel(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        return load_kernel_text(fh.read())


def save_kernel(path, k: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(save_kernel_text(k))


# --- CFA ----------------------------------------------------------------------

_CHANNEL_INDEX = {"R": 0, "G": 1, "B": 2}


@dataclass(frozen=True)
class CfaPattern:
    """2x2 color filter arrangement, row-major (e.g. ('R','G','G','B'))."""

    labels: tuple[str, str, str, str] = ("R", "G", "G", "B")

    def __post_init__(self):
        counts = {ch: self.labels.count(ch) for ch in "RGB"}
        if counts != {"R": 1, "G": 2, "B": 1}:
            raise ValueError(f"invalid CFA arrangement {self.labels}")

    @classmethod
    def from_string(cls, text: str) -> "CfaPattern":
        text = text.strip().upper()
        if len(text) != 4 or any(ch not in "RGB" for ch in text):
            raise ValueError(f"bad CFA pattern {text!r}")
        return cls(tuple(text))

    def channel_at(self, i: int, j: int) -> int:
        return _CHANNEL_INDEX[self.labels[(i % 2) * 2 + (j % 2)]]


RGGB = CfaPattern()


def cfa_mask(pattern: CfaPattern, height: int, width: int) -> ImageTensor:
    """3-channel binary mask with exactly one lit channel per pixel."""
    mask = np.zeros((3, height, width))
    for i in range(2):
        for j in range(2):
            mask[pattern.channel_at(i, j), i::2, j::2] = 1.0
    return ImageTensor(mask)


def mosaic(img: ImageTensor, pattern: CfaPattern) -> ImageTensor:
    if img.channels != 3:
        raise ValueError("mosaicing requires a 3-channel image")
    mask = cfa_mask(pattern, img.height, img.width)
    return ImageTensor(mask.data * img.data)


# --- resampling ---------------------------------------------------------------


def sfold_downsample(img: ImageTensor, s: int) -> ImageTensor:
    """Keep the upper-left pixel of each distinct s x s patch."""
    if img.height % s or img.width % s:
        raise ValueError(f"{img.height}x{img.width} not divisible by {s}")
    return ImageTensor(img.data[:, ::s, ::s].copy())


def zerofill_upsample(img: ImageTensor, s: int) -> ImageTensor:
    """Adjoint of sfold_downsample: place samples on the s-strided grid, zeros elsewhere."""
    out = np.zeros((img.channels, img.height * s, img.width * s))
    out[:, ::s, ::s] = img.data
    return ImageTensor(out)


def _cubic_weight(t: np.ndarray, a: float = -0.5) -> np.ndarray:
    at = np.abs(t)
    w = np.where(
        at <= 1.0,
        (a + 2.0) * at**3 - (a + 3.0) * at**2 + 1.0,
        np.where(at < 2.0, a * at**3 - 5.0 * a * at**2 + 8.0 * a * at - 4.0 * a, 0.0),
    )
    return w


def _resize_matrix(n_in: int, n_out: int, scale: float) -> np.ndarray:
    """Row-stochastic cubic-convolution resampling matrix (pixel-center aligned)."""
    m = np.zeros((n_out, n_in))
    for i in range(n_out):
        src = (i + 0.5) / scale - 0.5
        base = int(np.floor(src))
        for j in range(base - 1, base + 3):
            w = float(_cubic_weight(np.array(src - j)))
            m[i, min(max(j, 0), n_in - 1)] += w
    return m


def bicubic_resize(img: ImageTensor, scale: float) -> ImageTensor:
    """Separable cubic-convolution resize (a = -0.5), edge-clamped taps."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    h_out = int(round(img.height * scale))
    w_out = int(round(img.width * scale))
    if h_out < 1 or w_out < 1:
        raise ValueError(f"scale {scale} collapses {img.height}x{img.width}")
    mh = _resize_matrix(img.height, h_out, scale)
    mw = _resize_matrix(img.width, w_out, scale)
    out = np.einsum("hi,cij,wj->chw", mh, img.data, mw, optimize=True)
    return ImageTensor(out)


# --- noise --------------------------------------------------------------------


def add_awgn(img: ImageTensor, sigma255: float, seed: int) -> ImageTensor:
    """Add i.i.d. Gaussian noise of std sigma255/255, without clipping.

    Noise is drawn from a seeded Philox counter-based generator through the
    Box-Muller transform, so fields are bit-reproducible for a fixed seed.
    """
    if sigma255 < 0:
        raise ValueError("noise level must be nonnegative")
    if sigma255 == 0:
        return img
    rng = np.random.Generator(np.random.Philox(seed))
    u1 = rng.random(img.shape)
    u2 = rng.random(img.shape)
    noise = np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)
    return ImageTensor(img.data + (sigma255 / 255.0) * noise)


# --- task descriptor ----------------------------------------------------------

TASK_DEBLUR = "deblur"
TASK_SISR = "sisr"
TASK_SISR_BICUBIC = "sisr-bicubic"
TASK_DEMOSAIC = "demosaic"


@dataclass(frozen=True)
class DegradationSpec:
    """What happened to the clean image: task, operator parameters, noise level."""

    task: str
    sigma255: float = 0.0
    kernel: Optional[np.ndarray] = None
    scale: int = 1
    pattern: CfaPattern = field(default_factory=CfaPattern)

    def __post_init__(self):
        if self.task not in (TASK_DEBLUR, TASK_SISR, TASK_SISR_BICUBIC, TASK_DEMOSAIC):
            raise ValueError(f"unknown task {self.task!r}")
        if self.task in (TASK_DEBLUR, TASK_SISR) and self.kernel is None:
            raise ValueError(f"{self.task} requires a blur kernel")
        if self.task in (TASK_SISR, TASK_SISR_BICUBIC) and self.scale < 1:
            raise ValueError("scale must be >= 1")
        if self.sigma255 < 0:
            raise ValueError("noise level must be nonnegative")


def apply_degradation(img: ImageTensor, spec: DegradationSpec, seed: int = 0) -> ImageTensor:
    """Run the forward model T(x) and add noise per the task descriptor."""
    if spec.task == TASK_DEBLUR:
        out = circular_convolve(img, spec.kernel)
    elif spec.task == TASK_SISR:
        out = sfold_downsample(circular_convolve(img, spec.kernel), spec.scale)
    elif spec.task == TASK_SISR_BICUBIC:
        out = bicubic_resize(img, 1.0 / spec.scale)
    else:
        out = mosaic(img, spec.pattern)
    return add_awgn(out, spec.sigma255, seed)
