"""Image container, PNG codec boundary, dihedral transforms and PSNR."""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np


class CodecError(ValueError):
    """Raised for malformed or unsupported image payloads."""


@dataclass(frozen=True)
class ImageTensor:
    """Planar channel-major image, float64, nominal range [0, 1].

    Values outside [0, 1] are allowed mid-iteration; clamping happens only
    at 8-bit export.
    """

    data: np.ndarray  # shape (channels, height, width)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise ValueError(f"expected (C, H, W) array, got shape {arr.shape}")
        if arr.shape[0] not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {arr.shape[0]}")
        if arr.shape[1] < 1 or arr.shape[2] < 1:
            raise ValueError("empty image")
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite values in image data")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "ImageTensor":
        """Wrap a (H, W), (C, H, W) or (H, W, C) float array."""
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[None]
        elif arr.ndim == 3 and arr.shape[0] not in (1, 3) and arr.shape[2] in (1, 3):
            arr = np.moveaxis(arr, 2, 0)
        return cls(arr)

    def to_gray_array(self) -> np.ndarray:
        if self.channels != 1:
            raise ValueError("not a single-channel image")
        return self.data[0]


def decode_png(blob: bytes) -> ImageTensor:
    """Decode an 8- or 16-bit grayscale/RGB PNG into [0, 1] floats.

    Images with an alpha channel are rejected.
    """
    buf = np.frombuffer(blob, dtype=np.uint8)
    raw = cv2.imdecode(buf, cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise CodecError("malformed or unsupported PNG payload")
    if raw.ndim == 3 and raw.shape[2] == 4:
        raise CodecError("alpha channel not supported")
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise CodecError(f"unsupported PNG sample type {raw.dtype}")
    if raw.ndim == 2:
        data = raw[None].astype(np.float64) / scale
    elif raw.ndim == 3 and raw.shape[2] == 3:
        rgb = cv2.cvtColor(raw, cv2.COLOR_BGR2RGB)
        data = np.moveaxis(rgb.astype(np.float64) / scale, 2, 0)
    else:
        raise CodecError(f"unsupported PNG layout with shape {raw.shape}")
    return ImageTensor(data)


def quantize_u8(data: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1] and quantize with round-half-away-from-zero."""
    clamped = np.clip(data, 0.0, 1.0)
    return np.floor(clamped * 255.0 + 0.5).astype(np.uint8)


def encode_png(img: ImageTensor) -> bytes:
    """Encode to an 8-bit PNG; values are clamped and rounded at this boundary."""
    q = quantize_u8(img.data)
    if img.channels == 1:
        plane = q[0]
    else:
        plane = cv2.cvtColor(np.moveaxis(q, 0, 2), cv2.COLOR_RGB2BGR)
    ok, buf = cv2.imencode(".png", plane)
    if not ok:
        raise CodecError("PNG encoding failed")
    return bytes(buf)


def read_png(path) -> ImageTensor:
    with open(path, "rb") as fh:
        return decode_png(fh.read())


def write_png(path, img: ImageTensor) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_png(img))


# --- dihedral group of the square -------------------------------------------
#
# Index t = 4*f + r acts as: rotate CCW by 90*r degrees, then flip
# horizontally if f. Order: identity, rot90, rot180, rot270, flip,
# flip*rot90, flip*rot180, flip*rot270.

DIHEDRAL_COUNT = 8


def apply_dihedral(img: ImageTensor, t: int) -> ImageTensor:
    """Apply dihedral transform ``t`` in [0, 8) to the image."""
    if not 0 <= t < 8:
        raise ValueError(f"dihedral index {t} out of range")
    out = np.rot90(img.data, k=t & 3, axes=(1, 2))
    if t >= 4:
        out = out[:, :, ::-1]
    return ImageTensor(out.copy())


def _build_group_tables():
    probe = np.arange(12, dtype=np.float64).reshape(1, 3, 4)
    probe_img = ImageTensor(probe)
    reps = [apply_dihedral(probe_img, t).data for t in range(8)]

    def find(arr):
        for t, rep in enumerate(reps):
            if arr.shape == rep.shape and np.array_equal(arr, rep):
                return t
        raise AssertionError("composition left the dihedral group")

    compose = np.zeros((8, 8), dtype=np.int64)
    for a in range(8):
        for b in range(8):
            # compose[a, b]: apply a first, then b
            compose[a, b] = find(apply_dihedral(ImageTensor(reps[a]), b).data)
    inverse = np.zeros(8, dtype=np.int64)
    for a in range(8):
        inverse[a] = int(np.nonzero(compose[a] == 0)[0][0])
    return compose, inverse


_COMPOSE, _INVERSE = _build_group_tables()


def dihedral_compose(a: int, b: int) -> int:
    """Index of the transform 'apply a, then b'."""
    return int(_COMPOSE[a, b])


def dihedral_inverse(t: int) -> int:
    return int(_INVERSE[t])


# --- quality metric ----------------------------------------------------------

PSNR_INF = float("inf")


def psnr(a: ImageTensor, b: ImageTensor, border: int = 0) -> float:
    """PSNR in dB on the [0, 1] scale, excluding a border of given width.

    MSE is pooled over all channels. Returns +inf when the images agree
    exactly on the evaluated region.
    """
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    if border < 0 or 2 * border >= min(a.height, a.width):
        raise ValueError(f"border {border} too large for {a.height}x{a.width}")
    sl = np.s_[:, border : a.height - border, border : a.width - border]
    diff = a.data[sl] - b.data[sl]
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_INF
    return 10.0 * np.log10(1.0 / mse)
