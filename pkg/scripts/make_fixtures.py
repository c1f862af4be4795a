"""Generate the kernel and image fixtures checked into the repository.

The motion-style kernels are locally generated stand-ins with the same sizes
as the classic benchmark set, not the benchmark taps themselves. Images come
from scikit-image's bundled samples (dev-only dependency).
"""

import os

import numpy as np
import skimage.data
import skimage.transform

from pnpir.degrade import gaussian_kernel, save_kernel
from pnpir.image import ImageTensor, write_png

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
KERNEL_DIR = os.path.join(ROOT, "kernels")
FIXTURE_DIR = os.path.join(ROOT, "tests", "fixtures")


def motion_kernel(size: int, seed: int) -> np.ndarray:
    """Random curved-trajectory blur: a smoothed random walk splatted bilinearly."""
    rng = np.random.default_rng(seed)
    steps = 6 * size
    angle = rng.uniform(0, 2 * np.pi)
    pos = np.zeros(2)
    pts = [pos.copy()]
    for _ in range(steps):
        angle += rng.normal(0, 0.25)
        pos = pos + 0.22 * np.array([np.sin(angle), np.cos(angle)])
        pts.append(pos.copy())
    pts = np.array(pts)
    pts -= pts.mean(axis=0)
    half = (size - 1) / 2
    scale = (half * 0.8) / max(np.abs(pts).max(), 1e-9)
    pts = pts * scale + half
    k = np.zeros((size, size))
    for py, px in pts:
        i0, j0 = int(np.floor(py)), int(np.floor(px))
        fy, fx = py - i0, px - j0
        for di, wy in ((0, 1 - fy), (1, fy)):
            for dj, wx in ((0, 1 - fx), (1, fx)):
                i, j = i0 + di, j0 + dj
                if 0 <= i < size and 0 <= j < size:
                    k[i, j] += wy * wx
    # light smoothing so the trajectory has finite thickness
    g = gaussian_kernel(0.6, 0.6, 0.0, 5)
    k = np.pad(k, 2)
    out = np.zeros((size, size))
    for i in range(size):
        for j in range(size):
            out[i, j] = np.sum(k[i : i + 5, j : j + 5] * g)
    return out / out.sum()


def main():
    os.makedirs(KERNEL_DIR, exist_ok=True)
    os.makedirs(FIXTURE_DIR, exist_ok=True)

    for idx, (size, seed) in enumerate([(17, 11), (17, 23), (27, 37), (27, 41)], 1):
        save_kernel(os.path.join(KERNEL_DIR, f"motion{idx}.txt"), motion_kernel(size, seed))
    for idx, sigma in enumerate([0.7, 1.2, 1.6, 2.0], 1):
        save_kernel(os.path.join(KERNEL_DIR, f"gauss_iso{idx}.txt"),
                    gaussian_kernel(sigma, sigma, 0.0, 15))
    aniso = [(2.0, 0.7, 0.0), (2.4, 1.0, np.pi / 4), (3.0, 1.2, np.pi / 2),
             (2.8, 0.8, 3 * np.pi / 4)]
    for idx, (sx, sy, th) in enumerate(aniso, 1):
        save_kernel(os.path.join(KERNEL_DIR, f"gauss_aniso{idx}.txt"),
                    gaussian_kernel(sx, sy, th, 15))

    cam = skimage.data.camera().astype(np.float64) / 255.0
    cam256 = skimage.transform.resize(cam, (256, 256), anti_aliasing=True)
    write_png(os.path.join(FIXTURE_DIR, "gray256.png"), ImageTensor(cam256[None]))

    astro = skimage.data.astronaut().astype(np.float64) / 255.0
    astro256 = skimage.transform.resize(astro, (256, 256), anti_aliasing=True)
    write_png(os.path.join(FIXTURE_DIR, "color256.png"),
              ImageTensor(np.moveaxis(astro256, 2, 0)))

    chelsea = skimage.data.chelsea().astype(np.float64) / 255.0
    crop = chelsea[:256, 100:356]
    write_png(os.path.join(FIXTURE_DIR, "color256b.png"),
              ImageTensor(np.moveaxis(crop, 2, 0)))
    print("fixtures written")


if __name__ == "__main__":
    main()
