"""Outer half-quadratic-splitting loop: init, alternation, ensemble, tracing."""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.ndimage

from . import degrade
from .dataprox import DataProxContext, data_prox
from .degrade import CfaPattern, DegradationSpec, apply_degradation, bicubic_resize
from .denoise import DenoiserHandle, denoise
from .image import ImageTensor, apply_dihedral, dihedral_inverse, psnr
from .schedule import HqsSchedule

# --- initialization -------------------------------------------------------------

# Gradient-corrected linear demosaicing filters (scaled by 1/8): green estimated
# at red/blue sites, red/blue estimated at green sites (along-row and
# along-column variants) and at the opposite chroma site (diagonal variant).
_G_AT_RB = np.array([
    [0, 0, -1, 0, 0],
    [0, 0, 2, 0, 0],
    [-1, 2, 4, 2, -1],
    [0, 0, 2, 0, 0],
    [0, 0, -1, 0, 0],
]) / 8.0
_RB_ROW = np.array([
    [0, 0, 0.5, 0, 0],
    [0, -1, 0, -1, 0],
    [-1, 4, 5, 4, -1],
    [0, -1, 0, -1, 0],
    [0, 0, 0.5, 0, 0],
]) / 8.0
_RB_COL = _RB_ROW.T
_RB_DIAG = np.array([
    [0, 0, -1.5, 0, 0],
    [0, 2, 0, 2, 0],
    [-1.5, 0, 6, 0, -1.5],
    [0, 2, 0, 2, 0],
    [0, 0, -1.5, 0, 0],
]) / 8.0


def malvar_demosaic(y: ImageTensor, pattern: CfaPattern) -> ImageTensor:
    """Gradient-corrected 5x5 linear demosaic of a 3-channel mosaiced image."""
    if y.channels != 3:
        raise ValueError("expected a 3-channel mosaiced image")
    raw = y.data.sum(axis=0)
    h, w = raw.shape
    conv = {
        name: scipy.ndimage.correlate(raw, filt, mode="reflect")
        for name, filt in (("g", _G_AT_RB), ("row", _RB_ROW),
                           ("col", _RB_COL), ("diag", _RB_DIAG))
    }
    chan = np.array([[pattern.channel_at(i, j) for j in range(2)] for i in range(2)])
    site = np.empty((h, w), dtype=np.int64)
    for i in range(2):
        for j in range(2):
            site[i::2, j::2] = chan[i, j]

    out = np.empty((3, h, w))
    out[1] = np.where(site == 1, raw, conv["g"])
    for c in (0, 2):
        other = 2 - c
        plane = np.where(site == c, raw, conv["diag"])
        # at green sites pick the along-row filter when that row carries c
        ii, jj = np.nonzero(chan == c)
        c_row = int(ii[0]) % 2
        green_rowwise = (site == 1) & (np.arange(h)[:, None] % 2 == c_row)
        green_colwise = (site == 1) & ~green_rowwise
        plane = np.where(green_rowwise, conv["row"], plane)
        plane = np.where(green_colwise, conv["col"], plane)
        plane = np.where(site == other, conv["diag"], plane)
        out[c] = plane
    return ImageTensor(out)


def _bilinear_shift(img: ImageTensor, shift: float) -> ImageTensor:
    """Sample img at coordinates shifted by +shift in both axes (edge-clamped)."""
    h, w = img.height, img.width
    ys = np.clip(np.arange(h, dtype=np.float64) + shift, 0, h - 1)
    xs = np.clip(np.arange(w, dtype=np.float64) + shift, 0, w - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    out = np.empty_like(img.data)
    for c in range(img.channels):
        p = img.data[c]
        out[c] = ((1 - fy) * (1 - fx) * p[np.ix_(y0, x0)]
                  + (1 - fy) * fx * p[np.ix_(y0, x1)]
                  + fy * (1 - fx) * p[np.ix_(y1, x0)]
                  + fy * fx * p[np.ix_(y1, x1)])
    return ImageTensor(out)


def initialize(spec: DegradationSpec, y: ImageTensor) -> ImageTensor:
    """First iterate z_0 derived from the observation, per task."""
    if spec.task == degrade.TASK_DEBLUR:
        return y
    if spec.task == degrade.TASK_DEMOSAIC:
        return malvar_demosaic(y, spec.pattern)
    up = bicubic_resize(y, float(spec.scale))
    if spec.task == degrade.TASK_SISR:
        # the decimation keeps upper-left samples, so re-register the bicubic
        # estimate: LR sample (i,j) must sit at HR site (s*i, s*j)
        return _bilinear_shift(up, (spec.scale - 1) / 2.0)
    return up


# --- job and trace ----------------------------------------------------------------


@dataclass
class IterationTrace:
    k: int
    sigma_k: float
    alpha_k: float
    psnr_x: Optional[float]
    psnr_z: Optional[float]
    data_fidelity: float
    wall_time: float


TRACE_CSV_HEADER = "iter,sigma_k,alpha_k,psnr_x,psnr_z,data_fidelity,wall_time"


def trace_to_csv(traces: list[IterationTrace]) -> str:
    def fmt(v):
        return "" if v is None else f"{v:.10g}"

    lines = [TRACE_CSV_HEADER]
    for t in traces:
        lines.append(f"{t.k},{fmt(t.sigma_k)},{fmt(t.alpha_k)},{fmt(t.psnr_x)},"
                     f"{fmt(t.psnr_z)},{fmt(t.data_fidelity)},{fmt(t.wall_time)}")
    return "\n".join(lines) + "\n"


@dataclass
class RestorationJob:
    spec: DegradationSpec
    y: ImageTensor
    schedule: HqsSchedule
    denoiser: DenoiserHandle
    solver: str = "closed"  # closed | ibp
    ensemble: bool = True
    ground_truth: Optional[ImageTensor] = None
    stop_tol: Optional[float] = None  # relative z-change early stop, off by default
    snapshot: Optional[Callable[[int, ImageTensor, ImageTensor], None]] = None


# fixed cycling order: identity, the three rotations, then their flipped versions
def ensemble_transform_for(k: int) -> int:
    if k < 1:
        raise ValueError("iterations are numbered from 1")
    return (k - 1) % 8


def run(job: RestorationJob) -> tuple[ImageTensor, list[IterationTrace]]:
    """Alternate the data-proximal step and the denoiser for K iterations."""
    sched = job.schedule
    clean_spec = dataclasses.replace(job.spec, sigma255=0.0)
    ctx = DataProxContext(job.spec)
    z = initialize(job.spec, job.y)
    traces: list[IterationTrace] = []
    for k in range(1, sched.K + 1):
        t0 = time.perf_counter()
        alpha = sched.alphas[k - 1]
        sigma_k = sched.sigmas[k - 1]
        x = data_prox(ctx, job.y, z, alpha, solver=job.solver)
        z_prev = z
        if job.ensemble:
            t = ensemble_transform_for(k)
            z = apply_dihedral(denoise(job.denoiser, apply_dihedral(x, t), sigma_k),
                               dihedral_inverse(t))
        else:
            z = denoise(job.denoiser, x, sigma_k)
        residual = job.y.data - apply_degradation(x, clean_spec).data
        gt = job.ground_truth
        traces.append(IterationTrace(
            k=k, sigma_k=sigma_k, alpha_k=alpha,
            psnr_x=psnr(gt, x) if gt is not None else None,
            psnr_z=psnr(gt, z) if gt is not None else None,
            data_fidelity=float(np.sum(residual**2)),
            wall_time=time.perf_counter() - t0,
        ))
        if job.snapshot is not None:
            job.snapshot(k, x, z)
        if job.stop_tol is not None:
            rel = np.linalg.norm(z.data - z_prev.data) / max(np.linalg.norm(z.data), 1e-12)
            if rel < job.stop_tol:
                break
    return z, traces
