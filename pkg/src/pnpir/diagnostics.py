"""Analysis artifacts: residual histograms, parameter sweeps, iterate dumps."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

import numpy as np

from . import solver
from .image import ImageTensor, psnr, write_png
from .schedule import build_schedule
from .solver import RestorationJob


@dataclass(frozen=True)
class Histogram:
    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]
    total: int


def residual_histogram(x: ImageTensor, gt: ImageTensor, bins: int) -> Histogram:
    """Histogram of (x - gt) over the symmetric range [-m, m], m = max |difference|."""
    if x.shape != gt.shape:
        raise ValueError("shape mismatch")
    if bins < 2:
        raise ValueError("need at least 2 bins")
    diff = (x.data - gt.data).ravel()
    m = float(np.max(np.abs(diff)))
    if m == 0.0:
        m = 1.0
    counts, edges = np.histogram(diff, bins=bins, range=(-m, m))
    return Histogram(
        bin_edges=tuple(float(e) for e in edges),
        counts=tuple(int(c) for c in counts),
        total=int(counts.sum()),
    )


def sweep(job_template: RestorationJob, K_values: list[int],
          sigma1_values: list[float]) -> list[list[float]]:
    """Final-PSNR grid over (K, sigma1); one full restoration per cell.

    Rows follow K_values, columns sigma1_values. Requires ground truth.
    """
    if job_template.ground_truth is None:
        raise ValueError("sweep needs a ground-truth image")
    base = job_template.schedule
    table = []
    for K in K_values:
        row = []
        for sigma1 in sigma1_values:
            sched = build_schedule(K, sigma1, min(base.sigmaK, sigma1), base.lam,
                                   base.sigma_data)
            job = dataclasses.replace(job_template, schedule=sched)
            out, _ = solver.run(job)
            row.append(psnr(job.ground_truth, out))
        table.append(row)
    return table


def sweep_to_csv(table: list[list[float]], K_values: list[int],
                 sigma1_values: list[float]) -> str:
    lines = ["K\\sigma1," + ",".join(f"{s:g}" for s in sigma1_values)]
    for K, row in zip(K_values, table):
        lines.append(f"{K}," + ",".join(f"{v:.2f}" for v in row))
    return "\n".join(lines) + "\n"


def dump_intermediates(job: RestorationJob, k_set: set[int], out_dir) -> list[str]:
    """Run the job and write x_k/z_k PNG pairs for the requested iterations."""
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []

    def snapshot(k: int, x: ImageTensor, z: ImageTensor):
        if k in k_set:
            for role, img in (("x", x), ("z", z)):
                path = os.path.join(out_dir, f"iter{k:03d}_{role}.png")
                write_png(path, img)
                written.append(path)

    job = dataclasses.replace(job, snapshot=snapshot)
    solver.run(job)
    return written
