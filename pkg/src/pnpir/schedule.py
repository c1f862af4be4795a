"""Per-iteration denoiser noise levels and data-term weights for the HQS loop."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_LAMBDA = 0.23
SIGMA_DATA_FLOOR = 0.255  # 0.001 on the [0,1] scale; keeps alphas finite at sigma = 0


@dataclass(frozen=True)
class HqsSchedule:
    """Descending denoiser levels sigma_k and matching weights alpha_k.

    All sigmas are on the 0-255 scale; alphas are computed in normalized
    units: alpha_k = lambda * (sigma/255)^2 / (sigma_k/255)^2.
    """

    K: int
    sigma1: float
    sigmaK: float
    lam: float
    sigma_data: float
    sigmas: tuple[float, ...]
    alphas: tuple[float, ...]


def build_schedule(K: int, sigma1: float, sigmaK: float,
                   lam: float = DEFAULT_LAMBDA, sigma_data: float = 0.0) -> HqsSchedule:
    """Geometric interpolation from sigma1 down to sigmaK over K iterations."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if not sigma1 >= sigmaK > 0:
        raise ValueError(f"need sigma1 >= sigmaK > 0, got {sigma1}, {sigmaK}")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if sigma_data < 0:
        raise ValueError("sigma_data must be nonnegative")

    if K == 1:
        sigmas = np.array([float(sigmaK)])
    else:
        k = np.arange(K)
        sigmas = sigma1 * (sigmaK / sigma1) ** (k / (K - 1))
    sig_eff = max(sigma_data, SIGMA_DATA_FLOOR)
    alphas = lam * (sig_eff / 255.0) ** 2 / (sigmas / 255.0) ** 2
    return HqsSchedule(
        K=K, sigma1=float(sigma1), sigmaK=float(sigmaK), lam=float(lam),
        sigma_data=float(sigma_data),
        sigmas=tuple(float(v) for v in sigmas),
        alphas=tuple(float(v) for v in alphas),
    )
