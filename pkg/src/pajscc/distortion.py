"""End-to-end rate-distortion model and PSNR conversion.

Total distortion is a source term that falls hyperbolically with the encoding
rate plus a channel term linear in the effective loss rate, all in MSE.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidMSE, InvalidParameter, InvalidRate

PEAK = 255.0


@dataclass(frozen=True)
class DistortionParams:
    d0: float
    alpha: float
    v0: float
    beta: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidParameter("alpha must be > 0")
        if not self.beta >= 0:
            raise InvalidParameter("beta must be >= 0")
        if not self.d0 >= 0:
            raise InvalidParameter("d0 must be >= 0")


# Synthetic sequences of increasing complexity. These are simulator inputs
# chosen to give PSNRs in the 30-45 dB range, not fitted to real video.
PRESETS = {
    "low": DistortionParams(d0=1.0, alpha=2500.0, v0=30.0, beta=2000.0),
    "medium": DistortionParams(d0=2.0, alpha=6000.0, v0=40.0, beta=3000.0),
    "high": DistortionParams(d0=4.0, alpha=15000.0, v0=60.0, beta=5000.0),
}


def d_src(params: DistortionParams, v_kbps: float) -> float:
    if not v_kbps > params.v0:
        raise InvalidRate(f"source rate {v_kbps} Kbps must exceed v0={params.v0} Kbps")
    return params.d0 + params.alpha / (v_kbps - params.v0)


def d_total(params: DistortionParams, v_kbps: float, pi_star: float) -> float:
    if not 0.0 <= pi_star <= 1.0:
        raise InvalidParameter(f"pi_star must lie in [0, 1], got {pi_star}")
    return d_src(params, v_kbps) + params.beta * pi_star


def mse_to_psnr(mse: float) -> float:
    if not mse > 0:
        raise InvalidMSE(f"PSNR undefined for mse={mse}")
    return 10.0 * math.log10(PEAK * PEAK / mse)


def psnr_to_mse(psnr_db: float) -> float:
    return PEAK * PEAK / 10.0 ** (psnr_db / 10.0)
