"""SSIM, ESSIM, MS-SSIM and MS-ESSIM computed from Haar subbands.

Level-lambda statistics describe disjoint 2^lambda x 2^lambda pixel blocks and
are built recursively from the previous level, so all scales cost the same as
the coarsest one.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..transform import WaveletPyramid

log = logging.getLogger(__name__)

K1 = (0.01 * 255) ** 2
K2 = (0.03 * 255) ** 2
MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
BASE_EPS = 1e-12


@dataclass(frozen=True)
class ScaleStats:
    mu_x: list
    mu_y: list
    var_x: list
    var_y: list
    cov_xy: list

    def level(self, lam: int):
        i = lam - 1
        return self.mu_x[i], self.mu_y[i], self.var_x[i], self.var_y[i], self.cov_xy[i]


def _block_sum(m: np.ndarray) -> np.ndarray:
    return m[0::2, 0::2] + m[0::2, 1::2] + m[1::2, 0::2] + m[1::2, 1::2]


def scale_stats(pyr_x: WaveletPyramid, pyr_y: WaveletPyramid, levels: int) -> ScaleStats:
    if pyr_x.levels < levels or pyr_y.levels < levels:
        raise ValueError("pyramids have fewer levels than requested")
    mu_x, mu_y, var_x, var_y, cov = [], [], [], [], []
    vx = vy = cxy = None
    for lam in range(1, levels + 1):
        bx, by = pyr_x[lam], pyr_y[lam]
        if bx.A.shape != by.A.shape:
            raise ValueError(f"level {lam} shapes differ: {bx.A.shape} vs {by.A.shape}")
        scale = 2.0 ** (-lam)
        s2 = scale * scale
        tx = s2 * (bx.H * bx.H + bx.V * bx.V + bx.D * bx.D)
        ty = s2 * (by.H * by.H + by.V * by.V + by.D * by.D)
        txy = s2 * (bx.H * by.H + bx.V * by.V + bx.D * by.D)
        if vx is None:
            vx, vy, cxy = tx, ty, txy
        else:
            vx = 0.25 * _block_sum(vx) + tx
            vy = 0.25 * _block_sum(vy) + ty
            cxy = 0.25 * _block_sum(cxy) + txy
        mu_x.append(scale * bx.A)
        mu_y.append(scale * by.A)
        var_x.append(vx)
        var_y.append(vy)
        cov.append(cxy)
    return ScaleStats(mu_x, mu_y, var_x, var_y, cov)


def luminance_map(stats: ScaleStats, lam: int, k1: float = K1) -> np.ndarray:
    mx, my = stats.mu_x[lam - 1], stats.mu_y[lam - 1]
    return (2 * mx * my + k1) / (mx * mx + my * my + k1)


def cs_map(stats: ScaleStats, lam: int, k2: float = K2) -> np.ndarray:
    vx, vy, cxy = stats.var_x[lam - 1], stats.var_y[lam - 1], stats.cov_xy[lam - 1]
    return (2 * cxy + k2) / (vx + vy + k2)


def pool(values: np.ndarray, method: str = "Mean") -> float:
    """Mean pooling, or coefficient-of-variation (population std / mean) pooling."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("cannot pool an empty map")
    mean = float(values.mean())
    if method == "Mean":
        return mean
    if method != "CoV":
        raise ValueError(f"unknown pooling method {method!r}")
    if values.size == 1:
        return 0.0
    std = float(values.std())
    if mean == 0.0:
        if std == 0.0:
            return 0.0
        raise FloatingPointError("CoV pooling of a zero-mean map with nonzero spread")
    return std / mean


def ms_exponents(levels: int) -> np.ndarray:
    """First ``levels`` canonical MS-SSIM exponents, renormalized to sum to one."""
    if not 1 <= levels <= len(MS_SSIM_WEIGHTS):
        raise ValueError(f"levels must be in 1..{len(MS_SSIM_WEIGHTS)}")
    w = np.asarray(MS_SSIM_WEIGHTS[:levels])
    return w / w.sum()


def _power(base: float, exponent: float) -> float:
    if base < 0.0:
        log.warning("negative pooled base %.3g clamped to %.1g before exponentiation", base, BASE_EPS)
        base = BASE_EPS
    return base ** exponent


def _combine(top: float, cs_terms, levels: int) -> float:
    alpha = ms_exponents(levels)
    out = _power(top, alpha[-1])
    for lam in range(levels - 1):
        out *= _power(cs_terms[lam], alpha[lam])
    return out


def ssim_family(stats: ScaleStats, levels: int | None = None, k1: float = K1, k2: float = K2) -> dict:
    """All four scores at every level up to ``levels``, keyed like ``"MS-ESSIM@2"``."""
    levels = levels or len(stats.mu_x)
    out = {}
    cs_mean, cs_cov = [], []
    for lam in range(1, levels + 1):
        cs = cs_map(stats, lam, k2)
        q = luminance_map(stats, lam, k1) * cs
        ssim = pool(q, "Mean")
        essim = pool(q, "CoV")
        out[f"SSIM@{lam}"] = ssim
        out[f"ESSIM@{lam}"] = essim
        out[f"MS-SSIM@{lam}"] = _combine(ssim, cs_mean, lam)
        out[f"MS-ESSIM@{lam}"] = _combine(essim, cs_cov, lam)
        cs_mean.append(pool(cs, "Mean"))
        cs_cov.append(pool(cs, "CoV"))
    return out


def ssim(pyr_x, pyr_y, levels, k1=K1, k2=K2) -> float:
    return ssim_family(scale_stats(pyr_x, pyr_y, levels), levels, k1, k2)[f"SSIM@{levels}"]


def essim(pyr_x, pyr_y, levels, k1=K1, k2=K2) -> float:
    return ssim_family(scale_stats(pyr_x, pyr_y, levels), levels, k1, k2)[f"ESSIM@{levels}"]


def ms_ssim(pyr_x, pyr_y, levels, k1=K1, k2=K2) -> float:
    return ssim_family(scale_stats(pyr_x, pyr_y, levels), levels, k1, k2)[f"MS-SSIM@{levels}"]


def ms_essim(pyr_x, pyr_y, levels, k1=K1, k2=K2) -> float:
    return ssim_family(scale_stats(pyr_x, pyr_y, levels), levels, k1, k2)[f"MS-ESSIM@{levels}"]
