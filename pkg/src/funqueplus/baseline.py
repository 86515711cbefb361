"""Pixel-domain SSIM with a 9x9 Gaussian window, used as a speed reference."""
from __future__ import annotations

import numpy as np
from scipy.ndimage import correlate1d

from .features.ssim import K1, K2


def gaussian_window(size: int = 9, sigma: float = 1.5) -> np.ndarray:
    n = np.arange(size) - size // 2
    g = np.exp(-0.5 * (n / sigma) ** 2)
    return g / g.sum()


def _blur(x, g):
    return correlate1d(correlate1d(x, g, axis=0, mode="reflect"), g, axis=1, mode="reflect")


def gaussian_ssim(x: np.ndarray, y: np.ndarray, size: int = 9, sigma: float = 1.5) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    g = gaussian_window(size, sigma)
    mx, my = _blur(x, g), _blur(y, g)
    vx = _blur(x * x, g) - mx * mx
    vy = _blur(y * y, g) - my * my
    cxy = _blur(x * y, g) - mx * my
    m = ((2 * mx * my + K1) * (2 * cxy + K2)) / ((mx * mx + my * my + K1) * (vx + vy + K2))
    return float(m.mean())
