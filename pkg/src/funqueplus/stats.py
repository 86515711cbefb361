"""Local means, variances and covariances over square windows via integral images."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_WINDOW = 9


@dataclass(frozen=True)
class LocalStats:
    mu_x: np.ndarray
    mu_y: np.ndarray
    var_x: np.ndarray
    var_y: np.ndarray
    cov_xy: np.ndarray
    k: int


def integral_image(x: np.ndarray) -> np.ndarray:
    """(h+1) x (w+1) prefix sums with a zero first row and column, in float64."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros((x.shape[0] + 1, x.shape[1] + 1))
    np.cumsum(x, axis=0, out=out[1:, 1:])
    np.cumsum(out[1:, 1:], axis=1, out=out[1:, 1:])
    return out


def window_sum(ii: np.ndarray, k: int, stride: int = 1) -> np.ndarray:
    """Sums over every k x k window (top-left corners on a ``stride`` grid)."""
    h, w = ii.shape[0] - 1, ii.shape[1] - 1
    if not 1 <= k <= min(h, w):
        raise ValueError(f"window {k} does not fit in {h}x{w}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    s = (ii[k:, k:] + ii[:-k, :-k] - ii[k:, :-k] - ii[:-k, k:])
    return s[::stride, ::stride]


def local_mean_var(x: np.ndarray, k: int = DEFAULT_WINDOW, stride: int = 1):
    """Local mean and (clamped) variance of one image."""
    x = np.asarray(x, dtype=np.float64)
    shift = x.mean()
    xc = x - shift
    area = float(k * k)
    mu = window_sum(integral_image(xc), k, stride) / area
    var = window_sum(integral_image(xc * xc), k, stride) / area - mu * mu
    return mu + shift, np.maximum(var, 0.0)


def local_stats(x: np.ndarray, y: np.ndarray, k: int = DEFAULT_WINDOW, stride: int = 1) -> LocalStats:
    """Uniform-window local statistics of a pair of equally shaped images.

    Both inputs are shifted by their global means before accumulation; this
    leaves variances and covariances unchanged and keeps the prefix sums small.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {y.shape}")
    sx, sy = x.mean(), y.mean()
    xc, yc = x - sx, y - sy
    area = float(k * k)
    mu_x = window_sum(integral_image(xc), k, stride) / area
    mu_y = window_sum(integral_image(yc), k, stride) / area
    var_x = window_sum(integral_image(xc * xc), k, stride) / area - mu_x * mu_x
    if y is x:
        var_y = var_x
        cov = var_x.copy()
    else:
        var_y = window_sum(integral_image(yc * yc), k, stride) / area - mu_y * mu_y
        cov = window_sum(integral_image(xc * yc), k, stride) / area - mu_x * mu_y
    return LocalStats(mu_x + sx, mu_y + sy, np.maximum(var_x, 0.0), np.maximum(var_y, 0.0), cov, k)
