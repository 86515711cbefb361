"""Independent straight-line reference implementations used as test oracles.

Nothing here imports the package's transform or statistics code.
"""
from __future__ import annotations

import math

import numpy as np

K1 = (0.01 * 255) ** 2
K2 = (0.03 * 255) ** 2


def naive_haar(x):
    h, w = x.shape
    out = {b: np.zeros((h // 2, w // 2)) for b in "AHVD"}
    for i in range(h // 2):
        for j in range(w // 2):
            a, b = x[2 * i, 2 * j], x[2 * i, 2 * j + 1]
            c, d = x[2 * i + 1, 2 * j], x[2 * i + 1, 2 * j + 1]
            out["A"][i, j] = (a + b + c + d) / 2
            out["H"][i, j] = (a - b + c - d) / 2
            out["V"][i, j] = (a + b - c - d) / 2
            out["D"][i, j] = (a - b - c + d) / 2
    return out


def naive_haar_pyramid(x, levels):
    out = {}
    cur = x
    for lam in range(1, levels + 1):
        out[lam] = naive_haar(cur)
        cur = out[lam]["A"]
    return out


def block_stats(x, y, size):
    """Population mean/var/cov over disjoint size x size blocks."""
    h, w = x.shape[0] // size, x.shape[1] // size
    mx, my, vx, vy, cxy = (np.zeros((h, w)) for _ in range(5))
    for i in range(h):
        for j in range(w):
            bx = x[i * size:(i + 1) * size, j * size:(j + 1) * size].ravel()
            by = y[i * size:(i + 1) * size, j * size:(j + 1) * size].ravel()
            n = bx.size
            ax, ay = sum(bx) / n, sum(by) / n
            mx[i, j], my[i, j] = ax, ay
            vx[i, j] = sum((v - ax) ** 2 for v in bx) / n
            vy[i, j] = sum((v - ay) ** 2 for v in by) / n
            cxy[i, j] = sum((u - ax) * (v - ay) for u, v in zip(bx, by)) / n
    return mx, my, vx, vy, cxy


def spatial_ssim_maps(x, y, size):
    mx, my, vx, vy, cxy = block_stats(x, y, size)
    lum = (2 * mx * my + K1) / (mx ** 2 + my ** 2 + K1)
    cs = (2 * cxy + K2) / (vx + vy + K2)
    return lum * cs, cs


def mean_pool(m):
    return float(np.mean(m))


def cov_pool(m):
    mu = float(np.mean(m))
    return math.sqrt(float(np.mean((m - mu) ** 2))) / mu


def spatial_ms(x, y, levels, pool, weights=(0.0448, 0.2856, 0.3001, 0.2363, 0.1333)):
    w = np.array(weights[:levels]) / sum(weights[:levels])
    out = 1.0
    for lam in range(1, levels + 1):
        q, cs = spatial_ssim_maps(x, y, 2 ** lam)
        term = pool(q) if lam == levels else pool(cs)
        out *= term ** w[lam - 1]
    return out


def sliding_stats(x, y, k):
    """Direct two-pass window statistics (no prefix sums)."""
    h, w = x.shape[0] - k + 1, x.shape[1] - k + 1
    mx, my, vx, vy, cxy = (np.zeros((h, w)) for _ in range(5))
    for i in range(h):
        for j in range(w):
            bx = x[i:i + k, j:j + k]
            by = y[i:i + k, j:j + k]
            ax, ay = bx.mean(), by.mean()
            mx[i, j], my[i, j] = ax, ay
            vx[i, j] = ((bx - ax) ** 2).mean()
            vy[i, j] = ((by - ay) ** 2).mean()
            cxy[i, j] = ((bx - ax) * (by - ay)).mean()
    return mx, my, vx, vy, cxy
