"""Synthetic distortions used for monotonicity checks."""
from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

from .media import FramePlanes


def gaussian_noise(plane: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    if sigma == 0:
        return plane
    return np.clip(plane + rng.normal(0.0, sigma, plane.shape), 0.0, 255.0)


def gaussian_blur(plane: np.ndarray, sigma: float) -> np.ndarray:
    if sigma == 0:
        return plane
    return gaussian_filter(plane, sigma, mode="reflect")


def uniform_quantize(plane: np.ndarray, step: float) -> np.ndarray:
    if step == 0:
        return plane
    return np.clip(np.round(plane / step) * step, 0.0, 255.0)


DISTORTIONS = ("gaussian_noise", "gaussian_blur", "uniform_quantize")


def distort_frame(frame: FramePlanes, kind: str, severity: float, rng: np.random.Generator) -> FramePlanes:
    if kind == "gaussian_noise":
        return frame.map(lambda p: gaussian_noise(p, severity, rng))
    if kind == "gaussian_blur":
        return frame.map(lambda p: gaussian_blur(p, severity))
    if kind == "uniform_quantize":
        return frame.map(lambda p: uniform_quantize(p, severity))
    raise ValueError(f"unknown distortion {kind!r}; expected one of {DISTORTIONS}")


def distort_video(frames, kind: str, severity: float, seed: int = 0):
    """Distort every frame; noise draws come from one generator seeded per video."""
    rng = np.random.default_rng(seed)
    for frame in frames:
        yield distort_frame(frame, kind, severity, rng)
