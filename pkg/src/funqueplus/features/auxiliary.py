"""Spatial-activity/blur deltas, mean-absolute-difference and Blur/Edge features."""
from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import correlate1d

from ..transform import WaveletPyramid

HAAR_HIGHPASS = np.array([1.0, -1.0]) / math.sqrt(2.0)
TOP_FRACTION = 0.01


def gradient_energies(pyr: WaveletPyramid, level: int):
    """First-order energy H^2 + V^2 and second-order energy of re-filtered H, V."""
    b = pyr[level]
    e1 = b.H * b.H + b.V * b.V
    # H refiltered along rows (horizontal direction), V along columns
    hh = correlate1d(b.H, HAAR_HIGHPASS, axis=1, mode="reflect")
    vv = correlate1d(b.V, HAAR_HIGHPASS, axis=0, mode="reflect")
    e2 = hh * hh + vv * vv
    return e1, e2


def tl_sai(pyr: WaveletPyramid, level: int) -> float:
    e1, _ = gradient_energies(pyr, level)
    return float(np.std(np.sqrt(e1))) ** 0.25


def top_mean(values: np.ndarray, fraction: float = TOP_FRACTION) -> float:
    flat = np.ravel(values)
    n = max(1, math.ceil(fraction * flat.size))
    return float(np.partition(flat, flat.size - n)[flat.size - n:].mean())


def tl_blur(pyr: WaveletPyramid, level: int) -> float:
    e1, e2 = gradient_energies(pyr, level)
    den = top_mean(e1)
    return 0.0 if den == 0.0 else top_mean(e2) / den


_NR = {"TL-SAI": tl_sai, "TL-Blur": tl_blur}


def delta_feature(feature: str, pyr_x: WaveletPyramid, pyr_y: WaveletPyramid, level: int) -> float:
    fn = _NR[feature]
    return fn(pyr_x, level) - fn(pyr_y, level)


def mad(variant: str, a_prev_x, a_x, a_prev_y, a_y) -> float:
    """MAD-Ref / MAD-Dis compare successive frames of one stream; Cross compares streams."""
    if variant == "Ref":
        return float(np.mean(np.abs(a_x - a_prev_x)))
    if variant == "Dis":
        return float(np.mean(np.abs(a_y - a_prev_y)))
    if variant == "Cross":
        return float(np.mean(np.abs(a_x - a_y)))
    raise ValueError(f"unknown MAD variant {variant!r}")


def blur_edge(pyr_x: WaveletPyramid, pyr_y: WaveletPyramid, level: int):
    bx, by = pyr_x[level], pyr_y[level]
    diff = sum(np.abs(getattr(bx, t)) - np.abs(getattr(by, t)) for t in ("H", "V", "D"))
    return float(np.maximum(diff, 0.0).mean()), float(np.maximum(-diff, 0.0).mean())


def aux_features(pyr_x, pyr_y, prev_x=None, prev_y=None, levels: int | None = None) -> dict:
    levels = levels or pyr_x.levels
    out = {}
    for lam in range(1, levels + 1):
        out[f"dTL-SAI@{lam}"] = delta_feature("TL-SAI", pyr_x, pyr_y, lam)
        out[f"dTL-Blur@{lam}"] = delta_feature("TL-Blur", pyr_x, pyr_y, lam)
        out.update(mad_features(pyr_x, pyr_y, prev_x, prev_y, lam))
        blur, edge = blur_edge(pyr_x, pyr_y, lam)
        out[f"Blur@{lam}"] = blur
        out[f"Edge@{lam}"] = edge
    return out


def mad_features(pyr_x, pyr_y, prev_x, prev_y, lam: int) -> dict:
    ax, ay = pyr_x[lam].A, pyr_y[lam].A
    out = {f"MAD@{lam}": mad("Cross", None, ax, None, ay)}
    if prev_x is None or prev_y is None:
        out[f"MAD-Ref@{lam}"] = out[f"MAD-Dis@{lam}"] = math.nan
    else:
        out[f"MAD-Ref@{lam}"] = mad("Ref", prev_x[lam].A, ax, None, None)
        out[f"MAD-Dis@{lam}"] = mad("Dis", None, None, prev_y[lam].A, ay)
    return out
