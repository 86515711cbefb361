"""Information-theoretic features on wavelet subbands: VIF and ST-RRED variants.

All local statistics use uniform k x k windows computed with integral images.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..stats import DEFAULT_WINDOW, LocalStats, local_mean_var, local_stats
from ..transform import WaveletPyramid

SIGMA_N_SQ = 2.0
GAIN_EPS = 1e-10
LOG_2PI_E = np.log(2 * np.pi * np.e)
HV = ("H", "V")


@dataclass(frozen=True)
class GsmChannel:
    g: np.ndarray
    sigma_v_sq: np.ndarray
    sigma_n_sq: float


def _window(band: np.ndarray, k: int) -> int:
    return min(k, *band.shape)


def fit_gsm_channel(stats: LocalStats, sigma_n_sq: float = SIGMA_N_SQ, eps: float = GAIN_EPS) -> GsmChannel:
    informative = stats.var_x >= eps
    g = np.where(informative, stats.cov_xy / np.where(informative, stats.var_x, 1.0), 0.0)
    sv = np.maximum(stats.var_y - g * stats.cov_xy, 0.0)
    return GsmChannel(g, sv, sigma_n_sq)


def vif_terms(x: np.ndarray, y: np.ndarray, k: int = DEFAULT_WINDOW, sigma_n_sq: float = SIGMA_N_SQ):
    """Numerator and denominator sums of the VIF ratio for one subband pair."""
    st = local_stats(x, y, _window(x, k))
    ch = fit_gsm_channel(st, sigma_n_sq)
    num = np.log1p(ch.g * ch.g * st.var_x / (ch.sigma_v_sq + sigma_n_sq)).sum()
    den = np.log1p(st.var_x / sigma_n_sq).sum()
    return float(num), float(den)


def _ratio(num: float, den: float) -> float:
    return 1.0 if den == 0.0 else num / den


def vif_a(pyr_x: WaveletPyramid, pyr_y: WaveletPyramid, level: int,
          sigma_n_sq: float = SIGMA_N_SQ, k: int = DEFAULT_WINDOW) -> float:
    return _ratio(*vif_terms(pyr_x[level].A, pyr_y[level].A, k, sigma_n_sq))


def vif_hv(pyr_x: WaveletPyramid, pyr_y: WaveletPyramid, levels: int,
           sigma_n_sq: float = SIGMA_N_SQ, k: int = DEFAULT_WINDOW) -> float:
    num = den = 0.0
    for lam in range(1, levels + 1):
        for band in HV:
            n, d = vif_terms(pyr_x.band(lam, band), pyr_y.band(lam, band), k, sigma_n_sq)
            num += n
            den += d
    return _ratio(num, den)


def spatial_entropy(var: np.ndarray, sigma_n_sq: float = SIGMA_N_SQ) -> np.ndarray:
    """Information-weighted local entropy log(1+s2) * log(2 pi e (s2 + sn2))."""
    return np.log1p(var) * (LOG_2PI_E + np.log(var + sigma_n_sq))


def temporal_entropy(var: np.ndarray, diff_var: np.ndarray, sigma_n_sq: float = SIGMA_N_SQ) -> np.ndarray:
    return np.log1p(var) * np.log1p(diff_var) * (LOG_2PI_E + np.log(diff_var + sigma_n_sq))


def _variant_bands(variant: str, level: int):
    """('A', lam) -> [(lam, 'A')]; ('HV', L) -> H and V at every level up to L."""
    if variant == "A":
        return [(level, "A")]
    if variant == "HV":
        return [(lam, b) for lam in range(1, level + 1) for b in HV]
    raise ValueError(f"variant must be 'A' or 'HV', got {variant!r}")


def _mean_abs_diff(pairs) -> float:
    total = 0.0
    count = 0
    for hx, hy in pairs:
        total += float(np.abs(hx - hy).sum())
        count += hx.size
    return total / count


def srred(pyr_x: WaveletPyramid, pyr_y: WaveletPyramid, variant: str, level: int,
          sigma_n_sq: float = SIGMA_N_SQ, k: int = DEFAULT_WINDOW) -> float:
    pairs = []
    for lam, band in _variant_bands(variant, level):
        x, y = pyr_x.band(lam, band), pyr_y.band(lam, band)
        kk = _window(x, k)
        pairs.append((spatial_entropy(local_mean_var(x, kk)[1], sigma_n_sq),
                       spatial_entropy(local_mean_var(y, kk)[1], sigma_n_sq)))
    return _mean_abs_diff(pairs)


def trred(prev_pyr_x: WaveletPyramid, pyr_x: WaveletPyramid, prev_pyr_y: WaveletPyramid,
          pyr_y: WaveletPyramid, variant: str, level: int,
          sigma_n_sq: float = SIGMA_N_SQ, k: int = DEFAULT_WINDOW) -> float:
    pairs = []
    for lam, band in _variant_bands(variant, level):
        maps = []
        for prev, cur in ((prev_pyr_x, pyr_x), (prev_pyr_y, pyr_y)):
            c = cur.band(lam, band)
            kk = _window(c, k)
            var = local_mean_var(c, kk)[1]
            dvar = local_mean_var(c - prev.band(lam, band), kk)[1]
            maps.append(temporal_entropy(var, dvar, sigma_n_sq))
        pairs.append(tuple(maps))
    return _mean_abs_diff(pairs)


def strred(srred_value: float, trred_value: float) -> float:
    return srred_value * trred_value


def info_features(pyr_x, pyr_y, prev_x=None, prev_y=None, levels: int | None = None,
                  sigma_n_sq: float = SIGMA_N_SQ, k: int = DEFAULT_WINDOW) -> dict:
    """Per-frame VIF/RRED values for every level, sharing local statistics.

    Temporal (TRRED/STRRED) entries are NaN when no previous frame is given.
    """
    levels = levels or pyr_x.levels
    temporal = prev_x is not None and prev_y is not None
    cache = {}
    for lam in range(1, levels + 1):
        for band in ("A", "H", "V"):
            x, y = pyr_x.band(lam, band), pyr_y.band(lam, band)
            kk = _window(x, k)
            st = local_stats(x, y, kk)
            ch = fit_gsm_channel(st, sigma_n_sq)
            num = float(np.log1p(ch.g * ch.g * st.var_x / (ch.sigma_v_sq + sigma_n_sq)).sum())
            den = float(np.log1p(st.var_x / sigma_n_sq).sum())
            sx = spatial_entropy(st.var_x, sigma_n_sq)
            sy = spatial_entropy(st.var_y, sigma_n_sq)
            s_sum = float(np.abs(sx - sy).sum())
            t_sum = np.nan
            if temporal:
                dvx = local_mean_var(x - prev_x.band(lam, band), kk)[1]
                dvy = local_mean_var(y - prev_y.band(lam, band), kk)[1]
                gx = temporal_entropy(st.var_x, dvx, sigma_n_sq)
                gy = temporal_entropy(st.var_y, dvy, sigma_n_sq)
                t_sum = float(np.abs(gx - gy).sum())
            cache[(lam, band)] = (num, den, s_sum, t_sum, sx.size)

    out = {}
    hv = np.zeros(5)
    for lam in range(1, levels + 1):
        num, den, s_sum, t_sum, n = cache[(lam, "A")]
        out[f"VIF-A@{lam}"] = _ratio(num, den)
        out[f"SRRED-A@{lam}"] = s_sum / n
        out[f"TRRED-A@{lam}"] = t_sum / n
        out[f"STRRED-A@{lam}"] = (s_sum / n) * (t_sum / n)
        for band in HV:
            hv += np.asarray(cache[(lam, band)])
        num, den, s_sum, t_sum, n = hv
        out[f"VIF-HV@{lam}"] = _ratio(num, den)
        out[f"SRRED-HV@{lam}"] = s_sum / n
        out[f"TRRED-HV@{lam}"] = t_sum / n
        out[f"STRRED-HV@{lam}"] = (s_sum / n) * (t_sum / n)
    return out
