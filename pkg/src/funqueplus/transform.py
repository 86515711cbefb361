"""The shared transform: optional SAST downscale, CSF, L-level Haar DWT."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.ndimage import correlate1d

from .csf import (DEFAULT_DH_RATIO, CsfConfig, CsfKind, SpatialFilter, SubbandWeights, build_csf,
                  default_config, method_kind)
from .errors import ConfigError, InputTooSmallError

MAX_LEVELS = 4


@dataclass(frozen=True)
class TransformConfig:
    levels: int = 2
    csf: str | None = None
    use_sast: bool = False
    dh_ratio: float = DEFAULT_DH_RATIO

    def __post_init__(self):
        if not 1 <= self.levels <= MAX_LEVELS:
            raise ConfigError(f"levels must be in 1..{MAX_LEVELS}, got {self.levels}")
        if self.csf is not None:
            method_kind(self.csf)
        if self.dh_ratio <= 0:
            raise ConfigError("dh_ratio must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TransformConfig":
        return cls(levels=int(d["levels"]), csf=d.get("csf"), use_sast=bool(d.get("use_sast", d.get("sast"))),
                   dh_ratio=float(d.get("dh_ratio", DEFAULT_DH_RATIO)))


class Subbands(NamedTuple):
    A: np.ndarray
    H: np.ndarray
    V: np.ndarray
    D: np.ndarray


class WaveletPyramid:
    """Subbands for levels 1..L; ``pyr[level]`` returns a :class:`Subbands`."""

    def __init__(self, levels):
        self._levels = tuple(levels)

    def __getitem__(self, level: int) -> Subbands:
        if level < 1:
            raise IndexError("levels are 1-based")
        return self._levels[level - 1]

    def __len__(self) -> int:
        return len(self._levels)

    @property
    def levels(self) -> int:
        return len(self._levels)

    def band(self, level: int, name: str) -> np.ndarray:
        return getattr(self[level], name)


def sast_factor(dh_ratio: float) -> int:
    return max(1, int(round(dh_ratio / 1.618)))


def sast_downscale(plane: np.ndarray, factor: int) -> np.ndarray:
    """Average disjoint ``factor`` x ``factor`` blocks, cropping any remainder."""
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if factor == 1:
        return plane
    h, w = plane.shape
    h2, w2 = h // factor, w // factor
    blocks = plane[:h2 * factor, :w2 * factor].reshape(h2, factor, w2, factor)
    return blocks.mean(axis=(1, 3))


def haar_dwt(plane: np.ndarray) -> Subbands:
    """One level of the orthonormal 2x2 block Haar transform."""
    h, w = plane.shape
    if h % 2 or w % 2:
        raise ValueError(f"haar_dwt needs even dimensions, got {h}x{w}")
    a = plane[0::2, 0::2]
    b = plane[0::2, 1::2]
    c = plane[1::2, 0::2]
    d = plane[1::2, 1::2]
    return Subbands(
        0.5 * (a + b + c + d),
        0.5 * (a - b + c - d),
        0.5 * (a + b - c - d),
        0.5 * (a - b - c + d),
    )


def haar_pyramid(plane: np.ndarray, levels: int) -> WaveletPyramid:
    out = []
    approx = plane
    for _ in range(levels):
        bands = haar_dwt(approx)
        out.append(bands)
        approx = bands.A
    return WaveletPyramid(out)


def crop_to_multiple(plane: np.ndarray, levels: int) -> np.ndarray:
    m = 2 ** levels
    h, w = plane.shape
    if h < m or w < m:
        raise InputTooSmallError(f"plane {h}x{w} is smaller than 2^{levels} = {m}")
    return plane[:h - h % m, :w - w % m]


def apply_spatial_filter(plane: np.ndarray, filt: SpatialFilter) -> np.ndarray:
    """Separable 2-D filtering with symmetric (half-sample) boundary extension."""
    out = correlate1d(plane, filt.taps, axis=0, mode="reflect")
    return correlate1d(out, filt.taps, axis=1, mode="reflect")


def apply_subband_weights(pyr: WaveletPyramid, weights: SubbandWeights) -> WaveletPyramid:
    out = []
    for level in range(1, pyr.levels + 1):
        bands = pyr[level]
        out.append(Subbands(*(getattr(bands, name) * weights.get(level, name) for name in Subbands._fields)))
    return WaveletPyramid(out)


@lru_cache(maxsize=64)
def _cached_csf(method, channel, levels, dh_ratio, config_id):
    return build_csf(method, channel, levels, dh_ratio, _CONFIGS[config_id])


_CONFIGS: dict = {}


def resolve_csf(cfg: TransformConfig, channel: str, csf_config: CsfConfig | None = None):
    if cfg.csf is None:
        return None
    csf_config = csf_config or default_config()
    _CONFIGS[id(csf_config)] = csf_config
    return _cached_csf(cfg.csf, channel, cfg.levels, cfg.dh_ratio, id(csf_config))


def unified_transform(plane: np.ndarray, cfg: TransformConfig, channel: str = "Y",
                      csf_config: CsfConfig | None = None) -> WaveletPyramid:
    """SAST (optional) -> crop -> spatial CSF or Haar + subband weights."""
    plane = np.asarray(plane, dtype=np.float64)
    if cfg.use_sast:
        plane = sast_downscale(plane, sast_factor(cfg.dh_ratio))
    plane = crop_to_multiple(plane, cfg.levels)
    csf = resolve_csf(cfg, channel, csf_config)
    if csf is not None and method_kind(cfg.csf) is CsfKind.SPATIAL_FILTER:
        plane = apply_spatial_filter(plane, csf)
    pyr = haar_pyramid(plane, cfg.levels)
    if csf is not None and method_kind(cfg.csf) is CsfKind.SUBBAND_WEIGHTS:
        pyr = apply_subband_weights(pyr, csf)
    return pyr
