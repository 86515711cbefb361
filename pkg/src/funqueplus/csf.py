"""Contrast sensitivity functions as spatial prefilters or subband weights.

Seven methods are available. ``NganSpat`` and ``NadenauSpat`` are pixel-domain
filters applied before the wavelet transform; the ``*SW`` methods are
multiplicative weights on wavelet subbands applied after it.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError

CHANNELS = ("Y", "Cb", "Cr")
DETAIL_BANDS = ("H", "V", "D")
SUBBANDS = ("A", "H", "V", "D")
DEFAULT_DH_RATIO = 3.0
TAIL_FRACTION = 0.05
NGAN_SPAT_TAPS = 21


class CsfKind(Enum):
    SPATIAL_FILTER = "SpatialFilter"
    SUBBAND_WEIGHTS = "SubbandWeights"


# name -> (kind, color aware)
METHODS = {
    "NganSpat": (CsfKind.SPATIAL_FILTER, False),
    "LiSW": (CsfKind.SUBBAND_WEIGHTS, False),
    "NadenauSpat": (CsfKind.SPATIAL_FILTER, True),
    "NadenauSW": (CsfKind.SUBBAND_WEIGHTS, True),
    "LarsonSW": (CsfKind.SUBBAND_WEIGHTS, False),
    "WatsonSW": (CsfKind.SUBBAND_WEIGHTS, True),
    "HillSW": (CsfKind.SUBBAND_WEIGHTS, False),
}


def method_kind(name: str) -> CsfKind:
    try:
        return METHODS[name][0]
    except KeyError:
        raise ConfigError(f"unknown CSF method {name!r}; expected one of {sorted(METHODS)}") from None


def effective_channel(method: str, channel: str) -> str:
    """Color-unaware methods use the luma response for every channel."""
    if channel not in CHANNELS:
        raise ConfigError(f"unknown channel {channel!r}")
    return channel if METHODS[method][1] else "Y"


@dataclass(frozen=True)
class SpatialFilter:
    taps: np.ndarray
    sample_step_deg: float

    def __len__(self):
        return len(self.taps)


@dataclass(frozen=True)
class SubbandWeights:
    w: dict

    @property
    def levels(self) -> int:
        return max(level for level, _ in self.w)

    def get(self, level: int, band: str) -> float:
        return self.w[(level, band)]


@dataclass
class CsfConfig:
    """Parameters loaded from the bundled (or user-supplied) weight file."""

    nadenau: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    source: str = "<memory>"


def load_csf_config(path=None) -> CsfConfig:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    if path is None:
        text = resources.files("funqueplus").joinpath("data/csf_weights.ini").read_text()
        source = "<bundled>"
    else:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"CSF config {path} not found")
        text = path.read_text()
        source = str(path)
    parser.read_string(text, source=source)
    cfg = CsfConfig(source=source)
    if parser.has_section("nadenau"):
        for ch, val in parser.items("nadenau"):
            try:
                b, c = (float(v) for v in val.split(","))
            except ValueError:
                raise ConfigError(f"{source}: bad nadenau entry {ch} = {val!r}") from None
            cfg.nadenau[ch] = (b, c)
    for section in parser.sections():
        if "." not in section:
            continue
        method, ch = section.split(".", 1)
        table = {}
        for key, val in parser.items(section):
            level, band = key.split(".")
            table[(int(level), band)] = float(val)
        cfg.tables[(method, ch)] = table
    return cfg


_DEFAULT_CONFIG = None


def default_config() -> CsfConfig:
    global _DEFAULT_CONFIG
    if _DEFAULT_CONFIG is None:
        _DEFAULT_CONFIG = load_csf_config()
    return _DEFAULT_CONFIG


def pixel_angle(dh_ratio: float = DEFAULT_DH_RATIO) -> float:
    """Visual angle (degrees) subtended by one pixel of a 1080-line display."""
    return (180.0 / math.pi) / (dh_ratio * 1080.0)


def ngan_csf(f):
    return (0.31 + 0.69 * np.asarray(f, dtype=float)) * np.exp(-0.29 * np.asarray(f, dtype=float))


def ngan_spat(theta):
    """Closed-form inverse Fourier transform of the Ngan CSF (theta in degrees)."""
    t2 = np.asarray(theta, dtype=float) ** 2
    return 2.0 * (0.0656 - 23.6910 * t2) / (0.0841 + 39.4784 * t2) ** 2


def truncate_symmetric(half: np.ndarray, tail: float = TAIL_FRACTION) -> np.ndarray:
    """Shortest odd-length symmetric filter whose discarded taps are all below ``tail`` of the peak.

    ``half`` holds the one-sided response h[0], h[1], ...; a zero crossing
    does not end the filter while a later lobe still exceeds the threshold.
    """
    half = np.asarray(half, dtype=float)
    big = np.nonzero(np.abs(half) >= tail * np.max(np.abs(half)))[0]
    n = int(big[-1]) + 1
    if n >= len(half):
        raise ValueError("response never falls below the tail threshold")
    return np.concatenate([half[n:0:-1], half[:n + 1]])


def ngan_spatial_filter(dh_ratio: float = DEFAULT_DH_RATIO, num_taps: int | None = NGAN_SPAT_TAPS) -> SpatialFilter:
    """Sampled NganSpat filter.

    The default length is the published 21 taps; ``num_taps=None`` applies the
    5% tail rule instead (19 taps at D/H = 3).
    """
    step = pixel_angle(dh_ratio)
    if num_taps is None:
        half = step * ngan_spat(np.arange(4096) * step)
        taps = truncate_symmetric(half)
    else:
        if num_taps % 2 == 0:
            raise ValueError("num_taps must be odd")
        n = np.arange(num_taps) - num_taps // 2
        taps = step * ngan_spat(n * step)
    return SpatialFilter(taps, step)


def nominal_frequency(level: int, band: str, dh_ratio: float = DEFAULT_DH_RATIO) -> float:
    if level < 1:
        raise ValueError("level must be >= 1")
    p = -1.0 if band == "D" else 1.0
    return 1080.0 * math.pi * dh_ratio / (2 ** level * 180.0 * (0.15 * p + 0.85))


def _closed_form_weights(levels: int, dh_ratio: float, csf) -> SubbandWeights:
    if levels < 1:
        raise ValueError("levels must be >= 1")
    w = {}
    for level in range(1, levels + 1):
        w[(level, "A")] = 1.0
        for band in DETAIL_BANDS:
            w[(level, band)] = float(csf(nominal_frequency(level, band, dh_ratio)))
    return SubbandWeights(w)


def li_subband_weights(levels: int, dh_ratio: float = DEFAULT_DH_RATIO) -> SubbandWeights:
    return _closed_form_weights(levels, dh_ratio, ngan_csf)


def _nadenau_params(channel: str, config: CsfConfig | None):
    config = config or default_config()
    try:
        return config.nadenau[channel]
    except KeyError:
        raise ConfigError(f"no Nadenau (b, c) parameters for channel {channel!r} in {config.source}") from None


def nadenau_csf(f, channel: str = "Y", config: CsfConfig | None = None):
    b, c = _nadenau_params(channel, config)
    f = np.asarray(f, dtype=float)
    return (1.0 + 255.0 * np.exp(-b * f ** c)) / 256.0


def nadenau_spatial_filter(channel: str = "Y", dh_ratio: float = DEFAULT_DH_RATIO,
                           config: CsfConfig | None = None, grid: int = 1024) -> SpatialFilter:
    """Numerical inverse of the Nadenau CSF via a real inverse DFT.

    The response is sampled at ``grid`` points on [0, Nyquist] where Nyquist is
    half a cycle per pixel. Taps are rescaled after truncation so the filter
    keeps unit gain at DC.
    """
    step = pixel_angle(dh_ratio)
    freqs = np.linspace(0.0, 0.5 / step, grid)
    response = nadenau_csf(freqs, channel, config)
    impulse = np.fft.irfft(response, n=2 * (grid - 1))
    # irfft output is even: h[n] == h[-n]
    taps = truncate_symmetric(impulse[:grid])
    # truncation drops DC gain; restore response(0) == 1
    return SpatialFilter(taps * (response[0] / taps.sum()), step)


def nadenau_subband_weights(levels: int, channel: str = "Y", dh_ratio: float = DEFAULT_DH_RATIO,
                            config: CsfConfig | None = None) -> SubbandWeights:
    _nadenau_params(channel, config)
    return _closed_form_weights(levels, dh_ratio, lambda f: nadenau_csf(f, channel, config))


def larson_csf(fr, phi: float = 0.0):
    """Larson CSF. Unity-scale plateau of 0.981 below 4 cycles/degree."""
    fr = np.asarray(fr, dtype=float)
    f_phi = fr / (0.15 * math.cos(4.0 * phi) + 0.85)
    high = (0.0499 + 0.5928 * f_phi) * np.exp(-(0.228 * f_phi) ** 1.1)
    return np.where(fr < 4.0, 0.981, high)


def larson_subband_weights(levels: int, dh_ratio: float = DEFAULT_DH_RATIO) -> SubbandWeights:
    return _closed_form_weights(levels, dh_ratio, lambda f: larson_csf(f, 0.0))


def table_subband_weights(method: str, channel: str, levels: int,
                          config: CsfConfig | None = None) -> SubbandWeights:
    config = config or default_config()
    table = config.tables.get((method, channel))
    if table is None:
        raise ConfigError(f"no {method} weight table for channel {channel} in {config.source}")
    w = {}
    for level in range(1, levels + 1):
        for band in SUBBANDS:
            if (level, band) not in table:
                raise ConfigError(f"{method} table for {channel} has no entry for level {level}, band {band}")
            w[(level, band)] = table[(level, band)]
    return SubbandWeights(w)


def build_csf(method: str, channel: str, levels: int, dh_ratio: float = DEFAULT_DH_RATIO,
              config: CsfConfig | None = None):
    """Instantiate ``method`` for one channel as a SpatialFilter or SubbandWeights."""
    method_kind(method)
    ch = effective_channel(method, channel)
    if method == "NganSpat":
        return ngan_spatial_filter(dh_ratio)
    if method == "NadenauSpat":
        return nadenau_spatial_filter(ch, dh_ratio, config)
    if method == "LiSW":
        return li_subband_weights(levels, dh_ratio)
    if method == "NadenauSW":
        return nadenau_subband_weights(levels, ch, dh_ratio, config)
    if method == "LarsonSW":
        return larson_subband_weights(levels, dh_ratio)
    return table_subband_weights(method, ch, levels, config)
