"""Per-video feature extraction: one shared transform per frame, all features from it."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .csf import CsfConfig
from .errors import PoolingError
from .features.auxiliary import blur_edge, delta_feature, mad_features
from .features.dlm import dlm_scale
from .features.info import SIGMA_N_SQ, info_features
from .features.ssim import K1, K2, scale_stats, ssim_family
from .media import FramePlanes, YuvReader, VideoSpec
from .stats import DEFAULT_WINDOW
from .transform import TransformConfig, unified_transform

CHANNEL_SETS = {"Y": ("Y",), "YCbCr": ("Y", "Cb", "Cr")}

FAMILIES = {
    "ssim": ("SSIM", "ESSIM", "MS-SSIM", "MS-ESSIM"),
    "info": ("VIF-A", "VIF-HV", "SRRED-A", "SRRED-HV", "TRRED-A", "TRRED-HV", "STRRED-A", "STRRED-HV"),
    "dlm": ("DLM-S",),
    "nr": ("dTL-SAI", "dTL-Blur"),
    "mad": ("MAD-Ref", "MAD-Dis", "MAD"),
    "sharp": ("Blur", "Edge"),
}
FAMILY_OF = {name: fam for fam, names in FAMILIES.items() for name in names}
LAGGED = frozenset({"TRRED-A", "TRRED-HV", "STRRED-A", "STRRED-HV", "MAD-Ref", "MAD-Dis"})

_ID_RE = re.compile(r"^(Y|Cb|Cr)-(.+)@(\d+)$")


def feature_id(channel: str, name: str, level: int) -> str:
    return f"{channel}-{name}@{level}"


def parse_feature_id(fid: str):
    m = _ID_RE.match(fid)
    if not m or m.group(2) not in FAMILY_OF:
        raise ValueError(f"malformed feature id {fid!r}")
    return m.group(1), m.group(2), int(m.group(3))


def is_lagged(fid: str) -> bool:
    return parse_feature_id(fid)[1] in LAGGED


def candidate_ids(levels: int, channels=("Y",), families=tuple(FAMILIES)) -> list:
    """Every feature id produced for the given levels/channels, in canonical order."""
    out = []
    for ch in channels:
        for fam in families:
            for name in FAMILIES[fam]:
                for lam in range(1, levels + 1):
                    out.append(feature_id(ch, name, lam))
    return out


def requirements(ids: Iterable[str]):
    """Channels and families needed to compute ``ids``."""
    channels, families = [], set()
    for fid in ids:
        ch, name, _ = parse_feature_id(fid)
        if ch not in channels:
            channels.append(ch)
        families.add(FAMILY_OF[name])
    order = ("Y", "Cb", "Cr")
    return tuple(c for c in order if c in channels), tuple(f for f in FAMILIES if f in families)


def pool_temporal(values, lagged: bool = False) -> float:
    """Arithmetic mean over valid frames; lagged features drop the first frame."""
    vals = list(values)[1:] if lagged else list(values)
    if not vals:
        raise PoolingError("no valid frames to pool (lagged feature on a single-frame video?)")
    return float(np.mean(vals))


@dataclass
class VideoFeatures:
    pooled: dict
    per_frame: list = field(default_factory=list)


class FeatureExtractor:
    """Computes per-frame features for a stream of (reference, distorted) frame pairs.

    The extractor keeps the previous frame's pyramids for the lagged features,
    so frames must be fed in display order. Call :meth:`reset` between videos.
    """

    def __init__(self, cfg: TransformConfig, channels=("Y",), families=tuple(FAMILIES),
                 csf_config: CsfConfig | None = None, window: int = DEFAULT_WINDOW,
                 sigma_n_sq: float = SIGMA_N_SQ, k1: float = K1, k2: float = K2):
        self.cfg = cfg
        self.channels = tuple(channels)
        self.families = tuple(families)
        self.csf_config = csf_config
        self.window = window
        self.sigma_n_sq = sigma_n_sq
        self.k1, self.k2 = k1, k2
        self._prev = {}

    def reset(self):
        self._prev = {}

    @property
    def ids(self) -> list:
        return candidate_ids(self.cfg.levels, self.channels, self.families)

    def frame(self, ref: FramePlanes, dis: FramePlanes) -> dict:
        out = {}
        levels = self.cfg.levels
        for ch in self.channels:
            px = unified_transform(ref.plane(ch), self.cfg, ch, self.csf_config)
            py = unified_transform(dis.plane(ch), self.cfg, ch, self.csf_config)
            prev_x, prev_y = self._prev.get(ch, (None, None))
            vals = {}
            if "ssim" in self.families:
                vals.update(ssim_family(scale_stats(px, py, levels), levels, self.k1, self.k2))
            if "info" in self.families:
                vals.update(info_features(px, py, prev_x, prev_y, levels, self.sigma_n_sq, self.window))
            for lam in range(1, levels + 1):
                if "dlm" in self.families:
                    vals[f"DLM-S@{lam}"] = dlm_scale(px, py, lam)
                if "nr" in self.families:
                    vals[f"dTL-SAI@{lam}"] = delta_feature("TL-SAI", px, py, lam)
                    vals[f"dTL-Blur@{lam}"] = delta_feature("TL-Blur", px, py, lam)
                if "mad" in self.families:
                    vals.update(mad_features(px, py, prev_x, prev_y, lam))
                if "sharp" in self.families:
                    vals[f"Blur@{lam}"], vals[f"Edge@{lam}"] = blur_edge(px, py, lam)
            self._prev[ch] = (px, py)
            for key, v in vals.items():
                name, lam = key.rsplit("@", 1)
                if FAMILY_OF[name] in self.families:
                    out[f"{ch}-{key}"] = v
        return out

    def video(self, ref_frames: Iterable[FramePlanes], dis_frames: Iterable[FramePlanes]) -> VideoFeatures:
        self.reset()
        per_frame = [self.frame(r, d) for r, d in zip(ref_frames, dis_frames)]
        if not per_frame:
            raise PoolingError("video has no frames")
        pooled = {}
        for fid in per_frame[0]:
            pooled[fid] = pool_temporal([f[fid] for f in per_frame], is_lagged(fid))
        for fid, v in pooled.items():
            if not math.isfinite(v):
                raise FloatingPointError(f"non-finite pooled value for {fid}")
        return VideoFeatures(pooled, per_frame)


def extract_video(ref_path, dis_path, spec: VideoSpec, cfg: TransformConfig, channels=("Y",),
                  families=tuple(FAMILIES), csf_config: CsfConfig | None = None, **kwargs) -> VideoFeatures:
    ext = FeatureExtractor(cfg, channels, families, csf_config, **kwargs)
    return ext.video(YuvReader(ref_path, spec), YuvReader(dis_path, spec))
