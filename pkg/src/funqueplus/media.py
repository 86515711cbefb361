"""Raw planar YUV 4:2:0 decoding and dataset manifests.

Samples are normalized to a shared [0, 255] scale: 8-bit values are used as-is
and 10-bit values are divided by 4.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import DecodeError, ManifestError, SampleRangeError

MANIFEST_COLUMNS = ("ref_path", "dis_path", "width", "height", "bit_depth", "mos")


@dataclass(frozen=True)
class VideoSpec:
    width: int
    height: int
    bit_depth: int = 8
    frame_count: int = 1
    chroma_format: str = "420"

    def __post_init__(self):
        if self.chroma_format not in ("420", "4:2:0"):
            raise ValueError(f"unsupported chroma format {self.chroma_format!r}; only 4:2:0 planar")
        if self.bit_depth not in (8, 10):
            raise ValueError(f"bit depth must be 8 or 10, got {self.bit_depth}")
        if self.width <= 0 or self.height <= 0 or self.width % 2 or self.height % 2:
            raise ValueError(f"frame dimensions must be positive and even, got {self.width}x{self.height}")
        if self.frame_count < 1:
            raise ValueError("frame_count must be >= 1")

    @property
    def bytes_per_sample(self) -> int:
        return 1 if self.bit_depth == 8 else 2

    @property
    def frame_size(self) -> int:
        luma = self.width * self.height
        return (luma + 2 * (luma // 4)) * self.bytes_per_sample

    @classmethod
    def from_file(cls, path, width: int, height: int, bit_depth: int = 8) -> "VideoSpec":
        """Infer the frame count of a raw file from its byte length."""
        probe = cls(width, height, bit_depth)
        size = os.path.getsize(path)
        count, rem = divmod(size, probe.frame_size)
        if count < 1 or rem:
            raise DecodeError(
                f"{path}: size {size} is not a positive multiple of frame size {probe.frame_size}",
                offset=count * probe.frame_size,
            )
        return cls(width, height, bit_depth, count)


@dataclass(frozen=True)
class FramePlanes:
    y: np.ndarray
    cb: np.ndarray
    cr: np.ndarray

    def plane(self, channel: str) -> np.ndarray:
        return {"Y": self.y, "Cb": self.cb, "Cr": self.cr}[channel]

    def map(self, fn) -> "FramePlanes":
        return FramePlanes(fn(self.y), fn(self.cb), fn(self.cr))


def _decode_plane(buf: bytes, spec: VideoSpec, shape, offset: int) -> np.ndarray:
    dtype = np.uint8 if spec.bit_depth == 8 else np.dtype("<u2")
    raw = np.frombuffer(buf, dtype=dtype).reshape(shape)
    if spec.bit_depth == 8:
        return raw.astype(np.float64)
    if raw.size and raw.max() > 1023:
        bad = int(np.argmax(raw.ravel() > 1023))
        raise SampleRangeError(f"10-bit sample {int(raw.ravel()[bad])} exceeds 1023",
                               offset=offset + 2 * bad)
    return raw.astype(np.float64) / 4.0


def read_frame(file, spec: VideoSpec, index: int) -> FramePlanes:
    """Decode frame ``index`` from a raw planar 4:2:0 file.

    ``file`` may be a path or an open binary file object; the read is a pure
    seek-and-read so frames can be decoded in any order.
    """
    if not 0 <= index < spec.frame_count:
        raise IndexError(f"frame index {index} out of range [0, {spec.frame_count})")
    offset = index * spec.frame_size
    if hasattr(file, "read"):
        file.seek(offset)
        buf = file.read(spec.frame_size)
    else:
        with open(file, "rb") as fh:
            fh.seek(offset)
            buf = fh.read(spec.frame_size)
    if len(buf) != spec.frame_size:
        raise DecodeError(f"truncated frame {index}: expected {spec.frame_size} bytes, got {len(buf)}",
                          offset=offset + len(buf))
    bps = spec.bytes_per_sample
    h, w = spec.height, spec.width
    n_y = h * w * bps
    n_c = (h // 2) * (w // 2) * bps
    y = _decode_plane(buf[:n_y], spec, (h, w), offset)
    cb = _decode_plane(buf[n_y:n_y + n_c], spec, (h // 2, w // 2), offset + n_y)
    cr = _decode_plane(buf[n_y + n_c:], spec, (h // 2, w // 2), offset + n_y + n_c)
    return FramePlanes(y, cb, cr)


class YuvReader:
    """Immutable reader over a raw YUV file; frames are streamed one at a time."""

    def __init__(self, path, spec: VideoSpec):
        self.path = Path(path)
        self.spec = spec

    @classmethod
    def open(cls, path, width: int, height: int, bit_depth: int = 8) -> "YuvReader":
        return cls(path, VideoSpec.from_file(path, width, height, bit_depth))

    def __len__(self) -> int:
        return self.spec.frame_count

    def read(self, index: int) -> FramePlanes:
        return read_frame(self.path, self.spec, index)

    def __iter__(self) -> Iterator[FramePlanes]:
        with open(self.path, "rb") as fh:
            for i in range(self.spec.frame_count):
                yield read_frame(fh, self.spec, i)


def encode_frame(frame: FramePlanes, bit_depth: int = 8) -> bytes:
    """Inverse of the decode normalization (values are rounded to the storage grid)."""
    out = []
    for plane in (frame.y, frame.cb, frame.cr):
        if bit_depth == 8:
            out.append(np.clip(np.rint(plane), 0, 255).astype(np.uint8).tobytes())
        else:
            out.append(np.clip(np.rint(plane * 4.0), 0, 1023).astype("<u2").tobytes())
    return b"".join(out)


def write_video(path, frames, bit_depth: int = 8) -> None:
    with open(path, "wb") as fh:
        for frame in frames:
            fh.write(encode_frame(frame, bit_depth))


@dataclass(frozen=True)
class ManifestRow:
    ref_path: Path
    dis_path: Path
    spec: VideoSpec
    mos: float


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    rows: tuple


def load_manifest(path) -> DatasetManifest:
    """Parse a ``ref_path,dis_path,width,height,bit_depth,mos`` CSV.

    Relative video paths resolve against the manifest's directory. Lines whose
    first non-blank character is ``#`` are ignored.
    """
    path = Path(path)
    base = path.parent
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.DictReader(lines)
    missing = [c for c in MANIFEST_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise ManifestError(f"missing column(s) {', '.join(missing)}", row=0)
    rows = []
    for i, rec in enumerate(reader, start=1):
        try:
            mos = float(rec["mos"])
        except (TypeError, ValueError):
            raise ManifestError(f"non-numeric mos {rec['mos']!r}", row=i) from None
        if not math.isfinite(mos):
            raise ManifestError(f"non-finite mos {rec['mos']!r}", row=i)
        try:
            width, height, depth = int(rec["width"]), int(rec["height"]), int(rec["bit_depth"])
        except (TypeError, ValueError):
            raise ManifestError("width/height/bit_depth must be integers", row=i) from None
        ref = base / rec["ref_path"].strip()
        dis = base / rec["dis_path"].strip()
        for p in (ref, dis):
            if not p.is_file():
                raise ManifestError(f"no such file {p}", row=i)
        try:
            spec = VideoSpec.from_file(ref, width, height, depth)
            dis_spec = VideoSpec.from_file(dis, width, height, depth)
        except (ValueError, DecodeError) as exc:
            raise ManifestError(str(exc), row=i) from None
        if dis_spec != spec:
            raise ManifestError(
                f"ref has {spec.frame_count} frames but dis has {dis_spec.frame_count}", row=i)
        rows.append(ManifestRow(ref, dis, spec, mos))
    return DatasetManifest(path.stem, tuple(rows))
