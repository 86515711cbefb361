"""SROCC, Fisher averaging, cross-database evaluation and constrained feature selection."""
from __future__ import annotations

import csv
import hashlib
import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .errors import FunqueError
from .fusion import RegressorConfig, predict_many, train

log = logging.getLogger(__name__)

FISHER_CLAMP = 1 - 1e-7


def srocc(pred, mos) -> float:
    """Spearman correlation with mean ranks for ties; constant input scores 0."""
    pred = np.asarray(pred, dtype=float)
    mos = np.asarray(mos, dtype=float)
    if pred.shape != mos.shape or pred.size < 3:
        raise ValueError("srocc needs two equal-length sequences of at least 3 values")
    rp, rm = rankdata(pred), rankdata(mos)
    rp -= rp.mean()
    rm -= rm.mean()
    den = math.sqrt(float((rp * rp).sum() * (rm * rm).sum()))
    if den == 0.0:
        log.debug("degenerate SROCC (constant ranks) scored as 0")
        return 0.0
    return float((rp * rm).sum() / den)


def fisher_mean(rs) -> float:
    rs = np.asarray(list(rs), dtype=float)
    if rs.size == 0:
        raise ValueError("fisher_mean of an empty list")
    if np.all(rs == rs[0]):
        # tanh(arctanh(r)) can be off by an ulp; equal inputs return exactly
        return float(rs[0])
    z =np.arctanh(np.clip(rs, -FISHER_CLAMP, FISHER_CLAMP))
    return float(np.tanh(z.mean()))


@dataclass
class Database:
    """Cached per-video features and MOS for one subjective database."""

    name: str
    features: dict  # feature id -> array over videos
    mos: np.ndarray
    videos: list = field(default_factory=list)

    def vectors(self, ids) -> list:
        return [{f: float(self.features[f][i]) for f in ids} for i in range(len(self.mos))]


@dataclass
class CrossDbResult:
    matrix: dict  # (train, test) -> srocc
    names: list
    failed: list = field(default_factory=list)

    @property
    def overall(self) -> float:
        return fisher_mean(self.matrix.values()) if self.matrix else float("nan")

    @property
    def complete(self) -> bool:
        return not self.failed

    def test_average(self, test: str) -> float:
        return fisher_mean(v for (tr, te), v in self.matrix.items() if te == test)

    def train_average(self, train_name: str) -> float:
        return fisher_mean(v for (tr, te), v in self.matrix.items() if tr == train_name)


def cross_db_srocc(feature_ids, databases, cfg: RegressorConfig | None = None) -> CrossDbResult:
    """Train on each database, test on every other one; never on the diagonal."""
    feature_ids = list(feature_ids)
    if len(databases) < 2:
        raise ValueError("cross-database evaluation needs at least two databases")
    matrix, failed = {}, []
    for tr in databases:
        try:
            model = train(tr.vectors(feature_ids), tr.mos, cfg, feature_ids)
        except FunqueError as exc:
            log.warning("training on %s failed: %s", tr.name, exc)
            failed.extend((tr.name, te.name) for te in databases if te is not tr)
            continue
        for te in databases:
            if te is tr:
                continue
            matrix[(tr.name, te.name)] = srocc(predict_many(model, te.vectors(feature_ids)), te.mos)
    return CrossDbResult(matrix, [d.name for d in databases], failed)


@dataclass(frozen=True)
class FeatureBucket:
    name: str
    groups: tuple  # tuple of tuples of feature ids


def feature_buckets(levels: int, channels=("Y",)) -> list:
    """The five bucket types at level L, one copy per channel.

    Groups that coincide (e.g. at L = 1) are listed once.
    """
    L = levels
    lv = range(1, L + 1)
    out = []
    for ch in channels:
        p = f"{ch}-"
        out.append(FeatureBucket(f"{p}SSIM", (
            (f"{p}SSIM@{L}",), (f"{p}ESSIM@{L}",), (f"{p}MS-SSIM@{L}",), (f"{p}MS-ESSIM@{L}",))))
        out.append(FeatureBucket(f"{p}Info", (
            (f"{p}VIF-HV@{L}",),
            tuple(f"{p}VIF-A@{k}" for k in lv),
            (f"{p}STRRED-HV@{L}",),
            (f"{p}SRRED-HV@{L}", f"{p}TRRED-HV@{L}"),
            tuple(f"{p}STRRED-A@{k}" for k in lv),
            tuple(f"{p}SRRED-A@{k}" for k in lv) + tuple(f"{p}TRRED-A@{k}" for k in lv),
        )))
        out.append(FeatureBucket(f"{p}DLM", ((f"{p}DLM-S@{L}",), tuple(f"{p}DLM-S@{k}" for k in lv))))
        out.append(FeatureBucket(f"{p}Sharpness", (
            (f"{p}Blur@{L}",), (f"{p}Edge@{L}",), (f"{p}Blur@{L}", f"{p}Edge@{L}"),
            (f"{p}dTL-SAI@{L}",), (f"{p}dTL-Blur@{L}",))))
        out.append(FeatureBucket(f"{p}MAD", ((f"{p}MAD-Ref@{L}",), (f"{p}MAD-Dis@{L}",), (f"{p}MAD@{L}",))))
    return [FeatureBucket(b.name, tuple(dict.fromkeys(b.groups))) for b in out]


@dataclass
class SelectionResult:
    groups: list  # (bucket name, group) in selection order
    score: float
    audit: list  # dicts: pass, bucket, group, srocc, improved
    passes: int

    @property
    def features(self) -> list:
        return [f for _, g in self.groups for f in g]


def _ordered_union(base, group):
    out = list(base)
    out.extend(f for f in group if f not in out)
    return out


def cgfs(buckets, databases, cfg: RegressorConfig | None = None) -> SelectionResult:
    """Constrained greedy forward selection: at most one group per bucket.

    Each pass scans every group of every still-available bucket and keeps the
    candidate whose cross-database SROCC strictly beats the best so far; ties go
    to the earlier-scanned group.
    """
    selected, chosen = [], []
    available = list(buckets)
    best = -1.0
    audit = []
    passes = 0
    while available:
        passes += 1
        best_set, best_bucket, best_group = None, None, None
        for bucket in available:
            for group in bucket.groups:
                cand = _ordered_union(selected, group)
                score = cross_db_srocc(cand, databases, cfg).overall
                improved = score > best
                audit.append({"pass": passes, "bucket": bucket.name, "group": list(group),
                              "srocc": score, "improved": improved})
                if improved:
                    best = score
                    best_set, best_bucket, best_group = cand, bucket, group
        if best_set is None:
            break
        selected = best_set
        chosen.append((best_bucket.name, tuple(best_group)))
        available = [b for b in available if b is not best_bucket]
    return SelectionResult(chosen, best, audit, passes)


def cefs(buckets, databases, cfg: RegressorConfig | None = None) -> SelectionResult:
    """Constrained exhaustive search over every admissible set (tiny instances only)."""
    options = [[None, *b.groups] for b in buckets]
    best, best_groups, audit = -math.inf, [], []
    for combo in itertools.product(*options):
        groups = [(b.name, g) for b, g in zip(buckets, combo) if g is not None]
        if not groups:
            continue
        ids = []
        for _, g in groups:
            ids = _ordered_union(ids, g)
        score = cross_db_srocc(ids, databases, cfg).overall
        audit.append({"groups": [list(g) for _, g in groups], "srocc": score})
        if score > best:
            best, best_groups = score, groups
    return SelectionResult(best_groups, best, audit, 1)


# --- feature cache -----------------------------------------------------------

CACHE_FIXED_COLUMNS = ("ref_path", "dis_path", "mos", "error")


def write_feature_cache(path, rows, feature_ids, meta: dict) -> None:
    """Write one CSV row per video plus a ``.meta.json`` sidecar.

    ``rows`` holds dicts with ``ref_path``, ``dis_path``, ``mos``, ``error``
    (empty on success) and ``features`` (id -> value, may be empty on error).
    """
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*CACHE_FIXED_COLUMNS, *feature_ids])
        for r in rows:
            feats = r.get("features") or {}
            w.writerow([r["ref_path"], r["dis_path"], repr(float(r["mos"])), r.get("error", ""),
                        *(repr(float(feats[f])) if f in feats else "" for f in feature_ids)])
    sidecar(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def sidecar(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def read_feature_cache(path, name: str | None = None) -> Database:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        ids = [c for c in reader.fieldnames if c not in CACHE_FIXED_COLUMNS]
        recs = [r for r in reader if not r.get("error")]
    features = {f: np.array([float(r[f]) for r in recs]) for f in ids}
    mos = np.array([float(r["mos"]) for r in recs])
    return Database(name or path.stem, features, mos, [r["dis_path"] for r in recs])


def read_cache_meta(path) -> dict:
    p = sidecar(path)
    return json.loads(p.read_text()) if p.is_file() else {}


def content_key(files, config: dict) -> str:
    """SHA-256 over the bytes of every input file and the canonical config JSON."""
    h = hashlib.sha256()
    h.update(json.dumps(config, sort_keys=True).encode())
    for f in files:
        with open(f, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                h.update(chunk)
    return h.hexdigest()
