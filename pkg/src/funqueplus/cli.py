"""Command-line entry point: extract, score, train, select, eval and mono."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .csf import METHODS, load_csf_config
from .distortions import DISTORTIONS, distort_video
from .errors import ConfigError, FunqueError
from .evaluation import (Database, content_key, cgfs, cross_db_srocc, feature_buckets, read_cache_meta,
                         read_feature_cache, srocc, write_feature_cache)
from .extract import CHANNEL_SETS, FAMILIES, FeatureExtractor, candidate_ids, requirements
from .fusion import PRESETS, RegressorConfig, load_model, predict, predict_many, save_model, train
from .media import VideoSpec, YuvReader, load_manifest
from .transform import TransformConfig

log = logging.getLogger("funqueplus")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --- shared helpers -----------------------------------------------------------

def _add_transform_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("transform")
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--csf", choices=[*sorted(METHODS), "none"])
    g.add_argument("--levels", type=int)
    g.add_argument("--sast", dest="sast", action="store_true", default=None)
    g.add_argument("--no-sast", dest="sast", action="store_false")
    g.add_argument("--dh-ratio", type=float)
    g.add_argument("--channels", choices=sorted(CHANNEL_SETS))


def _add_config_flag(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="CSF weight file (defaults to the bundled one)")


def _add_regressor_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("regressor")
    g.add_argument("--kind", choices=("linear", "svr"), default="linear")
    g.add_argument("--C", type=float, default=1.0)
    g.add_argument("--epsilon", type=float, default=0.1)
    g.add_argument("--gamma", type=float)
    g.add_argument("--ridge-lambda", type=float, default=0.0)


def _regressor(args) -> RegressorConfig:
    return RegressorConfig(kind=args.kind, C=args.C, epsilon=args.epsilon, gamma=args.gamma,
                           ridge_lambda=args.ridge_lambda)


def run_config(args):
    """Resolve (transform, channels, preset name); a preset excludes explicit transform flags."""
    explicit = [f for f in ("csf", "levels", "sast", "dh_ratio") if getattr(args, f) is not None]
    if args.preset:
        if explicit:
            raise UsageError(f"--preset cannot be combined with --{explicit[0].replace('_', '-')}")
        preset = PRESETS[args.preset]
        channels = CHANNEL_SETS[args.channels] if args.channels else preset.channels
        return preset.transform, channels, preset.name
    csf = None if args.csf in (None, "none") else args.csf
    cfg = TransformConfig(levels=args.levels or 2, csf=csf, use_sast=bool(args.sast),
                          dh_ratio=args.dh_ratio or 3.0)
    return cfg, CHANNEL_SETS[args.channels or "Y"], None


def _csf_config(path):
    return None if path is None else load_csf_config(path)


def _fmt(v: float) -> str:
    return "nan" if not math.isfinite(v) else f"{v:.6f}"


def score_frames(model, ref_frames, dis_frames, csf_config=None):
    """Extract exactly what ``model`` needs under its embedded transform and predict."""
    if model.transform is None:
        raise ConfigError("model file has no transform config; retrain with a preset or explicit flags")
    channels, families = requirements(model.feature_ids)
    ext = FeatureExtractor(model.transform, channels, families, csf_config)
    feats = ext.video(ref_frames, dis_frames)
    return predict(model, feats.pooled), feats


def _video_spec(path, args) -> VideoSpec:
    if not Path(path).is_file():
        raise ConfigError(f"no such file {path}")
    return VideoSpec.from_file(path, args.width, args.height, args.bit_depth)


# --- extract ------------------------------------------------------------------

def _extract_row(job):
    i, row, cfg, channels, config_path, per_frame = job
    out = {"ref_path": str(row.ref_path), "dis_path": str(row.dis_path), "mos": row.mos, "error": ""}
    try:
        ext = FeatureExtractor(cfg, channels, tuple(FAMILIES), _csf_config(config_path))
        feats = ext.video(YuvReader(row.ref_path, row.spec), YuvReader(row.dis_path, row.spec))
        out["features"] = feats.pooled
        if per_frame:
            out["per_frame"] = feats.per_frame
    except (FunqueError, ValueError, FloatingPointError, OSError) as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
    return out


def cmd_extract(args) -> int:
    cfg, channels, preset = run_config(args)
    manifest = load_manifest(args.manifest)
    if args.config is not None:
        load_csf_config(args.config)  # fail fast on a bad weight file
    ids = candidate_ids(cfg.levels, channels)
    jobs = [(i, row, cfg, channels, args.config, args.per_frame) for i, row in enumerate(manifest.rows)]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_extract_row, jobs))
    else:
        rows = [_extract_row(j) for j in jobs]

    config = {"transform": cfg.to_dict(), "channels": list(channels), "preset": preset,
              "csf_config": None if args.config is None else Path(args.config).read_text()}
    files = [args.manifest, *(p for r in manifest.rows for p in (r.ref_path, r.dis_path))]
    meta = {**config, "manifest": manifest.name, "feature_ids": ids,
            "content_key": content_key(files, config)}
    meta.pop("csf_config")
    write_feature_cache(args.out, rows, ids, meta)
    if args.per_frame:
        _write_per_frame(Path(args.out).with_suffix(".frames.csv"), rows, ids)

    failed = [(i, r["error"]) for i, r in enumerate(rows, start=1) if r["error"]]
    for i, err in failed:
        print(f"row {i}: {err}", file=sys.stderr)
    print(f"wrote {len(rows) - len(failed)}/{len(rows)} rows to {args.out}")
    return EXIT_PARTIAL if failed else EXIT_OK


def _write_per_frame(path: Path, rows, ids):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "frame", *ids])
        for i, r in enumerate(rows, start=1):
            for k, fv in enumerate(r.get("per_frame") or []):
                w.writerow([i, k, *(repr(float(fv[f])) for f in ids)])


# --- score --------------------------------------------------------------------

def cmd_score(args) -> int:
    model = load_model(args.model)
    ref_spec = _video_spec(args.ref, args)
    dis_spec = _video_spec(args.dis, args)
    if ref_spec != dis_spec:
        raise ConfigError(f"ref has {ref_spec.frame_count} frames but dis has {dis_spec.frame_count}")
    score, feats = score_frames(model, YuvReader(args.ref, ref_spec), YuvReader(args.dis, dis_spec),
                                _csf_config(args.config))
    if args.per_frame:
        ids = model.feature_ids
        print("frame\t" + "\t".join(ids))
        for k, fv in enumerate(feats.per_frame):
            print(f"{k}\t" + "\t".join(_fmt(fv[f]) for f in ids))
    print(f"{score:.6f}")
    return EXIT_OK


# --- train --------------------------------------------------------------------

def _feature_ids(args, db: Database):
    if args.preset:
        return list(PRESETS[args.preset].features)
    if args.feature_ids:
        return [f.strip() for f in args.feature_ids.split(",") if f.strip()]
    return list(db.features)


def cmd_train(args) -> int:
    if args.preset and args.feature_ids:
        raise UsageError("--preset cannot be combined with --feature-ids")
    db = read_feature_cache(args.features)
    ids = _feature_ids(args, db)
    missing = [f for f in ids if f not in db.features]
    if missing:
        raise ConfigError(f"{args.features} has no column {missing[0]!r}")
    meta = read_cache_meta(args.features)
    transform = TransformConfig.from_dict(meta["transform"]) if "transform" in meta else None
    if args.preset:
        want = PRESETS[args.preset].transform
        if transform is not None and transform != want:
            log.warning("cache transform %s differs from preset %s; model uses the preset's", transform, want)
        transform = want
    model = train(db.vectors(ids), db.mos, _regressor(args), ids, transform, args.preset)
    save_model(model, args.out)
    fit = srocc(predict_many(model, db.vectors(ids)), db.mos)
    print(f"trained {args.kind} on {len(db.mos)} videos, {len(ids)} features; training SROCC {fit:.6f}")
    print(f"model written to {args.out}")
    return EXIT_OK


# --- select / eval --------------------------------------------------------------

def _databases(paths):
    dbs = [read_feature_cache(p) for p in paths]
    names = [d.name for d in dbs]
    if len(set(names)) != len(names):
        raise UsageError("feature caches must have distinct file stems")
    return dbs


def cross_db_table(result) -> str:
    """Train rows x test columns, per-column averages and the overall Fisher mean."""
    names = result.names
    width = max(8, *(len(n) for n in names))
    head = "train\\test".ljust(width) + "".join(n.rjust(width + 2) for n in names)
    lines = [head]
    for tr in names:
        cells = []
        for te in names:
            v = result.matrix.get((tr, te))
            cells.append(("-" if tr == te else "fail" if v is None else f"{v:.4f}").rjust(width + 2))
        lines.append(tr.ljust(width) + "".join(cells))
    avg = []
    for te in names:
        vals = [v for (a, b), v in result.matrix.items() if b == te]
        avg.append((f"{result.test_average(te):.4f}" if vals else "-").rjust(width + 2))
    lines.append("average".ljust(width) + "".join(avg))
    lines.append(f"overall Fisher mean SROCC: {result.overall:.6f}")
    return "\n".join(lines)


def cmd_eval(args) -> int:
    dbs = _databases(args.caches)
    if args.model:
        ids = load_model(args.model).feature_ids
    elif args.preset:
        ids = list(PRESETS[args.preset].features)
    elif args.feature_ids:
        ids = [f.strip() for f in args.feature_ids.split(",") if f.strip()]
    else:
        raise UsageError("eval needs --model, --preset or --feature-ids")
    for db in dbs:
        missing = [f for f in ids if f not in db.features]
        if missing:
            raise ConfigError(f"cache {db.name} has no column {missing[0]!r}")
    result = cross_db_srocc(ids, dbs, _regressor(args))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["train", "test", "srocc"])
            for (tr, te), v in result.matrix.items():
                w.writerow([tr, te, repr(v)])
    print(cross_db_table(result))
    for tr, te in result.failed:
        print(f"failed: train {tr} -> test {te}", file=sys.stderr)
    return EXIT_OK if result.complete else EXIT_PARTIAL


def cmd_select(args) -> int:
    dbs = _databases(args.caches)
    meta = read_cache_meta(args.caches[0])
    levels = args.levels or int(meta.get("transform", {}).get("levels", 2))
    channels = CHANNEL_SETS[args.channels] if args.channels else tuple(meta.get("channels", ("Y",)))
    buckets = feature_buckets(levels, channels)
    if args.buckets:
        wanted = [b.strip() for b in args.buckets.split(",")]
        unknown = sorted(set(wanted) - {b.name for b in buckets})
        if unknown:
            raise UsageError(f"unknown bucket(s) {', '.join(unknown)}")
        buckets = [b for b in buckets if b.name in wanted]
    buckets = [b for b in buckets if all(f in db.features for db in dbs for g in b.groups for f in g)]
    if not buckets:
        raise ConfigError("no feature bucket is fully present in every cache")
    result = cgfs(buckets, dbs, _regressor(args))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["pass", "bucket", "group", "srocc", "improved"])
            for a in result.audit:
                w.writerow([a["pass"], a["bucket"], "+".join(a["group"]), repr(a["srocc"]), int(a["improved"])])
    print(f"evaluations: {len(result.audit)} over {result.passes} pass(es)")
    for name, group in result.groups:
        print(f"selected {name}: {', '.join(group)}")
    print(f"features: {','.join(result.features)}")
    print(f"cross-database Fisher mean SROCC: {result.score:.6f}")
    return EXIT_OK


# --- mono -----------------------------------------------------------------------

def monotone_nonincreasing(scores) -> bool:
    return all(b <= a for a, b in zip(scores, scores[1:]))


def cmd_mono(args) -> int:
    severities = [float(s) for s in args.severities.split(",")]
    if any(b <= a for a, b in zip(severities, severities[1:])):
        raise UsageError("--severities must be strictly increasing")
    model = load_model(args.model)
    spec = _video_spec(args.ref, args)
    ref = list(YuvReader(args.ref, spec))
    csf_config = _csf_config(args.config)
    scores = []
    for s in severities:
        dis = list(distort_video(ref, args.distortion, s, args.seed))
        scores.append(score_frames(model, ref, dis, csf_config)[0])
    print("severity\tscore")
    for s, q in zip(severities, scores):
        print(f"{s:g}\t{q:.6f}")
    ok = monotone_nonincreasing(scores)
    print(f"monotone: {'pass' if ok else 'fail'}")
    return EXIT_OK if ok else EXIT_PARTIAL


# --- parser ---------------------------------------------------------------------

def _add_video_flags(p):
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--bit-depth", type=int, default=8, choices=(8, 10))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="funqueplus", description="Wavelet-domain full-reference video quality.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("extract", help="compute a feature cache from a manifest")
    e.add_argument("--manifest", type=Path, required=True)
    e.add_argument("--out", type=Path, required=True)
    e.add_argument("--jobs", type=int, default=1)
    e.add_argument("--per-frame", action="store_true", help="also write <out>.frames.csv")
    _add_transform_flags(e)
    _add_config_flag(e)
    e.set_defaults(func=cmd_extract)

    s = sub.add_parser("score", help="score one reference/distorted pair")
    s.add_argument("--model", type=Path, required=True)
    s.add_argument("--ref", type=Path, required=True)
    s.add_argument("--dis", type=Path, required=True)
    s.add_argument("--per-frame", action="store_true")
    _add_video_flags(s)
    _add_config_flag(s)
    s.set_defaults(func=cmd_score)

    t = sub.add_parser("train", help="fit a fusion model on a feature cache")
    t.add_argument("--features", type=Path, required=True)
    t.add_argument("--preset", choices=sorted(PRESETS))
    t.add_argument("--feature-ids")
    t.add_argument("--out", type=Path, required=True)
    _add_regressor_flags(t)
    t.set_defaults(func=cmd_train)

    sel = sub.add_parser("select", help="constrained greedy feature selection across caches")
    sel.add_argument("caches", nargs="+", type=Path)
    sel.add_argument("--levels", type=int)
    sel.add_argument("--channels", choices=sorted(CHANNEL_SETS))
    sel.add_argument("--buckets", help="comma-separated bucket names, e.g. Y-SSIM,Y-DLM (default: all)")
    sel.add_argument("--out", type=Path)
    _add_regressor_flags(sel)
    sel.set_defaults(func=cmd_select)

    ev = sub.add_parser("eval", help="cross-database SROCC report")
    ev.add_argument("caches", nargs="+", type=Path)
    ev.add_argument("--model", type=Path)
    ev.add_argument("--preset", choices=sorted(PRESETS))
    ev.add_argument("--feature-ids")
    ev.add_argument("--out", type=Path)
    _add_regressor_flags(ev)
    ev.set_defaults(func=cmd_eval)

    m = sub.add_parser("mono", help="score a reference under increasing synthetic distortion")
    m.add_argument("--model", type=Path, required=True)
    m.add_argument("--ref", type=Path, required=True)
    m.add_argument("--distortion", choices=DISTORTIONS, required=True)
    m.add_argument("--severities", required=True, help="comma-separated, strictly increasing")
    m.add_argument("--seed", type=int, default=0)
    _add_video_flags(m)
    _add_config_flag(m)
    m.set_defaults(func=cmd_mono)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: usage error: {exc}", file=sys.stderr)
    except (FunqueError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"{parser.prog} {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
