"""Feature fusion: normalization, linear/SVR regressors, model files and presets."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import PredictError, TrainError
from .transform import TransformConfig

MODEL_VERSION = 1


@dataclass(frozen=True)
class ModelPreset:
    name: str
    features: tuple
    csf: str
    use_sast: bool
    levels: int

    @property
    def transform(self) -> TransformConfig:
        return TransformConfig(levels=self.levels, csf=self.csf, use_sast=self.use_sast)

    @property
    def channels(self) -> tuple:
        order = ("Y", "Cb", "Cr")
        used = {f.split("-", 1)[0] for f in self.features}
        return tuple(c for c in order if c in used)


PRESETS = {
    "Y-FUNQUE+": ModelPreset(
        "Y-FUNQUE+", ("Y-MS-ESSIM@2", "Y-MAD-Ref@2", "Y-DLM-S@2"), "NadenauSW", True, 2),
    "3C-FUNQUE+": ModelPreset(
        "3C-FUNQUE+",
        ("Y-MS-ESSIM@2", "Y-MAD-Dis@2", "Y-DLM-S@2", "Y-SRRED-HV@2", "Y-TRRED-HV@2", "Cb-Edge@2", "Cr-MAD@2"),
        "LiSW", True, 2),
    "FS-Y-FUNQUE+": ModelPreset(
        "FS-Y-FUNQUE+",
        ("Y-MS-ESSIM@2", "Y-dTL-SAI@2", "Y-MAD-Dis@2", "Y-DLM-S@2", "Y-STRRED-HV@2"),
        "NadenauSpat", False, 2),
    "FS-3C-FUNQUE+": ModelPreset(
        "FS-3C-FUNQUE+",
        ("Y-MS-ESSIM@3", "Y-dTL-SAI@3", "Y-DLM-S@3", "Cb-MAD-Dis@3", "Cb-SRRED-HV@3", "Cb-TRRED-HV@3",
         "Cb-Edge@3", "Cr-MAD@3", "Cr-Blur@3"),
        "WatsonSW", False, 3),
}


@dataclass
class RegressorConfig:
    kind: str = "linear"
    C: float = 1.0
    epsilon: float = 0.1
    gamma: float | None = None
    ridge_lambda: float = 0.0
    tol: float = 1e-3
    max_iter: int = 1_000_000


@dataclass
class FusionModel:
    feature_ids: list
    norm_mean: np.ndarray
    norm_std: np.ndarray
    regressor: dict
    target_range: tuple
    transform: TransformConfig | None = None
    preset: str | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "version": MODEL_VERSION,
            "preset": self.preset,
            "feature_ids": list(self.feature_ids),
            "norm": {"mean": _floats(self.norm_mean), "std": _floats(self.norm_std)},
            "regressor": _jsonable(self.regressor),
            "target_range": _floats(self.target_range),
            "transform": None if self.transform is None else {
                "csf": self.transform.csf, "levels": self.transform.levels,
                "sast": self.transform.use_sast, "dh_ratio": self.transform.dh_ratio},
            **({"extra": self.extra} if self.extra else {}),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FusionModel":
        if d.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {d.get('version')!r}")
        reg = dict(d["regressor"])
        for key in ("weights", "support_vectors", "dual_coef"):
            if key in reg:
                reg[key] = np.asarray(reg[key], dtype=float)
        t = d.get("transform")
        return cls(
            feature_ids=list(d["feature_ids"]),
            norm_mean=np.asarray(d["norm"]["mean"], dtype=float),
            norm_std=np.asarray(d["norm"]["std"], dtype=float),
            regressor=reg,
            target_range=tuple(d["target_range"]),
            transform=None if t is None else TransformConfig.from_dict(t),
            preset=d.get("preset"),
            extra=d.get("extra", {}),
        )


def _floats(a):
    return [float(v) for v in np.ravel(a)] if np.ndim(a) <= 1 else [_floats(r) for r in a]


def _jsonable(reg: dict) -> dict:
    return {k: (_floats(v) if isinstance(v, np.ndarray) else v) for k, v in reg.items()}


def _matrix(features, ids) -> np.ndarray:
    rows = []
    for i, fv in enumerate(features):
        try:
            rows.append([float(fv[f]) for f in ids])
        except KeyError as exc:
            raise TrainError(f"sample {i} lacks feature {exc.args[0]!r}") from None
    return np.asarray(rows, dtype=float)


def _rbf(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    d2 = (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2.0 * a @ b.T
    return np.exp(-gamma * np.maximum(d2, 0.0))


def train(features, mos, cfg: RegressorConfig | None = None, feature_ids=None,
          transform: TransformConfig | None = None, preset: str | None = None) -> FusionModel:
    """Fit z-score normalization, scale MOS to [0, 1] and train the regressor.

    ``features`` is a sequence of id -> value mappings (one per video).
    """
    cfg = cfg or RegressorConfig()
    features = list(features)
    y = np.asarray(mos, dtype=float)
    if len(features) < 2 or len(features) != len(y):
        raise TrainError("need at least two samples with matching MOS values")
    ids = list(feature_ids) if feature_ids is not None else list(features[0])
    X = _matrix(features, ids)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    for fid, s in zip(ids, std):
        if not s > 0:
            raise TrainError(f"feature {fid!r} has zero variance in the training set")
    Z = (X - mean) / std
    lo, hi = float(y.min()), float(y.max())
    t = (y - lo) / (hi - lo) if hi > lo else np.zeros_like(y)

    if cfg.kind == "linear":
        bias = float(t.mean())
        tc = t - bias
        if cfg.ridge_lambda > 0:
            w = np.linalg.solve(Z.T @ Z + cfg.ridge_lambda * np.eye(Z.shape[1]), Z.T @ tc)
        else:
            w = np.linalg.lstsq(Z, tc, rcond=None)[0]
        reg = {"kind": "linear", "weights": w, "bias": bias, "ridge_lambda": cfg.ridge_lambda}
    elif cfg.kind == "svr":
        reg = _train_svr(Z, t, cfg)
    else:
        raise TrainError(f"unknown regressor kind {cfg.kind!r}")
    return FusionModel(ids, mean, std, reg, (lo, hi), transform, preset)


def _train_svr(Z, t, cfg: RegressorConfig) -> dict:
    from sklearn.exceptions import ConvergenceWarning
    from sklearn.svm import SVR

    gamma = cfg.gamma if cfg.gamma is not None else 1.0 / Z.shape[1]
    svr = SVR(kernel="rbf", C=cfg.C, epsilon=cfg.epsilon, gamma=gamma, tol=cfg.tol, max_iter=cfg.max_iter)
    with warnings.catch_warnings():
        warnings.simplefilter("error", ConvergenceWarning)
        try:
            svr.fit(Z, t)
        except ConvergenceWarning as exc:
            raise TrainError(f"SMO did not reach tolerance {cfg.tol} within {cfg.max_iter} iterations: {exc}") from None
    return {
        "kind": "svr", "kernel": "rbf", "gamma": float(gamma), "C": cfg.C, "epsilon": cfg.epsilon,
        "support_vectors": np.asarray(svr.support_vectors_, dtype=float),
        "dual_coef": np.asarray(svr.dual_coef_[0], dtype=float),
        "bias": float(svr.intercept_[0]),
    }


def predict_normalized(model: FusionModel, Z: np.ndarray) -> np.ndarray:
    reg = model.regressor
    if reg["kind"] == "linear":
        return Z @ np.asarray(reg["weights"]) + reg["bias"]
    if reg["kind"] == "svr":
        K = _rbf(Z, np.asarray(reg["support_vectors"]), reg["gamma"])
        return K @ np.asarray(reg["dual_coef"]) + reg["bias"]
    raise PredictError(f"unknown regressor kind {reg['kind']!r}")


def predict_many(model: FusionModel, features) -> np.ndarray:
    rows = []
    for fv in features:
        missing = [f for f in model.feature_ids if f not in fv]
        if missing:
            raise PredictError(f"feature vector lacks {missing[0]!r}")
        rows.append([float(fv[f]) for f in model.feature_ids])
    Z = (np.asarray(rows, dtype=float) - model.norm_mean) / model.norm_std
    lo, hi = model.target_range
    return lo + predict_normalized(model, Z) * (hi - lo)


def predict(model: FusionModel, features) -> float:
    return float(predict_many(model, [features])[0])


def save_model(model: FusionModel, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2) + "\n")


def load_model(path) -> FusionModel:
    return FusionModel.from_dict(json.loads(Path(path).read_text()))
