"""Cross-validation, accuracy and parameter sensitivity sweeps."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .inference import InferenceConfig, predict_multiclass
from .model import Hyperparams, MultiviewDataset
from .trainer import StepSchedule, train_one_vs_all

log = logging.getLogger(__name__)

SWEEP_DEFAULT = (0.1, 1.0, 10.0, 100.0, 1000.0)


@dataclass(frozen=True)
class CvConfig:
    k: int = 10
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"need at least 2 folds, got k={self.k}")


@dataclass(frozen=True)
class SweepConfig:
    param: str
    values: tuple[float, ...] = SWEEP_DEFAULT
    base_hp: Hyperparams = field(default_factory=Hyperparams)

    def __post_init__(self):
        if self.param not in ("alpha", "gamma"):
            raise ValueError(f"can only sweep alpha or gamma, not {self.param!r}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if any(not v > 0 for v in self.values):
            raise ValueError(f"sweep values must be positive: {list(self.values)}")


@dataclass
class CvResult:
    per_fold_accuracy: list[float]
    mean: float
    std: float
    folds: list[np.ndarray]


@dataclass(frozen=True)
class SweepRow:
    value: float
    mean_accuracy: float
    std: float


def _with_context(e: Exception, ctx: str) -> Exception:
    try:
        return type(e)(f"{ctx}: {e}")
    except Exception:
        return e


def accuracy(predicted: Sequence, actual: Sequence) -> float:
    p, a = np.asarray(predicted), np.asarray(actual)
    if p.shape != a.shape:
        raise ValueError(f"length mismatch: {p.shape[0]} predictions, {a.shape[0]} labels")
    if p.size == 0:
        raise ValueError("accuracy of an empty prediction list is undefined")
    return float(np.mean(p == a))


def kfold_split(n: int, cfg: CvConfig, labels=None) -> list[np.ndarray]:
    """Partition range(n) into ``cfg.k`` folds of near-equal size.

    Stratified mode shuffles each class, concatenates the classes and deals
    positions round-robin, so every fold gets its class share to within one.
    """
    if cfg.k > n:
        raise ValueError(f"cannot make {cfg.k} folds from {n} points")
    rng = np.random.default_rng(cfg.seed)
    if cfg.stratified and labels is not None:
        labels = np.asarray(labels)
        if labels.shape[0] != n:
            raise ValueError(f"{labels.shape[0]} labels for n={n}")
        order = np.concatenate([rng.permutation(np.flatnonzero(labels == k)) for k in np.unique(labels)])
    else:
        order = rng.permutation(n)
    slot = np.arange(n) % cfg.k
    return [np.sort(order[slot == f]) for f in range(cfg.k)]


def cross_validate(
    dataset: MultiviewDataset,
    hp: Hyperparams = Hyperparams(),
    schedule: StepSchedule = StepSchedule(),
    cv: CvConfig = CvConfig(),
    inf: InferenceConfig = InferenceConfig(),
) -> CvResult:
    """Train one-vs-all on k-1 folds, score the held-out fold, for every fold."""
    folds = kfold_split(dataset.n, cv, dataset.labels)
    accs = []
    for f, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(np.arange(dataset.n), test_idx, assume_unique=True)
        if np.intersect1d(train_idx, test_idx).size:
            raise AssertionError(f"fold {f}: train and test overlap")
        try:
            bundles = train_one_vs_all(dataset.subset(train_idx), hp, schedule)
            test = dataset.subset(test_idx)
            pred = predict_multiclass(test.views, bundles, inf)
        except Exception as e:
            raise _with_context(e, f"fold {f}") from e
        accs.append(accuracy(pred, test.labels))
        log.debug("fold %d accuracy %.4f", f, accs[-1])
    a = np.asarray(accs)
    return CvResult(per_fold_accuracy=accs, mean=float(a.mean()), std=float(a.std()), folds=folds)


def sensitivity_sweep(
    dataset: MultiviewDataset,
    sweep: SweepConfig,
    schedule: StepSchedule = StepSchedule(),
    cv: CvConfig = CvConfig(),
    inf: InferenceConfig = InferenceConfig(),
) -> list[SweepRow]:
    rows = []
    for v in sweep.values:
        hp = replace(sweep.base_hp, **{sweep.param: float(v)})
        try:
            res = cross_validate(dataset, hp, schedule, cv, inf)
        except Exception as e:
            raise _with_context(e, f"{sweep.param}={v}") from e
        rows.append(SweepRow(value=float(v), mean_accuracy=res.mean, std=res.std))
    return rows
