"""Alternating full-batch gradient descent over intact vectors, view maps and classifier."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .gradients import grad_omega, grad_W, grad_Z
from .losses import hinge_indicators, objective
from .model import (
    DivergenceError,
    Hyperparams,
    ModelBundle,
    ModelState,
    MultiviewDataset,
    NumericalError,
    TrainReport,
    validate,
)

log = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 1e3


@dataclass(frozen=True)
class StepSchedule:
    kind: str = "inverse_t"  # or "constant"
    base: float = 1.0

    def __post_init__(self):
        if self.kind not in ("inverse_t", "constant"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not self.base > 0:
            raise ValueError(f"schedule base must be positive, got {self.base}")

    def step(self, t: int) -> float:
        if t < 1:
            raise ValueError(f"iteration index must be >= 1, got {t}")
        return self.base / t if self.kind == "inverse_t" else self.base


def initialize(dataset: MultiviewDataset, hp: Hyperparams) -> ModelState:
    """Gaussian start with std ``hp.init_scale``; draws Z, then each W_j, then omega."""
    hp = hp.resolved(dataset.view_dims)
    rng = np.random.default_rng(hp.seed)
    s = hp.init_scale
    Z = rng.normal(0.0, s, size=(dataset.n, hp.d))
    W = tuple(rng.normal(0.0, s, size=(dj, hp.d)) for dj in dataset.view_dims)
    omega = rng.normal(0.0, s, size=hp.d)
    beta = hinge_indicators(dataset.labels, Z @ omega)
    return ModelState(Z=Z, W=W, omega=omega, beta=beta)


def _require_finite(arr: np.ndarray, block: str, t: int) -> None:
    if np.all(np.isfinite(arr)):
        return
    idx = int(np.argwhere(~np.isfinite(arr))[0][0])
    raise NumericalError(
        f"non-finite {block} at index {idx} in iteration {t}; try a smaller step base"
    )


def train_epoch(
    t: int,
    dataset: MultiviewDataset,
    state: ModelState,
    hp: Hyperparams,
    schedule: StepSchedule = StepSchedule(),
) -> ModelState:
    """One outer iteration: beta, then every z_i, then every W_j, then omega."""
    mu = schedule.step(t)
    y = dataset.labels

    # beta^t from omega^{t-1}, z^{t-1}; z-step uses W^{t-1}, omega^{t-1}, beta^t
    beta = hinge_indicators(y, state.Z @ state.omega)
    st = replace(state, beta=beta)
    Z = state.Z - mu * grad_Z(dataset, st, hp)
    _require_finite(Z, "z", t)

    st = replace(st, Z=Z)
    W = []
    for j in range(dataset.m):
        Wj = state.W[j] - mu * grad_W(j, dataset, st, hp)
        if not np.all(np.isfinite(Wj)):
            raise NumericalError(f"non-finite W at view {j} in iteration {t}; try a smaller step base")
        W.append(Wj)

    omega = state.omega - mu * grad_omega(dataset, st, hp)
    _require_finite(omega, "omega", t)
    return ModelState(Z=Z, W=tuple(W), omega=omega, beta=beta)


def train(
    dataset: MultiviewDataset,
    hp: Hyperparams = Hyperparams(),
    schedule: StepSchedule = StepSchedule(),
    class_tag: int = 1,
) -> tuple[ModelState, ModelBundle, TrainReport]:
    """Fit a binary model on +1/-1 labels for ``hp.T`` iterations."""
    problems = validate(dataset, binary=True)
    if problems:
        raise ValueError("invalid training set: " + "; ".join(problems))
    hp = hp.resolved(dataset.view_dims)

    start = time.perf_counter()
    state = initialize(dataset, hp)
    report = TrainReport()
    report.objective_trace.append(objective(dataset, state, hp))
    limit = DIVERGENCE_FACTOR * report.objective_trace[0].total

    for t in range(1, hp.T + 1):
        try:
            state = train_epoch(t, dataset, state, hp, schedule)
        except NumericalError as e:
            raise NumericalError(f"class {class_tag}: {e}") from e
        terms = objective(dataset, state, hp)
        report.objective_trace.append(terms)
        if limit > 0 and terms.total > limit:
            raise DivergenceError(
                f"class {class_tag}: objective {terms.total:.4g} at iteration {t} exceeds "
                f"{DIVERGENCE_FACTOR:g}x its initial value; use a smaller step base"
            )

    report.wall_time = time.perf_counter() - start
    report.final_beta_active_count = int(state.beta.sum())
    log.debug("class %s: objective %.6g -> %.6g", class_tag,
              report.objective_trace[0].total, report.objective_trace[-1].total)
    bundle = ModelBundle(W=state.W, omega=state.omega, hyperparams=hp, class_tag=class_tag)
    return state, bundle, report


def _zigzag(k: int) -> int:
    return 2 * k if k >= 0 else -2 * k - 1


def class_seed(seed: int, class_tag: int) -> int:
    """Per-class seed; depends only on the base seed and the label value."""
    ss = np.random.SeedSequence([seed, _zigzag(int(class_tag))])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def train_one_vs_all(
    dataset: MultiviewDataset,
    hp: Hyperparams = Hyperparams(),
    schedule: StepSchedule = StepSchedule(),
    classes: Sequence[int] | None = None,
    with_reports: bool = False,
):
    """Train one binary model per class (that class against the rest).

    Returns the bundles sorted by class, or ``(bundles, reports)`` when
    ``with_reports`` is set.
    """
    present = set(dataset.classes)
    if classes is None:
        classes = sorted(present)
    else:
        classes = sorted(int(k) for k in classes)
        for k in classes:
            if k not in present:
                raise ValueError(f"class {k} has no members in the training set")
    if len(classes) < 2:
        raise ValueError(f"one-vs-all needs at least 2 classes, got {list(classes)}")

    bundles, reports = [], []
    for k in classes:
        hp_k = replace(hp, seed=class_seed(hp.seed, k))
        _, bundle, report = train(dataset.one_vs_rest(k), hp_k, schedule, class_tag=k)
        bundles.append(bundle)
        reports.append(report)
    return (bundles, reports) if with_reports else bundles
