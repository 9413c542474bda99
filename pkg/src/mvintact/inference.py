"""Test-time intact vectors and classification from a trained bundle.

A new point has no label, so its intact vector is fitted to the views alone:

    q(z) = sum_j log(1 + ||x^j - W_j z||^2 / c^2) + gamma ||z||^2

by plain gradient descent. The best iterate seen is returned, so q never ends
above its starting value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .losses import reconstruct
from .model import ModelBundle, NumericalError, ShapeError
from .trainer import DIVERGENCE_FACTOR, StepSchedule


@dataclass(frozen=True)
class InferenceConfig:
    t_inf: int = 200
    schedule: StepSchedule = field(default_factory=StepSchedule)
    init: str = "zero"  # or "gaussian": N(0, init_scale^2) seeded from the bundle

    def __post_init__(self):
        if self.t_inf < 1:
            raise ValueError(f"t_inf must be >= 1, got {self.t_inf}")
        if self.init not in ("zero", "gaussian"):
            raise ValueError(f"unknown init {self.init!r}")


def _as_batch(x_views: Sequence, bundle: ModelBundle) -> list[np.ndarray]:
    if len(x_views) != len(bundle.W):
        raise ShapeError(f"got {len(x_views)} views, bundle expects {len(bundle.W)}")
    out = []
    for j, (X, W) in enumerate(zip(x_views, bundle.W), start=1):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != W.shape[0]:
            raise ShapeError(f"view {j} has {X.shape[1]} features, bundle expects {W.shape[0]}")
        out.append(X)
    if len({X.shape[0] for X in out}) > 1:
        raise ShapeError("views disagree on the number of points")
    return out


def intact_objective(x_views, bundle: ModelBundle, Z) -> np.ndarray:
    """q(z) for each row of Z (or for a single z)."""
    views = _as_batch(x_views, bundle)
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    hp = bundle.hyperparams
    q = hp.gamma * np.einsum("ij,ij->i", Z, Z)
    for X, W in zip(views, bundle.W):
        R = X - reconstruct(Z, W)
        q = q + np.log1p(np.einsum("ij,ij->i", R, R) / hp.c**2)
    return q


def _intact_grad(views, bundle, Z):
    hp = bundle.hyperparams
    G = 2.0 * hp.gamma * Z
    for X, W in zip(views, bundle.W):
        R = X - reconstruct(Z, W)
        w = 2.0 / (hp.c**2 + np.einsum("ij,ij->i", R, R))
        G = G - (w[:, None] * R) @ W
    return G


def initial_intact(n: int, bundle: ModelBundle, cfg: InferenceConfig) -> np.ndarray:
    if cfg.init == "zero":
        return np.zeros((n, bundle.d))
    hp = bundle.hyperparams
    rng = np.random.default_rng(hp.seed)
    return rng.normal(0.0, hp.init_scale, size=(n, bundle.d))


def infer_intact_batch(x_views, bundle: ModelBundle, cfg: InferenceConfig = InferenceConfig(),
                       z0=None) -> np.ndarray:
    """Intact vectors for a batch: ``x_views[j]`` is ``n x d_j``; returns ``n x d``.

    ``z0`` overrides the configured starting point. Rows are independent; a
    row whose objective exceeds the divergence guard stops moving and keeps
    its best iterate.
    """
    views = _as_batch(x_views, bundle)
    n = views[0].shape[0]
    if z0 is None:
        Z = initial_intact(n, bundle, cfg)
    else:
        Z = np.array(np.broadcast_to(np.asarray(z0, dtype=float), (n, bundle.d)))
    q = intact_objective(views, bundle, Z)
    best, best_q = Z.copy(), q.copy()
    live = np.ones(n, dtype=bool)
    limit = DIVERGENCE_FACTOR * np.maximum(q, np.finfo(float).tiny)
    for t in range(1, cfg.t_inf + 1):
        if not live.any():
            break
        mu = cfg.schedule.step(t)
        Z = np.where(live[:, None], Z - mu * _intact_grad(views, bundle, Z), Z)
        if not np.all(np.isfinite(Z)):
            i = int(np.argwhere(~np.isfinite(Z))[0][0])
            raise NumericalError(f"non-finite intact vector for point {i} at step {t}")
        q = intact_objective(views, bundle, Z)
        better = q < best_q
        best[better] = Z[better]
        best_q[better] = q[better]
        live &= q <= limit
    return best


def infer_intact(x_views, bundle: ModelBundle, cfg: InferenceConfig = InferenceConfig(), z0=None) -> np.ndarray:
    """Intact vector of one point given its m view vectors."""
    for j, x in enumerate(x_views, start=1):
        if np.ndim(x) != 1:
            raise ShapeError(f"view {j}: expected a vector, got shape {np.shape(x)}")
    return infer_intact_batch([np.asarray(x)[None, :] for x in x_views], bundle, cfg, z0)[0]


def decision_values(x_views, bundle: ModelBundle, cfg: InferenceConfig = InferenceConfig()) -> np.ndarray:
    return infer_intact_batch(x_views, bundle, cfg) @ bundle.omega


def decision_value(x_views, bundle: ModelBundle, cfg: InferenceConfig = InferenceConfig()) -> float:
    return float(infer_intact(x_views, bundle, cfg) @ bundle.omega)


def sign_label(values):
    """+1 / -1 by sign, with 0 mapped to +1."""
    return np.where(np.asarray(values) >= 0, 1, -1)


def classify_binary(x_views, bundle: ModelBundle, cfg: InferenceConfig = InferenceConfig()) -> int:
    return int(sign_label(decision_value(x_views, bundle, cfg)))


def decision_matrix(x_views, bundles: Sequence[ModelBundle], cfg: InferenceConfig = InferenceConfig()):
    """Per-class decision values, columns ordered by increasing class tag."""
    if not bundles:
        raise ValueError("need at least one bundle")
    ordered = sorted(bundles, key=lambda b: b.class_tag)
    tags = np.array([b.class_tag for b in ordered])
    V = np.column_stack([decision_values(x_views, b, cfg) for b in ordered])
    return tags, V


def predict_multiclass(x_views, bundles: Sequence[ModelBundle], cfg: InferenceConfig = InferenceConfig()):
    """Batch one-vs-all prediction; ties go to the lowest class tag."""
    tags, V = decision_matrix(x_views, bundles, cfg)
    return tags[np.argmax(V, axis=1)]


def classify_multiclass(x_views, bundles: Sequence[ModelBundle], cfg: InferenceConfig = InferenceConfig()) -> int:
    if not bundles:
        raise ValueError("need at least one bundle")
    return int(predict_multiclass([np.asarray(x)[None, :] for x in x_views], bundles, cfg)[0])
