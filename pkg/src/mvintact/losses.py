"""Loss terms of the joint objective: Cauchy reconstruction, hinge, and l2."""

from __future__ import annotations

import numpy as np

from .model import Hyperparams, ModelState, MultiviewDataset, ObjectiveTerms, ShapeError, check_state


def _vec(a, name):
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise ShapeError(f"{name} must be a vector, got shape {a.shape}")
    return a


def cauchy_error(x, W, z, c: float) -> float:
    """log(1 + ||x - W z||^2 / c^2)."""
    x, z = _vec(x, "x"), _vec(z, "z")
    W = np.asarray(W, dtype=float)
    if W.ndim != 2:
        raise ShapeError(f"W must be a matrix, got shape {W.shape}")
    if W.shape[0] != x.shape[0]:
        raise ShapeError(f"x has length {x.shape[0]} but W has {W.shape[0]} rows")
    if W.shape[1] != z.shape[0]:
        raise ShapeError(f"z has length {z.shape[0]} but W has {W.shape[1]} columns")
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    r = x - W @ z
    return float(np.log1p(r @ r / c**2))


def _margin_slack(y, omega, z) -> float:
    omega, z = _vec(omega, "omega"), _vec(z, "z")
    if omega.shape != z.shape:
        raise ShapeError(f"omega has length {omega.shape[0]}, z has length {z.shape[0]}")
    if y not in (1, -1):
        raise ValueError(f"label must be +1 or -1, got {y}")
    return 1.0 - y * float(omega @ z)


def hinge_loss(y: int, omega, z) -> float:
    return max(0.0, _margin_slack(y, omega, z))


def hinge_indicator(y: int, omega, z) -> int:
    # strict: a point sitting exactly on the margin is inactive
    return 1 if _margin_slack(y, omega, z) > 0 else 0


def hinge_indicators(y: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """Vectorised :func:`hinge_indicator` given ``scores[i] = <omega, z_i>``."""
    return (1.0 - y * scores > 0).astype(np.int64)


def regularizer(state: ModelState) -> float:
    total = float(np.sum(state.Z * state.Z))
    for W in state.W:
        total += float(np.sum(W * W))
    return total + float(state.omega @ state.omega)


def reconstruct(Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Rows ``W z_i`` for every row of Z, i.e. the predicted view matrix."""
    return Z @ W.T


def residual_sq_norms(X: np.ndarray, Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    R = X - reconstruct(Z, W)
    return np.einsum("ij,ij->i", R, R)


def objective(dataset: MultiviewDataset, state: ModelState, hp: Hyperparams) -> ObjectiveTerms:
    """Evaluate the full objective with the true (non-linearised) hinge."""
    check_state(dataset, state)
    recon = 0.0
    for X, W in zip(dataset.views, state.W):
        recon += float(np.sum(np.log1p(residual_sq_norms(X, state.Z, W) / hp.c**2)))
    y = dataset.labels.astype(float)
    hinge = np.maximum(0.0, 1.0 - y * (state.Z @ state.omega))
    cls = hp.alpha * float(np.sum(hinge))
    reg = hp.gamma * regularizer(state)
    return ObjectiveTerms(recon, cls, reg, recon + cls + reg)
