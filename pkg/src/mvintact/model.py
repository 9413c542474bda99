"""Domain types shared across the package.

All containers are frozen dataclasses over numpy arrays. They are treated as
immutable values: the trainer produces new states rather than editing old ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np


class ShapeError(ValueError):
    """Operands have inconsistent shapes."""


class NumericalError(ArithmeticError):
    """A non-finite value was produced during optimisation."""


class DivergenceError(NumericalError):
    """The objective blew up past the divergence guard."""


@dataclass(frozen=True, eq=False)
class MultiviewDataset:
    """n points observed through m views, plus one integer label per point.

    ``views[j]`` is an ``n x d_j`` float matrix. Construction does not check
    anything; call :func:`validate` for a list of problems.
    """

    views: tuple[np.ndarray, ...]
    labels: np.ndarray

    @classmethod
    def from_arrays(cls, views: Sequence, labels: Sequence) -> "MultiviewDataset":
        return cls(
            views=tuple(np.asarray(v, dtype=float) for v in views),
            labels=np.asarray(labels, dtype=np.int64),
        )

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @property
    def m(self) -> int:
        return len(self.views)

    @property
    def view_dims(self) -> tuple[int, ...]:
        return tuple(int(v.shape[1]) if v.ndim == 2 else -1 for v in self.views)

    @property
    def classes(self) -> tuple[int, ...]:
        return tuple(int(k) for k in np.unique(self.labels))

    def is_binary(self) -> bool:
        return bool(np.all((self.labels == 1) | (self.labels == -1)))

    def subset(self, idx) -> "MultiviewDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return MultiviewDataset(
            views=tuple(v[idx] for v in self.views), labels=self.labels[idx]
        )

    def one_vs_rest(self, positive: int) -> "MultiviewDataset":
        """Same features, labels projected to +1 for ``positive`` and -1 otherwise."""
        y = np.where(self.labels == positive, 1, -1).astype(np.int64)
        return MultiviewDataset(views=self.views, labels=y)


@dataclass(frozen=True)
class Hyperparams:
    alpha: float = 1.0
    gamma: float = 0.01
    c: float = 1.0
    d: int | None = None  # None: smallest view dimension
    T: int = 100
    t_inf: int = 200
    seed: int = 0
    init_scale: float = 0.01

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if self.d is not None and self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if self.t_inf < 1:
            raise ValueError(f"t_inf must be >= 1, got {self.t_inf}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        if self.seed < 0:
            raise ValueError(f"seed must be unsigned, got {self.seed}")
        if not self.init_scale > 0:
            raise ValueError(f"init_scale must be positive, got {self.init_scale}")

    def resolved(self, view_dims: Sequence[int]) -> "Hyperparams":
        if self.d is not None:
            return self
        return replace(self, d=int(min(view_dims)))


@dataclass(frozen=True, eq=False)
class ModelState:
    Z: np.ndarray  # n x d, row i is the intact vector of point i
    W: tuple[np.ndarray, ...]  # W[j] is d_j x d
    omega: np.ndarray
    beta: np.ndarray  # n hinge indicators in {0, 1}

    @property
    def d(self) -> int:
        return int(self.Z.shape[1])


@dataclass(frozen=True, eq=False)
class ModelBundle:
    """What survives training: view maps, classifier, settings, positive class."""

    W: tuple[np.ndarray, ...]
    omega: np.ndarray
    hyperparams: Hyperparams
    class_tag: int = 1

    @property
    def view_dims(self) -> tuple[int, ...]:
        return tuple(int(w.shape[0]) for w in self.W)

    @property
    def d(self) -> int:
        return int(self.omega.shape[0])

    def with_omega(self, omega) -> "ModelBundle":
        return replace(self, omega=np.asarray(omega, dtype=float))


@dataclass(frozen=True)
class ObjectiveTerms:
    reconstruction_term: float
    classification_term: float
    regularization_term: float
    total: float


@dataclass
class TrainReport:
    objective_trace: list[ObjectiveTerms] = field(default_factory=list)
    wall_time: float = 0.0
    final_beta_active_count: int = 0


def validate(dataset: MultiviewDataset, binary: bool = False) -> list[str]:
    """Return one message per broken dataset invariant; empty when well formed."""
    problems = []
    n = dataset.n
    if dataset.labels.ndim != 1:
        problems.append(f"labels must be a 1-d array, got shape {dataset.labels.shape}")
    if dataset.m < 1:
        problems.append("dataset has no views")
    for j, X in enumerate(dataset.views):
        if X.ndim != 2:
            problems.append(f"view {j}: expected a 2-d matrix, got shape {X.shape}")
            continue
        if X.shape[0] != n:
            problems.append(f"view {j}: has {X.shape[0]} rows, expected n={n}")
        if X.shape[1] < 1:
            problems.append(f"view {j}: has no feature columns")
        bad = np.argwhere(~np.isfinite(X))
        if bad.size:
            r, col = (int(a) for a in bad[0])
            problems.append(
                f"view {j}: non-finite entry {X[r, col]!r} at row {r}, column {col}"
                + (f" ({len(bad) - 1} more)" if len(bad) > 1 else "")
            )
    if binary:
        off = np.flatnonzero((dataset.labels != 1) & (dataset.labels != -1))
        if off.size:
            problems.append(
                f"labels: binary mode needs +1/-1, found {dataset.labels[off[0]]} "
                f"at position {int(off[0])}"
            )
    return problems


def check_state(dataset: MultiviewDataset, state: ModelState) -> None:
    """Raise ShapeError if ``state`` does not fit ``dataset``."""
    n, d = state.Z.shape
    if n != dataset.n:
        raise ShapeError(f"Z has {n} rows but the dataset has n={dataset.n}")
    if len(state.W) != dataset.m:
        raise ShapeError(f"state has {len(state.W)} view maps, dataset has m={dataset.m}")
    for j, (W, dj) in enumerate(zip(state.W, dataset.view_dims)):
        if W.shape != (dj, d):
            raise ShapeError(f"W[{j}] has shape {W.shape}, expected {(dj, d)}")
    if state.omega.shape != (d,):
        raise ShapeError(f"omega has shape {state.omega.shape}, expected {(d,)}")
    if state.beta.shape != (n,):
        raise ShapeError(f"beta has shape {state.beta.shape}, expected {(n,)}")
