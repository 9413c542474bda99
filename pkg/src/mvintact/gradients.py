"""Hand-derived gradients of the per-block subproblems, and a finite-difference checker.

The three block objectives, with the hinge indicators ``beta`` held fixed:

    g(z_i)   = sum_j log(1 + ||x_i^j - W_j z_i||^2 / c^2)
               + alpha * beta_i * (1 - y_i <omega, z_i>) + gamma ||z_i||^2
    f(W_j)   = sum_i log(1 + ||x_i^j - W_j z_i||^2 / c^2) + gamma ||W_j||_F^2
    h(omega) = alpha * sum_i beta_i (1 - y_i <omega, z_i>) + gamma ||omega||^2

Note the reconstruction gradient carries a minus sign, and the l2 penalties
contribute ``2 * gamma * v``. The ``*_as_printed`` variants drop the sign and
use ``gamma * v``; they exist only so the checker has a known-bad build to
reject.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import Hyperparams, ModelState, MultiviewDataset, check_state


def _check_index(k: int, size: int, what: str) -> None:
    if not 0 <= k < size:
        raise IndexError(f"{what} index {k} out of range [0, {size})")


def _cauchy_weights(R: np.ndarray, c: float) -> np.ndarray:
    # d/dr log(1 + |r|^2/c^2) = 2 r / (c^2 + |r|^2)
    return 2.0 / (c**2 + np.einsum("ij,ij->i", R, R))


def grad_Z(
    dataset: MultiviewDataset,
    state: ModelState,
    hp: Hyperparams,
    recon_sign: float = -1.0,
    reg_factor: float = 2.0,
) -> np.ndarray:
    """Gradient of g(z_i) for every i at once, stacked as an n x d matrix."""
    check_state(dataset, state)
    Z = state.Z
    G = np.zeros_like(Z)
    for X, W in zip(dataset.views, state.W):
        R = X - Z @ W.T
        G += recon_sign * (_cauchy_weights(R, hp.c)[:, None] * R) @ W
    y = dataset.labels.astype(float)
    G -= hp.alpha * (state.beta * y)[:, None] * state.omega[None, :]
    G += reg_factor * hp.gamma * Z
    return G


def grad_z(i: int, dataset: MultiviewDataset, state: ModelState, hp: Hyperparams) -> np.ndarray:
    """Gradient of g(z_i) with beta_i frozen."""
    check_state(dataset, state)
    _check_index(i, dataset.n, "point")
    z = state.Z[i]
    g = np.zeros_like(z)
    for X, W in zip(dataset.views, state.W):
        r = X[i] - W @ z
        g -= 2.0 * (W.T @ r) / (hp.c**2 + r @ r)
    g -= hp.alpha * state.beta[i] * dataset.labels[i] * state.omega
    return g + 2.0 * hp.gamma * z


def grad_W(
    j: int,
    dataset: MultiviewDataset,
    state: ModelState,
    hp: Hyperparams,
    recon_sign: float = -1.0,
    reg_factor: float = 2.0,
) -> np.ndarray:
    """Gradient of f(W_j); reads the current Z in ``state``."""
    check_state(dataset, state)
    _check_index(j, dataset.m, "view")
    X, W = dataset.views[j], state.W[j]
    R = X - state.Z @ W.T
    G = recon_sign * (_cauchy_weights(R, hp.c)[:, None] * R).T @ state.Z
    return G + reg_factor * hp.gamma * W


def grad_omega(
    dataset: MultiviewDataset, state: ModelState, hp: Hyperparams, reg_factor: float = 2.0
) -> np.ndarray:
    check_state(dataset, state)
    y = dataset.labels.astype(float)
    return -hp.alpha * (state.beta * y) @ state.Z + reg_factor * hp.gamma * state.omega


# Known-bad forms, kept for mutation testing of the checker.


def grad_z_as_printed(i, dataset, state, hp):
    _check_index(i, dataset.n, "point")
    return grad_Z(dataset, state, hp, recon_sign=1.0, reg_factor=1.0)[i]


def grad_W_as_printed(j, dataset, state, hp):
    return grad_W(j, dataset, state, hp, recon_sign=1.0, reg_factor=1.0)


def grad_omega_as_printed(dataset, state, hp):
    return grad_omega(dataset, state, hp, reg_factor=1.0)


def finite_diff(f: Callable[[np.ndarray], float], point, h: float = 1e-6) -> np.ndarray:
    """Central differences of scalar ``f`` at ``point`` (flat vector)."""
    if not h > 0:
        raise ValueError(f"step h must be positive, got {h}")
    x0 = np.array(point, dtype=float).ravel()
    grad = np.empty_like(x0)
    for k in range(x0.size):
        x = x0.copy()
        x[k] = x0[k] + h
        fp = f(x)
        x[k] = x0[k] - h
        fm = f(x)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise FloatingPointError(f"objective is not finite around component {k}")
        grad[k] = (fp - fm) / (2 * h)
    return grad


# Block objectives as plain functions of a flat variable vector. The hinge is
# evaluated exactly (max), so these agree with the frozen-beta forms only away
# from the margin boundary; callers exclude near-boundary points.


def z_slice(i: int, dataset: MultiviewDataset, state: ModelState, hp: Hyperparams):
    xs = [X[i] for X in dataset.views]
    y = float(dataset.labels[i])

    def g(z):
        val = 0.0
        for x, W in zip(xs, state.W):
            r = x - W @ z
            val += np.log1p(r @ r / hp.c**2)
        return val + hp.alpha * max(0.0, 1.0 - y * (state.omega @ z)) + hp.gamma * (z @ z)

    return g


def w_slice(j: int, dataset: MultiviewDataset, state: ModelState, hp: Hyperparams):
    X, shape = dataset.views[j], state.W[j].shape

    def f(w):
        W = w.reshape(shape)
        R = X - state.Z @ W.T
        return float(np.sum(np.log1p(np.einsum("ij,ij->i", R, R) / hp.c**2))) + hp.gamma * (w @ w)

    return f


def omega_slice(dataset: MultiviewDataset, state: ModelState, hp: Hyperparams):
    y = dataset.labels.astype(float)

    def h(omega):
        return hp.alpha * float(np.sum(np.maximum(0.0, 1.0 - y * (state.Z @ omega)))) + hp.gamma * (
            omega @ omega
        )

    return h


def rel_err(analytic, numeric) -> float:
    a = np.ravel(analytic)
    return float(np.linalg.norm(a - np.ravel(numeric)) / max(1.0, np.linalg.norm(a)))


def random_instance(rng: np.random.Generator, max_n=5, max_m=3, max_d=4, max_dj=6):
    """Small random (dataset, state, hp) with beta consistent with the state."""
    n = int(rng.integers(1, max_n + 1))
    m = int(rng.integers(1, max_m + 1))
    d = int(rng.integers(1, max_d + 1))
    dims = [int(v) for v in rng.integers(1, max_dj + 1, size=m)]
    views = tuple(rng.normal(size=(n, dj)) for dj in dims)
    labels = rng.choice(np.array([-1, 1]), size=n)
    ds = MultiviewDataset(views=views, labels=labels.astype(np.int64))
    Z = rng.normal(size=(n, d))
    W = tuple(rng.normal(size=(dj, d)) for dj in dims)
    omega = rng.normal(size=d)
    beta = (1.0 - labels * (Z @ omega) > 0).astype(np.int64)
    hp = Hyperparams(
        alpha=float(rng.uniform(0, 2)),
        gamma=float(rng.uniform(0, 1)),
        c=float(rng.uniform(0.5, 2.0)),
        d=d,
    )
    return ds, ModelState(Z=Z, W=W, omega=omega, beta=beta), hp


@dataclass
class BlockResult:
    block: str
    max_rel_err: float
    worst_trial: int
    trials: int


def gradcheck(trials: int = 20, seed: int = 0, printed: bool = False, h: float = 1e-6,
              boundary_tol: float = 1e-4) -> dict[str, BlockResult]:
    """Compare analytic block gradients with central differences on random instances.

    Instance ``t`` is drawn from ``default_rng([seed, t])``; instances with a
    point within ``boundary_tol`` of the hinge kink are redrawn for the z and
    omega blocks. ``printed=True`` swaps in the known-bad gradient forms.
    """
    gz = grad_z_as_printed if printed else grad_z
    gW = grad_W_as_printed if printed else grad_W
    go = grad_omega_as_printed if printed else grad_omega
    worst = {name: (0.0, -1) for name in ("grad_z", "grad_W", "grad_omega")}

    def record(name, err, t):
        if err > worst[name][0] or worst[name][1] < 0:
            worst[name] = (err, t)

    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        while True:
            ds, st, hp = random_instance(rng)
            slack = 1.0 - ds.labels * (st.Z @ st.omega)
            if np.all(np.abs(slack) >= boundary_tol):
                break
        for i in range(ds.n):
            record("grad_z", rel_err(gz(i, ds, st, hp), finite_diff(z_slice(i, ds, st, hp), st.Z[i], h)), t)
        for j in range(ds.m):
            record("grad_W", rel_err(gW(j, ds, st, hp), finite_diff(w_slice(j, ds, st, hp), st.W[j], h)), t)
        record("grad_omega", rel_err(go(ds, st, hp), finite_diff(omega_slice(ds, st, hp), st.omega, h)), t)

    return {k: BlockResult(k, e, t, trials) for k, (e, t) in worst.items()}

