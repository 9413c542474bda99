"""Dataset and bundle files, plus a synthetic generator with known ground truth.

Dataset manifest (plain ``key=value`` lines, ``#`` starts a comment)::

    n=200
    m=3
    view_dims=8,8,8
    views=view_1.csv,view_2.csv,view_3.csv
    labels=labels.csv

Paths are relative to the manifest. View CSVs have n rows of d_j
comma-separated numbers and no header; the labels CSV has one integer per row.

A bundle directory holds ``manifest`` (key=value), ``W_1.csv`` .. ``W_m.csv``
(d_j rows x d columns) and ``omega.csv`` (d rows x 1 column). Floats are
written with ``repr`` so that reading them back is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .losses import reconstruct
from .model import Hyperparams, ModelBundle, MultiviewDataset, validate

BUNDLE_FORMAT = 1
MAX_REJECTIONS = 10**6


class DatasetError(ValueError):
    pass


class BundleError(ValueError):
    pass


# ---------------------------------------------------------------- text helpers


def _fmt(v: float) -> str:
    return repr(float(v))


def write_matrix(path: Path, A: np.ndarray) -> None:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in A.tolist():
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_matrix(path: Path, ncols: int | None = None, what: str = "") -> np.ndarray:
    label = what or str(path)
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise DatasetError(f"{label}: cannot read {path}: {e.strerror}") from e
    rows = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        cells = line.split(",")
        if ncols is not None and len(cells) != ncols:
            raise DatasetError(
                f"{label}: {path}:{lineno}: expected {ncols} columns, found {len(cells)}"
            )
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            bad = next(c for c in cells if not _is_float(c))
            raise DatasetError(f"{label}: {path}:{lineno}: non-numeric cell {bad.strip()!r}") from None
    if ncols is None and rows and len({len(r) for r in rows}) > 1:
        raise DatasetError(f"{label}: {path}: ragged rows")
    if not rows:
        return np.zeros((0, ncols or 0))
    return np.array(rows, dtype=float)


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_keyvalue(path: Path) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DatasetError(f"cannot read manifest {path}: {e.strerror}") from e
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DatasetError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def write_keyvalue(path: Path, items: Sequence[tuple[str, object]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, v in items:
            fh.write(f"{k}={v}\n")


def _int_list(s: str) -> list[int]:
    return [int(p) for p in s.split(",") if p.strip()]


# ---------------------------------------------------------------- datasets


def read_views(manifest_path) -> tuple[list[np.ndarray], np.ndarray | None]:
    """Views and labels named by a manifest; labels are None when the key is absent."""
    manifest_path = Path(manifest_path)
    kv = read_keyvalue(manifest_path)
    for key in ("n", "m", "view_dims", "views"):
        if key not in kv:
            raise DatasetError(f"{manifest_path}: missing key {key!r}")
    try:
        n, m = int(kv["n"]), int(kv["m"])
        dims = _int_list(kv["view_dims"])
    except ValueError as e:
        raise DatasetError(f"{manifest_path}: bad integer field: {e}") from None
    paths = [p.strip() for p in kv["views"].split(",") if p.strip()]
    if len(dims) != m or len(paths) != m:
        raise DatasetError(
            f"{manifest_path}: m={m} but {len(dims)} view_dims and {len(paths)} view paths"
        )
    root = manifest_path.parent
    views = []
    for j, (rel, dj) in enumerate(zip(paths, dims), start=1):
        p = root / rel
        if not p.exists():
            raise DatasetError(f"view {j}: file not found: {p}")
        X = read_matrix(p, ncols=dj, what=f"view {j} (declared d_{j}={dj})")
        if X.shape[0] != n:
            raise DatasetError(f"view {j}: {p} has {X.shape[0]} rows, manifest says n={n}")
        views.append(X)
    if "labels" not in kv:
        return views, None
    lp = root / kv["labels"]
    if not lp.exists():
        raise DatasetError(f"labels: file not found: {lp}")
    raw = read_matrix(lp, ncols=1, what="labels")
    if raw.shape[0] != n:
        raise DatasetError(f"labels: {lp} has {raw.shape[0]} rows, manifest says n={n}")
    if np.any(raw != np.round(raw)):
        raise DatasetError(f"labels: {lp} contains non-integer values")
    return views, raw[:, 0].astype(np.int64)


def load_dataset(manifest_path) -> MultiviewDataset:
    views, labels = read_views(manifest_path)
    if labels is None:
        raise DatasetError(f"{manifest_path}: missing key 'labels'")
    ds = MultiviewDataset(views=tuple(views), labels=labels)
    problems = validate(ds)
    if problems:
        raise DatasetError(f"{manifest_path}: " + "; ".join(problems))
    return ds


def save_dataset(dataset: MultiviewDataset, out_dir, manifest_name: str = "manifest.txt") -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = [f"view_{j}.csv" for j in range(1, dataset.m + 1)]
    for name, X in zip(names, dataset.views):
        write_matrix(out / name, X)
    with open(out / "labels.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(f"{int(v)}\n" for v in dataset.labels)
    path = out / manifest_name
    write_keyvalue(path, [
        ("n", dataset.n),
        ("m", dataset.m),
        ("view_dims", ",".join(str(d) for d in dataset.view_dims)),
        ("views", ",".join(names)),
        ("labels", "labels.csv"),
    ])
    return path


# ---------------------------------------------------------------- bundles

_HP_TYPES = {f.name: f.type for f in fields(Hyperparams)}


def save_bundle(bundle: ModelBundle, dir_path) -> Path:
    out = Path(dir_path)
    out.mkdir(parents=True, exist_ok=True)
    hp = bundle.hyperparams
    items = [
        ("format", BUNDLE_FORMAT),
        ("m", len(bundle.W)),
        ("view_dims", ",".join(str(d) for d in bundle.view_dims)),
        ("d", bundle.d),
        ("class_tag", int(bundle.class_tag)),
    ]
    for f in fields(Hyperparams):
        v = getattr(hp, f.name)
        items.append((f"hp.{f.name}", _fmt(v) if isinstance(v, float) else v))
    write_keyvalue(out / "manifest", items)
    for j, W in enumerate(bundle.W, start=1):
        write_matrix(out / f"W_{j}.csv", W)
    write_matrix(out / "omega.csv", bundle.omega.reshape(-1, 1))
    return out


def _parse_hp(kv: dict[str, str]) -> Hyperparams:
    args = {}
    for name in _HP_TYPES:
        raw = kv.get(f"hp.{name}")
        if raw is None:
            continue
        if name in ("alpha", "gamma", "c", "init_scale"):
            args[name] = float(raw)
        elif raw == "None":
            args[name] = None
        else:
            args[name] = int(raw)
    return Hyperparams(**args)


def load_bundle(dir_path) -> ModelBundle:
    root = Path(dir_path)
    mpath = root / "manifest"
    if not mpath.exists():
        raise BundleError(f"{root}: not a bundle directory (no manifest)")
    try:
        kv = read_keyvalue(mpath)
        m, d = int(kv["m"]), int(kv["d"])
        dims = _int_list(kv["view_dims"])
        tag = int(kv["class_tag"])
        hp = _parse_hp(kv)
    except (KeyError, ValueError) as e:
        raise BundleError(f"{mpath}: corrupt manifest ({e})") from None
    if len(dims) != m:
        raise BundleError(f"{mpath}: m={m} but view_dims lists {len(dims)} entries")
    W = []
    for j, dj in enumerate(dims, start=1):
        p = root / f"W_{j}.csv"
        if not p.exists():
            raise BundleError(f"{root}: missing W_{j}.csv")
        try:
            Wj = read_matrix(p, ncols=d, what=f"W_{j}")
        except DatasetError as e:
            raise BundleError(str(e)) from None
        if Wj.shape != (dj, d):
            raise BundleError(f"W_{j}.csv has shape {Wj.shape}, manifest says {(dj, d)}")
        W.append(Wj)
    p = root / "omega.csv"
    if not p.exists():
        raise BundleError(f"{root}: missing omega.csv")
    try:
        omega = read_matrix(p, ncols=1, what="omega")
    except DatasetError as e:
        raise BundleError(str(e)) from None
    if omega.shape != (d, 1):
        raise BundleError(f"omega.csv has shape {omega.shape}, manifest says {(d, 1)}")
    arrays = W + [omega]
    if not all(np.all(np.isfinite(a)) for a in arrays):
        raise BundleError(f"{root}: bundle contains non-finite values")
    return ModelBundle(W=tuple(W), omega=omega[:, 0], hyperparams=hp, class_tag=tag)


def save_bundles(bundles: Sequence[ModelBundle], out_dir) -> list[Path]:
    """One subdirectory ``class_<tag>`` per bundle."""
    out = Path(out_dir)
    return [save_bundle(b, out / f"class_{b.class_tag}") for b in bundles]


def load_bundles(model_dir) -> list[ModelBundle]:
    """Load a single bundle directory or a directory of ``class_*`` bundles."""
    root = Path(model_dir)
    if (root / "manifest").exists():
        return [load_bundle(root)]
    subdirs = sorted(p for p in root.glob("class_*") if p.is_dir())
    if not subdirs:
        raise BundleError(f"{root}: no bundle found")
    return sorted((load_bundle(p) for p in subdirs), key=lambda b: b.class_tag)


# ---------------------------------------------------------------- synthetic data


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 200
    m: int = 3
    d: int = 5
    view_dims: tuple[int, ...] = (8, 8, 8)
    n_classes: int = 2
    noise_sigma: float = 0.01
    margin: float = 0.5
    seed: int = 7
    prototype_scale: float = 2.0

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.d < 1:
            raise ValueError("n, m and d must be positive")
        if len(self.view_dims) != self.m:
            raise ValueError(f"view_dims has {len(self.view_dims)} entries, m={self.m}")
        if any(dj < 1 for dj in self.view_dims):
            raise ValueError("view dimensions must be positive")
        if self.n_classes < 2:
            raise ValueError("n_classes must be >= 2")
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be nonnegative")
        if not self.margin > 0:
            raise ValueError("margin must be positive")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


@dataclass(frozen=True, eq=False)
class GroundTruth:
    Z: np.ndarray
    W: tuple[np.ndarray, ...]
    omega: np.ndarray | None  # binary mode
    prototypes: np.ndarray | None  # multiclass mode


def _draw_intact(spec: SyntheticSpec, rng: np.random.Generator):
    if spec.n_classes == 2:
        omega = rng.normal(size=spec.d)
        omega /= np.linalg.norm(omega)
        Z = np.empty((spec.n, spec.d))
        for i in range(spec.n):
            for _ in range(MAX_REJECTIONS):
                z = rng.normal(size=spec.d)
                if abs(z @ omega) >= spec.margin:
                    break
            else:
                raise ValueError(f"margin {spec.margin} too large: point {i} rejected {MAX_REJECTIONS} times")
            Z[i] = z
        labels = np.where(Z @ omega > 0, 1, -1).astype(np.int64)
        return Z, labels, omega, None

    # prototypes plus unit jitter; keep points whose nearest prototype wins by >= margin
    P = rng.normal(scale=spec.prototype_scale, size=(spec.n_classes, spec.d))
    Z = np.empty((spec.n, spec.d))
    labels = np.empty(spec.n, dtype=np.int64)
    for i in range(spec.n):
        k = int(rng.integers(spec.n_classes))
        for _ in range(MAX_REJECTIONS):
            z = P[k] + rng.normal(size=spec.d)
            dist = np.sort(np.linalg.norm(P - z, axis=1))
            if dist[1] - dist[0] >= spec.margin:
                break
        else:
            raise ValueError(f"margin {spec.margin} too large: point {i} rejected {MAX_REJECTIONS} times")
        Z[i] = z
        labels[i] = int(np.argmin(np.linalg.norm(P - z, axis=1)))
    return Z, labels, None, P


def generate_synthetic(spec: SyntheticSpec) -> tuple[MultiviewDataset, GroundTruth]:
    """Views are unit-column linear maps of Gaussian intact vectors plus noise.

    Binary mode labels are sign(<omega*, z*>) with |<omega*, z*>| >= margin and
    unit-norm omega*. With more classes, labels name the nearest prototype.
    """
    rng = np.random.default_rng(spec.seed)
    Z, labels, omega, P = _draw_intact(spec, rng)
    W = []
    for dj in spec.view_dims:
        Wj = rng.normal(size=(dj, spec.d))
        W.append(Wj / np.linalg.norm(Wj, axis=0, keepdims=True))
    views = []
    for Wj in W:
        X = reconstruct(Z, Wj)
        if spec.noise_sigma > 0:
            X = X + rng.normal(scale=spec.noise_sigma, size=X.shape)
        views.append(X)
    ds = MultiviewDataset(views=tuple(views), labels=labels)
    return ds, GroundTruth(Z=Z, W=tuple(W), omega=omega, prototypes=P)


def save_ground_truth(truth: GroundTruth, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(out / "Z.csv", truth.Z)
    for j, W in enumerate(truth.W, start=1):
        write_matrix(out / f"W_{j}.csv", W)
    if truth.omega is not None:
        write_matrix(out / "omega.csv", truth.omega.reshape(-1, 1))
    if truth.prototypes is not None:
        write_matrix(out / "prototypes.csv", truth.prototypes)
    return out
