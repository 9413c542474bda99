"""Command line entry point: ``mvintact {train,predict,cv,sweep,synth,gradcheck}``.

Exit codes: 0 success, 1 runtime or numerical failure, 2 usage error.
Lines on stdout meant for scripts are ``key=value``.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import data
from .evaluation import SWEEP_DEFAULT, CvConfig, SweepConfig, accuracy, cross_validate, sensitivity_sweep
from .gradients import gradcheck
from .inference import InferenceConfig, decision_matrix
from .model import Hyperparams, NumericalError, ShapeError
from .trainer import StepSchedule, train_one_vs_all

GRADCHECK_TOL = 1e-5

log = logging.getLogger("mvintact")


def _fmt(v) -> str:
    return repr(float(v))


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _float_list(s: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in s.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _int_list(s: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in s.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def _add_hp_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--alpha", type=float, default=1.0, help="hinge loss weight")
    g.add_argument("--gamma", type=float, default=0.01, help="l2 penalty weight")
    g.add_argument("--c", type=float, default=1.0, help="Cauchy scale")
    g.add_argument("--dim", type=int, default=None, help="intact dimension (default: smallest view)")
    g.add_argument("--iters", type=int, default=100, help="training iterations T")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--init-scale", type=float, default=0.01)
    g.add_argument("--step-base", type=float, default=1.0, help="step size is base/t (or base)")
    g.add_argument("--schedule", choices=["inverse_t", "constant"], default="inverse_t")


def _add_inf_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t-inf", type=int, default=200, help="descent steps per test point")
    p.add_argument("--inf-init", choices=["zero", "gaussian"], default="zero")


def _hp(args) -> Hyperparams:
    return Hyperparams(alpha=args.alpha, gamma=args.gamma, c=args.c, d=args.dim, T=args.iters,
                       t_inf=args.t_inf if hasattr(args, "t_inf") else 200,
                       seed=args.seed, init_scale=args.init_scale)


def _schedule(args) -> StepSchedule:
    return StepSchedule(kind=args.schedule, base=args.step_base)


def _inf(args) -> InferenceConfig:
    return InferenceConfig(t_inf=args.t_inf, init=args.inf_init)


def cmd_train(args) -> int:
    ds = data.load_dataset(args.data)
    bundles, reports = train_one_vs_all(ds, _hp(args), _schedule(args), with_reports=True)
    out = Path(args.out)
    data.save_bundles(bundles, out)
    rows = []
    for b, rep in zip(bundles, reports):
        for t, r in enumerate(rep.objective_trace):
            rows.append([b.class_tag, t, _fmt(r.reconstruction_term), _fmt(r.classification_term),
                         _fmt(r.regularization_term), _fmt(r.total)])
    _write_csv(out / "trace.csv", ["class_tag", "iteration", "recon", "class", "reg", "total"], rows)
    for b, rep in zip(bundles, reports):
        print(f"class={b.class_tag} objective_initial={_fmt(rep.objective_trace[0].total)} "
              f"objective_final={_fmt(rep.objective_trace[-1].total)}")
    return 0


def cmd_predict(args) -> int:
    views, labels = data.read_views(args.data)
    bundles = data.load_bundles(args.model)
    tags, V = decision_matrix(views, bundles, _inf(args))
    if len(tags) == 1:
        pred = np.where(V[:, 0] >= 0, 1, -1)
    else:
        pred = tags[np.argmax(V, axis=1)]
    header = ["index", "predicted_label"] + [f"decision_{t}" for t in tags]
    rows = [[i, int(pred[i])] + [_fmt(v) for v in V[i]] for i in range(len(pred))]
    _write_csv(Path(args.out) / "predictions.csv", header, rows)
    if labels is not None:
        print(f"accuracy={_fmt(accuracy(pred, labels))}")
    return 0


def cmd_cv(args) -> int:
    ds = data.load_dataset(args.data)
    res = cross_validate(ds, _hp(args), _schedule(args), CvConfig(k=args.folds, seed=args.seed), _inf(args))
    _write_csv(Path(args.out) / "cv.csv", ["fold", "accuracy"],
               [[f, _fmt(a)] for f, a in enumerate(res.per_fold_accuracy)])
    print(f"mean_accuracy={_fmt(res.mean)}")
    print(f"std={_fmt(res.std)}")
    return 0


def cmd_sweep(args) -> int:
    ds = data.load_dataset(args.data)
    sweep = SweepConfig(param=args.param, values=args.values, base_hp=_hp(args))
    rows = sensitivity_sweep(ds, sweep, _schedule(args), CvConfig(k=args.folds, seed=args.seed), _inf(args))
    _write_csv(Path(args.out) / f"sweep_{args.param}.csv", ["value", "mean_accuracy", "std"],
               [[_fmt(r.value), _fmt(r.mean_accuracy), _fmt(r.std)] for r in rows])
    for r in rows:
        print(f"{args.param}={_fmt(r.value)} mean_accuracy={_fmt(r.mean_accuracy)} std={_fmt(r.std)}")
    return 0


def cmd_synth(args, parser) -> int:
    dims = args.view_dims or tuple([args.dim + 3] * args.views)
    try:
        spec = data.SyntheticSpec(n=args.n, m=args.views, d=args.dim, view_dims=dims,
                                  n_classes=args.classes, noise_sigma=args.noise,
                                  margin=args.margin, seed=args.seed)
    except ValueError as e:
        parser.error(str(e))
    ds, truth = data.generate_synthetic(spec)
    out = Path(args.out)
    path = data.save_dataset(ds, out)
    data.save_ground_truth(truth, out / "ground_truth")
    print(f"manifest={path}")
    return 0


def cmd_gradcheck(args) -> int:
    results = gradcheck(trials=args.trials, seed=args.seed, printed=args.inject_sign_flip)
    ok = True
    for name, r in results.items():
        print(f"{name} max_rel_err={r.max_rel_err:.3e}")
        if not r.max_rel_err < GRADCHECK_TOL:
            ok = False
            print(f"FAIL {name}: worst instance seed={args.seed} trial={r.worst_trial}", file=sys.stderr)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvintact", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="one-vs-all training, writes bundles and trace.csv")
    p.add_argument("--data", required=True, help="dataset manifest")
    p.add_argument("--out", required=True, help="output directory for bundles")
    _add_hp_flags(p)

    p = sub.add_parser("predict", help="classify a dataset with trained bundles")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True, help="bundle directory (or directory of class_* bundles)")
    p.add_argument("--out", default=".", help="directory for predictions.csv")
    _add_inf_flags(p)

    p = sub.add_parser("cv", help="k-fold cross-validation")
    p.add_argument("--data", required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--out", default=".", help="directory for cv.csv")
    _add_hp_flags(p)
    _add_inf_flags(p)

    p = sub.add_parser("sweep", help="cross-validated sensitivity to alpha or gamma")
    p.add_argument("--data", required=True)
    p.add_argument("--param", required=True, choices=["alpha", "gamma"])
    p.add_argument("--values", type=_float_list, default=SWEEP_DEFAULT)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--out", default=".", help="directory for sweep_<param>.csv")
    _add_hp_flags(p)
    _add_inf_flags(p)

    p = sub.add_parser("synth", help="write a synthetic dataset and its ground truth")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--views", type=int, default=3)
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--view-dims", type=_int_list, default=None)
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--margin", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)

    p = sub.add_parser("gradcheck", help="analytic vs finite-difference gradients")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-sign-flip", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {
        "train": cmd_train,
        "predict": cmd_predict,
        "cv": cmd_cv,
        "sweep": cmd_sweep,
        "gradcheck": cmd_gradcheck,
    }
    try:
        if args.command == "synth":
            return cmd_synth(args, parser)
        return handlers[args.command](args)
    except (ValueError, ArithmeticError, ShapeError, NumericalError, IndexError, OSError) as e:
        print(f"mvintact {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
