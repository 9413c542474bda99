"""Cross-validated alpha and gamma sweeps on the synthetic benchmark.

Writes sweep_alpha.csv and sweep_gamma.csv into --out. A setting that
diverges is reported and skipped rather than stopping the other sweep.
"""

import argparse
import sys
import tempfile
from pathlib import Path

from mvintact.cli import main as cli
from mvintact.data import SyntheticSpec, generate_synthetic, save_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="sweeps")
    ap.add_argument("--step-base", default="0.08")
    ap.add_argument("--folds", default="10")
    args = ap.parse_args()

    ds, _ = generate_synthetic(SyntheticSpec())
    with tempfile.TemporaryDirectory() as tmp:
        manifest = save_dataset(ds, Path(tmp))
        status = 0
        for param in ("alpha", "gamma"):
            code = cli(["sweep", "--data", str(manifest), "--param", param, "--folds", args.folds,
                        "--step-base", args.step_base, "--out", args.out])
            status = status or code
    return status


if __name__ == "__main__":
    sys.exit(main())
