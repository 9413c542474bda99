import numpy as np
import pytest

from mvintact.data import SyntheticSpec, generate_synthetic
from mvintact.model import Hyperparams, ModelState, MultiviewDataset
from mvintact.trainer import StepSchedule

# Step base used for the desk-scale benchmark. The unscaled 1/t schedule
# overshoots on n=160..200 points (the W and omega gradients sum over points).
BENCH_SCHEDULE = StepSchedule(kind="inverse_t", base=0.08)
BENCH_SPEC = SyntheticSpec(n=200, m=3, d=5, view_dims=(8, 8, 8), noise_sigma=0.01, margin=0.5, seed=7)

ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def bench():
    return generate_synthetic(BENCH_SPEC)


@pytest.fixture
def tiny():
    """n=4, m=2, d=3 random instance with consistent beta."""
    rng = np.random.default_rng(1234)
    views = (rng.normal(size=(4, 3)), rng.normal(size=(4, 2)))
    y = np.array([1, -1, -1, 1])
    ds = MultiviewDataset.from_arrays(views, y)
    Z = rng.normal(size=(4, 3))
    W = (rng.normal(size=(3, 3)), rng.normal(size=(2, 3)))
    omega = rng.normal(size=3)
    beta = (1 - y * (Z @ omega) > 0).astype(np.int64)
    hp = Hyperparams(alpha=0.7, gamma=0.3, c=1.3, d=3)
    return ds, ModelState(Z=Z, W=W, omega=omega, beta=beta), hp
