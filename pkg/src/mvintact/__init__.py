"""Supervised multiview learning through shared latent intact vectors.

Each point i has an intact vector z_i; view j is modelled as x_i^j ~ W_j z_i
under a Cauchy loss, and a linear hinge classifier omega acts on z_i. All
three blocks are fitted by alternating gradient descent.
"""

from .data import SyntheticSpec, generate_synthetic, load_bundle, load_dataset, save_bundle, save_dataset
from .evaluation import CvConfig, SweepConfig, accuracy, cross_validate, kfold_split, sensitivity_sweep
from .inference import (
    InferenceConfig,
    classify_binary,
    classify_multiclass,
    decision_value,
    infer_intact,
)
from .losses import cauchy_error, hinge_indicator, hinge_loss, objective, regularizer
from .model import Hyperparams, ModelBundle, ModelState, MultiviewDataset, TrainReport, validate
from .trainer import StepSchedule, initialize, train, train_epoch, train_one_vs_all

__version__ = "0.1.0"
