"""One-pass online learning with dynamic feature scaling.

Binary linear classifiers trained in a single pass over a stream, with
feature scaling handled on the fly: either unsupervised running
standardization or scale parameters learned jointly with the classifier.
Includes passive-aggressive baselines, model averaging, and a benchmark
harness with grid search and multi-seed reproduction.
"""

from .dataset import (
    Dataset,
    DatasetError,
    Instance,
    ParseError,
    load_benchmark,
    load_csv,
    load_manifest,
    shuffle,
    split_train_test,
    validation_split,
)
from .learners import (
    BASE_METHODS,
    METHODS,
    AveragedLearner,
    Hyperparams,
    NumericFailure,
    canonical_method,
    cross_entropy_objective,
    learning_rate,
    make_learner,
)
from .scaling import RunningStats, linear_scale, sigmoid, sigmoid_scale

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "DatasetError",
    "Instance",
    "ParseError",
    "load_benchmark",
    "load_csv",
    "load_manifest",
    "shuffle",
    "split_train_test",
    "validation_split",
    "BASE_METHODS",
    "METHODS",
    "AveragedLearner",
    "Hyperparams",
    "NumericFailure",
    "canonical_method",
    "cross_entropy_objective",
    "learning_rate",
    "make_learner",
    "RunningStats",
    "linear_scale",
    "sigmoid",
    "sigmoid_scale",
    "__version__",
]
